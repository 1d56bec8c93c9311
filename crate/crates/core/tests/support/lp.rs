//! Dense simplex for small oracle LPs.
//!
//! Solves `max c·x` subject to `A x <= b`, `x >= 0` with `b >= 0`, so the
//! origin is a feasible start and no phase one is needed. Bland's rule keeps
//! the heavily degenerate problems used by the tests from cycling.

#![allow(dead_code)]

pub struct Lp {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Debug, PartialEq)]
pub enum LpResult {
    Optimal { value: f64, x: Vec<f64> },
    Unbounded,
}

impl Lp {
    pub fn new(vars: usize) -> Lp {
        Lp { c: vec![0.0; vars], a: Vec::new(), b: Vec::new() }
    }

    /// Adds `Σ coeffs · x <= rhs`.
    pub fn le(&mut self, coeffs: &[(usize, f64)], rhs: f64) {
        assert!(rhs >= 0.0, "right-hand sides must be nonnegative");
        let mut row = vec![0.0; self.c.len()];
        for &(j, v) in coeffs {
            row[j] += v;
        }
        self.a.push(row);
        self.b.push(rhs);
    }

    pub fn solve(&self) -> LpResult {
        const EPS: f64 = 1e-12;
        let m = self.a.len();
        let n = self.c.len();
        let w = n + m + 1;
        // tableau rows: constraints, then the objective row
        let mut t = vec![vec![0.0; w]; m + 1];
        for i in 0..m {
            t[i][..n].copy_from_slice(&self.a[i]);
            t[i][n + i] = 1.0;
            t[i][w - 1] = self.b[i];
        }
        for j in 0..n {
            t[m][j] = -self.c[j];
        }
        let mut basis: Vec<usize> = (n..n + m).collect();
        loop {
            let Some(col) = (0..w - 1).find(|&j| t[m][j] < -EPS) else {
                break;
            };
            let mut row = None;
            let mut best = f64::INFINITY;
            for i in 0..m {
                if t[i][col] > EPS {
                    let r = t[i][w - 1] / t[i][col];
                    let better = r < best - EPS
                        || ((r - best).abs() <= EPS && row.is_some_and(|k: usize| basis[i] < basis[k]));
                    if better {
                        best = r;
                        row = Some(i);
                    }
                }
            }
            let Some(row) = row else {
                return LpResult::Unbounded;
            };
            let p = t[row][col];
            for v in t[row].iter_mut() {
                *v /= p;
            }
            let pivot = t[row].clone();
            for (i, r) in t.iter_mut().enumerate() {
                if i != row && r[col] != 0.0 {
                    let f = r[col];
                    for (x, y) in r.iter_mut().zip(&pivot) {
                        *x -= f * y;
                    }
                }
            }
            basis[row] = col;
        }
        let mut x = vec![0.0; n];
        for (i, &bv) in basis.iter().enumerate() {
            if bv < n {
                x[bv] = t[i][w - 1];
            }
        }
        LpResult::Optimal { value: t[m][w - 1], x }
    }
}

/// `max Σ μ_i f_i` over `f >= 0` vanishing on the boundary with
/// `Σ_edges w_e |f_i - f_j| <= 1`: the best discrete 1-Poincaré constant.
pub fn graph_poincare_lp(vmass: &[f64], edges: &[(usize, usize)], emass: &[f64], boundary: &[bool]) -> f64 {
    let free: Vec<usize> = (0..vmass.len()).filter(|&i| !boundary[i]).collect();
    let mut var = vec![usize::MAX; vmass.len()];
    for (k, &i) in free.iter().enumerate() {
        var[i] = k;
    }
    let nf = free.len();
    let mut lp = Lp::new(nf + edges.len());
    for (k, &i) in free.iter().enumerate() {
        lp.c[k] = vmass[i];
    }
    let mut budget = Vec::new();
    for (e, &(i, j)) in edges.iter().enumerate() {
        let ev = nf + e;
        budget.push((ev, emass[e]));
        for (p, q) in [(i, j), (j, i)] {
            // f_p - f_q - e <= 0
            let mut row = vec![(ev, -1.0)];
            if var[p] != usize::MAX {
                row.push((var[p], 1.0));
            }
            if var[q] != usize::MAX {
                row.push((var[q], -1.0));
            }
            lp.le(&row, 0.0);
        }
    }
    lp.le(&budget, 1.0);
    match lp.solve() {
        LpResult::Optimal { value, .. } => value,
        LpResult::Unbounded => f64::INFINITY,
    }
}

/// Best constant of `Σ |f| w m <= C Σ lip(f) m` over `f` vanishing on `zero`,
/// with `lip f(v) = max_u |f(v) - f(u)| / len(v, u)`.
///
/// Replacing `f` by `|f|` keeps the left side and does not raise `lip`, so
/// `f >= 0` loses nothing and the problem is a single LP.
pub fn lip_ratio_lp(
    n: usize,
    edges: &[(usize, usize, f64)],
    measure: &[f64],
    weight: &[f64],
    zero: &[usize],
) -> f64 {
    let mut fixed = vec![false; n];
    for &z in zero {
        fixed[z] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&v| !fixed[v]).collect();
    let mut var = vec![usize::MAX; n];
    for (k, &v) in free.iter().enumerate() {
        var[v] = k;
    }
    let nf = free.len();
    // variables: f on free vertices, then one slope bound per vertex
    let mut lp = Lp::new(nf + n);
    for (k, &v) in free.iter().enumerate() {
        lp.c[k] = weight[v] * measure[v];
    }
    for &(a, b, len) in edges {
        for (p, q) in [(a, b), (b, a)] {
            for sign in [1.0, -1.0] {
                // sign (f_p - f_q) / len - L_p <= 0
                let mut row = vec![(nf + p, -1.0)];
                if var[p] != usize::MAX {
                    row.push((var[p], sign / len));
                }
                if var[q] != usize::MAX {
                    row.push((var[q], -sign / len));
                }
                lp.le(&row, 0.0);
            }
        }
    }
    let budget: Vec<(usize, f64)> = (0..n).map(|v| (nf + v, measure[v])).collect();
    lp.le(&budget, 1.0);
    match lp.solve() {
        LpResult::Optimal { value, .. } => value,
        LpResult::Unbounded => f64::INFINITY,
    }
}

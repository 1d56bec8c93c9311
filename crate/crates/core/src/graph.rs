//! Weighted covering graphs and discrete inequalities on them.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{c_e, neumann_comparable, neumann_counting};
use crate::covering::GoodCovering;
use crate::error::{Error, Result};
use crate::space::Space;
use crate::tolerances::{below, FORMULA_REL};

/// Vertices are covering triples; `emass(i, j) = min(vmass(i), vmass(j))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoveringGraph {
    pub vmass: Vec<f64>,
    /// Unordered pairs `i < j`.
    pub edges: Vec<(usize, usize)>,
    pub emass: Vec<f64>,
    pub boundary: Vec<bool>,
    pub labels: Vec<(i32, usize)>,
}

impl CoveringGraph {
    pub fn new(vmass: Vec<f64>, edges: Vec<(usize, usize)>, boundary: Vec<bool>) -> Result<CoveringGraph> {
        let n = vmass.len();
        if boundary.len() != n {
            return Err(Error::InvalidArgument("boundary flags do not match vertex count".into()));
        }
        for (i, &m) in vmass.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::EmptyPiece(i));
            }
        }
        let mut es: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) out of range")));
            }
            if a != b {
                es.push((a.min(b), a.max(b)));
            }
        }
        es.sort_unstable();
        es.dedup();
        let emass = es.iter().map(|&(a, b)| vmass[a].min(vmass[b])).collect();
        let labels = (0..n).map(|i| (0, i)).collect();
        Ok(CoveringGraph { vmass, edges: es, emass, boundary, labels })
    }

    pub fn n(&self) -> usize {
        self.vmass.len()
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n()];
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            adj[a].push((b, self.emass[k]));
            adj[b].push((a, self.emass[k]));
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0];
        if self.n() == 0 {
            return true;
        }
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Same graph with every mass multiplied by `c`.
    pub fn scaled(&self, c: f64) -> CoveringGraph {
        let mut g = self.clone();
        g.vmass.iter_mut().for_each(|m| *m *= c);
        g.emass.iter_mut().for_each(|m| *m *= c);
        g
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.boundary[i]).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph covering_graph {\n");
        for i in 0..self.n() {
            let (l, a) = self.labels[i];
            let shape = if self.boundary[i] { "box" } else { "ellipse" };
            s.push_str(&format!(
                "  v{i} [label=\"({l},{a})\\n{:.6e}\", shape={shape}];\n",
                self.vmass[i]
            ));
        }
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            s.push_str(&format!("  v{a} -- v{b} [label=\"{:.6e}\"];\n", self.emass[k]));
        }
        s.push_str("}\n");
        s
    }
}

/// `vmass(i) = Σ_{x ∈ U_i} w(x) m(x)`; the outermost `boundary_levels` levels form the boundary.
pub fn build_covering_graph(
    cov: &GoodCovering,
    space: &Space,
    weight: &[f64],
    boundary_levels: usize,
) -> Result<CoveringGraph> {
    let m = space.measure();
    let vmass: Vec<f64> = cov.u.iter().map(|s| s.iter().map(|&v| m[v] * weight[v]).sum()).collect();
    let top = cov.labels.iter().map(|l| l.0).max().unwrap_or(0);
    let cut = top - boundary_levels.max(1) as i32;
    let boundary = cov.labels.iter().map(|l| l.0 > cut).collect();
    let mut g = CoveringGraph::new(vmass, cov.adjacency.clone(), boundary)?;
    g.labels = cov.labels.clone();
    Ok(g)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GraphProfile {
    /// Maximal degree.
    pub a: f64,
    /// Largest ratio of masses of adjacent vertices.
    pub b: f64,
    pub n: usize,
    /// `max vmass / min vmass`.
    pub k: f64,
}

pub fn graph_profile(g: &CoveringGraph) -> GraphProfile {
    let mut deg = vec![0usize; g.n()];
    let mut b = 1.0f64;
    for &(i, j) in &g.edges {
        deg[i] += 1;
        deg[j] += 1;
        b = b.max(g.vmass[i] / g.vmass[j]).max(g.vmass[j] / g.vmass[i]);
    }
    let a = deg.iter().cloned().max().unwrap_or(0).max(1) as f64;
    let mx = g.vmass.iter().cloned().fold(0.0, f64::max);
    let mn = g.vmass.iter().cloned().fold(f64::INFINITY, f64::min);
    GraphProfile { a, b, n: g.n(), k: (mx / mn).max(1.0) }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsoResult {
    pub value: f64,
    pub witness: Vec<usize>,
    /// False when every admissible set was enumerated.
    pub heuristic: bool,
    /// Best ratio per admissible set size.
    pub frontier: Vec<(usize, f64)>,
}

impl IsoResult {
    pub fn frontier_csv(&self) -> String {
        let mut s = String::from("size,ratio\n");
        for &(k, r) in &self.frontier {
            s.push_str(&format!("{k},{r}\n"));
        }
        s
    }
}

/// Largest interior size handled by exhaustive enumeration.
pub const EXACT_ISO_LIMIT: usize = 22;

fn boundary_ratio(g: &CoveringGraph, adj: &[Vec<(usize, f64)>], omega: &[usize]) -> f64 {
    let mut inside = vec![false; g.n()];
    for &v in omega {
        inside[v] = true;
    }
    let mut b = 0.0;
    let mut vol = 0.0;
    for &v in omega {
        vol += g.vmass[v];
        for &(u, w) in &adj[v] {
            if !inside[u] {
                b += w;
            }
        }
    }
    b / vol
}

/// `min μ(∂Ω)/μ(Ω)` over nonempty `Ω` avoiding the boundary.
pub fn isoperimetric_constant(g: &CoveringGraph) -> Result<IsoResult> {
    isoperimetric_constant_seeded(g, 0)
}

pub fn isoperimetric_constant_seeded(g: &CoveringGraph, seed: u64) -> Result<IsoResult> {
    if !g.boundary.iter().any(|&b| b) {
        return Err(Error::NoBoundary);
    }
    let interior = g.interior();
    let adj = g.adjacency();
    if interior.is_empty() {
        return Ok(IsoResult { value: f64::INFINITY, witness: vec![], heuristic: false, frontier: vec![] });
    }
    if interior.len() <= EXACT_ISO_LIMIT {
        Ok(iso_exact(g, &adj, &interior))
    } else {
        Ok(iso_heuristic(g, &adj, &interior, seed))
    }
}

fn iso_exact(g: &CoveringGraph, adj: &[Vec<(usize, f64)>], interior: &[usize]) -> IsoResult {
    let m = interior.len();
    let mut inside = vec![false; g.n()];
    let mut b = 0.0f64;
    let mut vol = 0.0f64;
    let mut size = 0usize;
    let mut mask: u64 = 0;
    let mut best = (f64::INFINITY, 0u64);
    let mut frontier = vec![f64::INFINITY; m + 1];
    for k in 1u64..(1u64 << m) {
        let bit = k.trailing_zeros() as usize;
        let v = interior[bit];
        if inside[v] {
            inside[v] = false;
            vol -= g.vmass[v];
            size -= 1;
            for &(u, w) in &adj[v] {
                if inside[u] {
                    b += w;
                } else {
                    b -= w;
                }
            }
        } else {
            inside[v] = true;
            vol += g.vmass[v];
            size += 1;
            for &(u, w) in &adj[v] {
                if inside[u] {
                    b -= w;
                } else {
                    b += w;
                }
            }
        }
        mask ^= 1 << bit;
        let r = b.max(0.0) / vol;
        if r < best.0 {
            best = (r, mask);
        }
        if r < frontier[size] {
            frontier[size] = r;
        }
    }
    let witness: Vec<usize> = (0..m).filter(|&j| best.1 >> j & 1 == 1).map(|j| interior[j]).collect();
    let value = boundary_ratio(g, adj, &witness);
    let frontier = (1..=m).map(|k| (k, frontier[k])).collect();
    IsoResult { value, witness, heuristic: false, frontier }
}

fn iso_heuristic(g: &CoveringGraph, adj: &[Vec<(usize, f64)>], interior: &[usize], seed: u64) -> IsoResult {
    let n = g.n();
    let mut best: (f64, Vec<usize>) = (f64::INFINITY, vec![]);
    let mut frontier = vec![f64::INFINITY; interior.len() + 1];
    // hop-distance balls around every interior vertex
    for &c in interior {
        let mut hop = vec![usize::MAX; n];
        hop[c] = 0;
        let mut order = vec![c];
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            i += 1;
            for &(v, _) in &adj[u] {
                if hop[v] == usize::MAX && !g.boundary[v] {
                    hop[v] = hop[u] + 1;
                    order.push(v);
                }
            }
        }
        for k in 1..=order.len() {
            let set = &order[..k];
            let r = boundary_ratio(g, adj, set);
            frontier[k] = frontier[k].min(r);
            if r < best.0 {
                best = (r, set.to_vec());
            }
        }
    }
    // annealing from the best ball
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur: Vec<bool> = vec![false; n];
    for &v in &best.1 {
        cur[v] = true;
    }
    let mut cur_r = best.0;
    let steps = 20_000;
    for step in 0..steps {
        let temp = 0.1 * cur_r.max(1e-12) * (1.0 - step as f64 / steps as f64);
        let v = interior[rng.gen_range(0..interior.len())];
        cur[v] = !cur[v];
        let set: Vec<usize> = interior.iter().cloned().filter(|&u| cur[u]).collect();
        if set.is_empty() {
            cur[v] = !cur[v];
            continue;
        }
        let r = boundary_ratio(g, adj, &set);
        let accept = r <= cur_r || (temp > 0.0 && rng.gen::<f64>() < ((cur_r - r) / temp).exp());
        if accept {
            cur_r = r;
            frontier[set.len()] = frontier[set.len()].min(r);
            if r < best.0 {
                best = (r, set);
            }
        } else {
            cur[v] = !cur[v];
        }
    }
    let frontier = (1..frontier.len()).filter(|&k| frontier[k].is_finite()).map(|k| (k, frontier[k])).collect();
    IsoResult { value: best.0, witness: best.1, heuristic: true, frontier }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoincareResult {
    pub t: f64,
    pub value: f64,
    /// True for `t ∈ {1, 2}` with exact enumeration or eigen solve.
    pub exact: bool,
    /// Maximizing function (vanishing on the boundary).
    pub witness: Vec<f64>,
}

/// `Σ |f|^t μ / Σ_edges |f_i - f_j|^t μ_e`.
pub fn dirichlet_ratio(g: &CoveringGraph, f: &[f64], t: f64) -> f64 {
    let num: f64 = (0..g.n()).map(|i| f[i].abs().powf(t) * g.vmass[i]).sum();
    let den: f64 =
        g.edges.iter().zip(&g.emass).map(|(&(a, b), &w)| (f[a] - f[b]).abs().powf(t) * w).sum();
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Best constant of `(Σ|f|^t μ)^(1/t) <= C (Σ_edges |df|^t μ_e)^(1/t)` over `f` vanishing on the boundary.
pub fn poincare_constant(g: &CoveringGraph, t: f64, seed: u64) -> Result<PoincareResult> {
    if t < 1.0 {
        return Err(Error::ExponentOutOfRange(format!("t must be >= 1, got {t}")));
    }
    if !g.boundary.iter().any(|&b| b) {
        return Err(Error::NoBoundary);
    }
    let interior = g.interior();
    if interior.is_empty() {
        return Ok(PoincareResult { t, value: 0.0, exact: true, witness: vec![0.0; g.n()] });
    }
    if t == 1.0 {
        let iso = isoperimetric_constant_seeded(g, seed)?;
        let mut w = vec![0.0; g.n()];
        for &v in &iso.witness {
            w[v] = 1.0;
        }
        return Ok(PoincareResult { t, value: 1.0 / iso.value, exact: !iso.heuristic, witness: w });
    }
    if t == 2.0 {
        let (value, witness) = dirichlet_eigen(g, &interior);
        return Ok(PoincareResult { t, value, exact: true, witness });
    }
    let (ratio, witness) = poincare_ascent(g, &interior, t, seed);
    Ok(PoincareResult { t, value: ratio.powf(1.0 / t), exact: false, witness })
}

fn dirichlet_eigen(g: &CoveringGraph, interior: &[usize]) -> (f64, Vec<f64>) {
    let m = interior.len();
    let mut pos = vec![usize::MAX; g.n()];
    for (k, &v) in interior.iter().enumerate() {
        pos[v] = k;
    }
    let mut l = DMatrix::<f64>::zeros(m, m);
    for (&(a, b), &w) in g.edges.iter().zip(&g.emass) {
        let (pa, pb) = (pos[a], pos[b]);
        if pa != usize::MAX {
            l[(pa, pa)] += w;
        }
        if pb != usize::MAX {
            l[(pb, pb)] += w;
        }
        if pa != usize::MAX && pb != usize::MAX {
            l[(pa, pb)] -= w;
            l[(pb, pa)] -= w;
        }
    }
    let s: Vec<f64> = interior.iter().map(|&v| 1.0 / g.vmass[v].sqrt()).collect();
    for i in 0..m {
        for j in 0..m {
            l[(i, j)] *= s[i] * s[j];
        }
    }
    let eig = SymmetricEigen::new(l);
    let mut k = 0;
    for i in 1..m {
        if eig.eigenvalues[i] < eig.eigenvalues[k] {
            k = i;
        }
    }
    let lam = eig.eigenvalues[k];
    let mut witness = vec![0.0; g.n()];
    for (i, &v) in interior.iter().enumerate() {
        witness[v] = (eig.eigenvectors[(i, k)] * s[i]).abs();
    }
    let value = if lam > 0.0 { 1.0 / lam.sqrt() } else { f64::INFINITY };
    (value, witness)
}

fn poincare_ascent(g: &CoveringGraph, interior: &[usize], t: f64, seed: u64) -> (f64, Vec<f64>) {
    let n = g.n();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..32 {
        let mut f = vec![0.0; n];
        for &v in interior {
            f[v] = rng.gen::<f64>();
        }
        starts.push(f);
    }
    let mut ones = vec![0.0; n];
    for &v in interior {
        ones[v] = 1.0;
    }
    starts.push(ones);
    if let Ok(iso) = isoperimetric_constant_seeded(g, seed) {
        let mut f = vec![0.0; n];
        for &v in &iso.witness {
            f[v] = 1.0;
        }
        starts.push(f);
    }
    starts.push(dirichlet_eigen(g, interior).1);
    let results: Vec<(f64, Vec<f64>)> = starts.into_par_iter().map(|f| ascend(g, interior, t, f)).collect();
    let mut best = (0.0, vec![0.0; n]);
    for r in results {
        if r.0 > best.0 {
            best = r;
        }
    }
    best
}

fn ascend(g: &CoveringGraph, interior: &[usize], t: f64, mut f: Vec<f64>) -> (f64, Vec<f64>) {
    let n = g.n();
    let mut r = dirichlet_ratio(g, &f, t);
    let mut step = 0.1;
    for _ in 0..400 {
        let num: f64 = interior.iter().map(|&i| f[i].powf(t) * g.vmass[i]).sum();
        let den: f64 =
            g.edges.iter().zip(&g.emass).map(|(&(a, b), &w)| (f[a] - f[b]).abs().powf(t) * w).sum();
        if num == 0.0 || den == 0.0 {
            break;
        }
        let mut grad = vec![0.0; n];
        for &i in interior {
            grad[i] += t * f[i].powf(t - 1.0) * g.vmass[i] / num;
        }
        for (&(a, b), &w) in g.edges.iter().zip(&g.emass) {
            let d = f[a] - f[b];
            let gd = t * d.abs().powf(t - 1.0) * d.signum() * w / den;
            grad[a] -= gd;
            grad[b] += gd;
        }
        let gnorm = interior.iter().map(|&i| grad[i] * grad[i]).sum::<f64>().sqrt();
        if gnorm < 1e-14 {
            break;
        }
        let fmax = interior.iter().map(|&i| f[i]).fold(0.0, f64::max);
        let mut improved = false;
        while step > 1e-12 {
            let mut h = f.clone();
            for &i in interior {
                h[i] = (f[i] + step * fmax * grad[i] / gnorm).max(0.0);
            }
            let hr = dirichlet_ratio(g, &h, t);
            if hr > r {
                let hmax = interior.iter().map(|&i| h[i]).fold(0.0, f64::max);
                if hmax > 0.0 {
                    h.iter_mut().for_each(|x| *x /= hmax);
                }
                f = h;
                r = hr;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (r, f)
}

/// Best discrete `t`-constant to feed the patching formula: exact for
/// `t ∈ {1, 2}`, otherwise the upgrade of the 1-constant.
pub fn discrete_constant_for(g: &CoveringGraph, t: f64, seed: u64) -> Result<f64> {
    if t == 1.0 || t == 2.0 {
        return Ok(poincare_constant(g, t, seed)?.value);
    }
    let c1 = poincare_constant(g, 1.0, seed)?.value;
    let p = graph_profile(g);
    Ok(crate::constants::upgrade_constant(c1, p.a, p.b, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeumannMeasure {
    /// Unit masses on vertices and edges, constant `N(N-1)^(s-1)`.
    Counting,
    /// The graph's masses, constant `2^s N(N-1)^(s-1) K^2`.
    Comparable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// Weighted sum divided by the mass of the support of `f`.
    SupportMean,
    /// Ordinary weighted mean over all vertices.
    FullMean,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NeumannCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub center: f64,
    pub pass: bool,
}

pub fn graph_mean(g: &CoveringGraph, f: &[f64], measure: NeumannMeasure, centering: Centering) -> f64 {
    let mass = |i: usize| match measure {
        NeumannMeasure::Counting => 1.0,
        NeumannMeasure::Comparable => g.vmass[i],
    };
    let total: f64 = (0..g.n()).map(|i| f[i] * mass(i)).sum();
    let denom: f64 = match centering {
        Centering::SupportMean => (0..g.n()).filter(|&i| f[i] != 0.0).map(mass).sum(),
        Centering::FullMean => (0..g.n()).map(mass).sum(),
    };
    if denom == 0.0 {
        0.0
    } else {
        total / denom
    }
}

pub fn neumann_check(
    g: &CoveringGraph,
    f: &[f64],
    s: f64,
    measure: NeumannMeasure,
    centering: Centering,
) -> Result<NeumannCheck> {
    if !g.is_connected() {
        return Err(Error::DisconnectedGraph { components: 2 });
    }
    let n = g.n();
    let c = graph_mean(g, f, measure, centering);
    let (vm, em): (Vec<f64>, Vec<f64>) = match measure {
        NeumannMeasure::Counting => (vec![1.0; n], vec![1.0; g.edges.len()]),
        NeumannMeasure::Comparable => (g.vmass.clone(), g.emass.clone()),
    };
    let lhs: f64 = (0..n).map(|i| (f[i] - c).abs().powf(s) * vm[i]).sum();
    let energy: f64 = g.edges.iter().zip(&em).map(|(&(a, b), &w)| (f[a] - f[b]).abs().powf(s) * w).sum();
    let constant = match measure {
        NeumannMeasure::Counting => neumann_counting(n, s),
        NeumannMeasure::Comparable => neumann_comparable(n, s, graph_profile(g).k),
    };
    let rhs = constant * energy;
    Ok(NeumannCheck { lhs, rhs, constant, center: c, pass: lhs <= rhs * (1.0 + FORMULA_REL) })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LayerBounds {
    pub lower: f64,
    pub upper: f64,
    pub value: f64,
    pub pass: bool,
}

/// Checks `C_e^-1 m(B_{κ^(i-1)})^(t/s) / κ^((i+1)t) <= μ(i,a) <= m(B_{κ^(i+1)})^(t/s) / κ^((i-1)t)`.
#[allow(clippy::too_many_arguments)]
pub fn layer_weight_bounds(
    space: &Space,
    o: usize,
    level: i32,
    mu: f64,
    s: f64,
    t: f64,
    kappa: f64,
    q: f64,
) -> LayerBounds {
    let prof = space.radial_profile(o);
    let ts = t / s;
    let i = level as f64;
    let lower = prof.mass_below(kappa.powi(level - 1)).powf(ts) / kappa.powf((i + 1.0) * t) / c_e(q, kappa);
    let upper = prof.mass_below(kappa.powi(level + 1)).powf(ts) / kappa.powf((i - 1.0) * t);
    let pass = lower <= mu * (1.0 + FORMULA_REL) && mu <= upper * (1.0 + FORMULA_REL);
    LayerBounds { lower, upper, value: mu, pass }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RcaReport {
    pub kappa: f64,
    pub radii: Vec<f64>,
    /// `(R, u, v)`: shell vertices not joined inside `A(o, R/κ, κR)`.
    pub failures: Vec<(f64, usize, usize)>,
    pub pass: bool,
}

/// Radii `κ^(j/2)` from `κ²` up to the eccentricity of `o`.
pub fn default_rca_radii(space: &Space, o: usize, kappa: f64) -> Vec<f64> {
    let ecc = space.eccentricity(o);
    let mut out = Vec::new();
    let mut j = 4;
    loop {
        let r = kappa.powf(j as f64 / 2.0);
        if r > ecc {
            break;
        }
        out.push(r);
        j += 1;
    }
    out
}

pub fn rca_check(space: &Space, o: usize, kappa: f64, radii: &[f64]) -> Result<RcaReport> {
    if o >= space.n() {
        return Err(Error::NoBasePoint(o));
    }
    if kappa.is_nan() || kappa <= 1.0 {
        return Err(Error::KappaOutOfRange(kappa));
    }
    let row = space.row(o);
    let half = space.resolution() / 2.0;
    let mut failures = Vec::new();
    let mut checked = Vec::new();
    for &r in radii {
        if r < kappa * kappa {
            continue;
        }
        checked.push(r);
        let shell: Vec<usize> = (0..space.n()).filter(|&v| (row[v] - r).abs() <= half + 1e-9).collect();
        if shell.len() < 2 {
            continue;
        }
        let (lo, hi) = (r / kappa, kappa * r);
        let ann: Vec<usize> = (0..space.n()).filter(|&v| below(lo, row[v]) && below(row[v], hi)).collect();
        let comps = space.components(&ann);
        let mut comp_of = vec![usize::MAX; space.n()];
        for (k, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = k;
            }
        }
        let first = shell[0];
        if let Some(&other) = shell.iter().find(|&&v| comp_of[v] != comp_of[first]) {
            failures.push((r, first, other));
        }
    }
    let pass = failures.is_empty();
    Ok(RcaReport { kappa, radii: checked, failures, pass })
}

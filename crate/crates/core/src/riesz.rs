//! Chains of balls, the Riesz-type potential and the maximal function.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{c_lambda, omega_lambda};
use crate::error::{Error, Result};
use crate::space::Space;
use crate::tolerances::{below, EMPIRICAL_REL};
use crate::verify::lip;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainCase {
    /// `R/2 <= d(a, x) < R`.
    A,
    /// `0 < d(a, x) < R/2`.
    B,
}

/// Balls `B_i = B(x_i, r_i)` for `i = i_o, i_o + 1, ...`; the last one is `B(x, resolution)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallChain {
    pub a: usize,
    pub big_r: f64,
    pub x: usize,
    pub lambda: f64,
    pub case: ChainCase,
    pub i_o: i64,
    pub centers: Vec<usize>,
    pub radii: Vec<f64>,
    pub d_ax: f64,
}

impl BallChain {
    /// `(i, x_i, r_i)` in increasing `i`.
    pub fn balls(&self) -> impl Iterator<Item = (i64, usize, f64)> + '_ {
        self.centers.iter().zip(&self.radii).enumerate().map(|(k, (&c, &r))| (self.i_o + k as i64, c, r))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("chain serializes")
    }
}

fn fuzzy_sphere(space: &Space, center: usize, r: f64) -> Vec<usize> {
    let row = space.row(center);
    let h = space.resolution();
    (0..space.n()).filter(|&y| (row[y] - r).abs() <= h + 1e-12).collect()
}

/// Vertices with `r - h < d(center, y) <= r`; backward steps stay inside the nominal
/// radius so `d(a, x_i) <= Σ r_j` holds exactly.
fn inner_sphere(space: &Space, center: usize, r: f64) -> Vec<usize> {
    let row = space.row(center);
    let h = space.resolution();
    (0..space.n()).filter(|&y| row[y] <= r + 1e-12 && row[y] > r - h - 1e-12).collect()
}

/// `λ B(c, r) ⊆ B(a, R)` tested as `d(a, c) + λ r <= R`.
fn dilate_inside(space: &Space, a: usize, big_r: f64, c: usize, r: f64, lambda: f64) -> bool {
    space.dist(a, c) + lambda * r <= big_r * (1.0 + 1e-12)
}

pub fn ball_chain(space: &Space, a: usize, big_r: f64, x: usize, lambda: f64) -> Result<BallChain> {
    if x == a {
        return Err(Error::XEqualsCenter);
    }
    let d_ax = space.dist(a, x);
    if !below(d_ax, big_r) {
        return Err(Error::XOutsideBall);
    }
    if lambda < 1.0 {
        return Err(Error::InvalidArgument(format!("lambda must be >= 1, got {lambda}")));
    }
    let h = space.resolution();
    let c = c_lambda(lambda);
    let case = if below(d_ax, big_r / 2.0) { ChainCase::B } else { ChainCase::A };

    let mut backward: Vec<(usize, f64)> = Vec::new();
    if case == ChainCase::B {
        let (mut xi, mut ri) = (a, d_ax / (2.0 * lambda));
        loop {
            let sphere = inner_sphere(space, xi, ri);
            if sphere.is_empty() {
                return Err(Error::SphereEmpty { center: xi, radius: ri });
            }
            let row_x = space.row(x);
            let mut best = sphere[0];
            for &y in &sphere {
                if row_x[y] > row_x[best] {
                    best = y;
                }
            }
            let r_prev = ri / c;
            if !dilate_inside(space, a, big_r, best, r_prev, lambda) {
                break;
            }
            backward.push((best, r_prev));
            xi = best;
            ri = r_prev;
        }
    }
    let i_o = -(backward.len() as i64);
    let mut centers: Vec<usize> = backward.iter().rev().map(|p| p.0).collect();
    let mut radii: Vec<f64> = backward.iter().rev().map(|p| p.1).collect();

    let (mut xi, mut ri) = (a, d_ax / (2.0 * lambda));
    while ri >= h {
        centers.push(xi);
        radii.push(ri);
        let sphere = fuzzy_sphere(space, xi, ri);
        if sphere.is_empty() {
            return Err(Error::SphereEmpty { center: xi, radius: ri });
        }
        let row_x = space.row(x);
        let mut best = sphere[0];
        for &y in &sphere {
            if row_x[y] < row_x[best] {
                best = y;
            }
        }
        xi = best;
        ri = row_x[best] / (2.0 * lambda);
    }
    centers.push(x);
    radii.push(h);
    Ok(BallChain { a, big_r, x, lambda, case, i_o, centers, radii, d_ax })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChainInvariants {
    /// `max |r_i - c^i d(a,x)/(2λ)|`.
    pub decay_error: f64,
    /// `c^(i_o) > ω R / d(a, x)`; `None` in case A.
    pub pratique: Option<bool>,
    pub radius_sum: f64,
    pub contained: bool,
}

pub fn chain_invariants(space: &Space, chain: &BallChain) -> ChainInvariants {
    let c = c_lambda(chain.lambda);
    let base = chain.d_ax / (2.0 * chain.lambda);
    let mut decay_error = 0.0f64;
    let mut contained = true;
    for (i, xi, ri) in chain.balls() {
        decay_error = decay_error.max((ri - c.powi(i as i32) * base).abs());
        contained &= dilate_inside(space, chain.a, chain.big_r, xi, ri, chain.lambda)
            || ri <= space.resolution();
    }
    let pratique = match chain.case {
        ChainCase::A => None,
        ChainCase::B => Some(c.powi(chain.i_o as i32) > omega_lambda(chain.lambda) * chain.big_r / chain.d_ax),
    };
    ChainInvariants { decay_error, pratique, radius_sum: chain.radii.iter().sum(), contained }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WBallCheck {
    pub i: i64,
    pub center: usize,
    pub radius: f64,
    pub inside_both: bool,
    pub dilate_covers: bool,
}

/// For consecutive balls, a ball `W` of radius `max(r_i, r_{i+1})/(2λ)²` centered on a
/// geodesic between the centers, with `W ⊆ B_i ∩ B_{i+1}` and `B_i ∪ B_{i+1} ⊆ (2λ)³ W`.
/// Inclusions are tested on vertex sets with two resolutions of slack: the fuzzy
/// sphere moves the next center by up to one, rounding the midpoint to a vertex
/// by up to one more.
pub fn w_ball_checks(space: &Space, chain: &BallChain) -> Vec<WBallCheck> {
    let h = space.resolution();
    let balls: Vec<(i64, usize, f64)> = chain.balls().collect();
    let l2 = (2.0 * chain.lambda).powi(2);
    let l3 = (2.0 * chain.lambda).powi(3);
    let mut out = Vec::new();
    for w in balls.windows(2) {
        let (i, p, rp) = w[0];
        let (_, q, rq) = w[1];
        let rho = rp.max(rq) / l2;
        let row_p = space.row(p);
        let row_q = space.row(q);
        let dpq = row_p[q];
        let mut center = p;
        let mut best = f64::NEG_INFINITY;
        for v in 0..space.n() {
            if row_p[v] + row_q[v] > dpq + 1e-9 {
                continue;
            }
            let slack = (rp - row_p[v]).min(rq - row_q[v]);
            if slack > best {
                best = slack;
                center = v;
            }
        }
        let inner = space.ball(center, (rho - 2.0 * h).max(0.0));
        let bp = space.ball(p, rp);
        let bq = space.ball(q, rq);
        let inside_both = inner.iter().all(|v| bp.binary_search(v).is_ok() && bq.binary_search(v).is_ok());
        let big = space.ball(center, l3 * rho + 2.0 * h);
        let dilate_covers = bp.iter().chain(&bq).all(|v| big.binary_search(v).is_ok());
        out.push(WBallCheck { i, center, radius: rho, inside_both, dilate_covers });
    }
    out
}

fn ball_mean_pow(space: &Space, set: &[usize], h: &[f64], s: f64) -> f64 {
    let m = space.measure();
    let mut num = 0.0;
    let mut den = 0.0;
    for &v in set {
        num += h[v].abs().powf(s) * m[v];
        den += m[v];
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `Σ r_i (⨍_{B_i} |h|^s)^(1/s) + R (⨍_B |h|^s)^(1/s)` along a prebuilt chain.
pub fn riesz_potential_chain(space: &Space, chain: &BallChain, s: f64, h: &[f64]) -> f64 {
    let mut j = 0.0;
    for (_, c, r) in chain.balls() {
        let b = space.ball(c, r);
        j += r * ball_mean_pow(space, &b, h, s).powf(1.0 / s);
    }
    let big = space.ball(chain.a, chain.big_r);
    j + chain.big_r * ball_mean_pow(space, &big, h, s).powf(1.0 / s)
}

pub fn riesz_potential(
    space: &Space,
    a: usize,
    big_r: f64,
    lambda: f64,
    s: f64,
    h: &[f64],
    x: usize,
) -> Result<f64> {
    let chain = ball_chain(space, a, big_r, x, lambda)?;
    Ok(riesz_potential_chain(space, &chain, s, h))
}

/// `max_r ⨍_{B_r(x)} |h|^s` over radii `d(x, y) + resolution`.
pub fn maximal_function(space: &Space, h: &[f64], s: f64, x: usize) -> f64 {
    let row = space.row(x);
    let m = space.measure();
    let mut idx: Vec<usize> = (0..space.n()).collect();
    idx.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
    let dists: Vec<f64> = idx.iter().map(|&v| row[v]).collect();
    let mut cum_h = Vec::with_capacity(idx.len());
    let mut cum_m = Vec::with_capacity(idx.len());
    let (mut ah, mut am) = (0.0, 0.0);
    for &v in &idx {
        ah += h[v].abs().powf(s) * m[v];
        am += m[v];
        cum_h.push(ah);
        cum_m.push(am);
    }
    let res = space.resolution();
    let mut best = 0.0f64;
    let mut k = 0;
    while k < dists.len() {
        let r = dists[k] + res;
        let cnt = dists.partition_point(|&d| below(d, r));
        if cnt > 0 {
            best = best.max(cum_h[cnt - 1] / cum_m[cnt - 1]);
        }
        let here = dists[k];
        while k < dists.len() && dists[k] == here {
            k += 1;
        }
    }
    best
}

/// `max(2(2λ)^(3Q), (2/ω)^Q) C_P`.
pub fn representation_constant(q: f64, c_p: f64, lambda: f64) -> f64 {
    (2.0 * (2.0 * lambda).powf(3.0 * q)).max((2.0 / omega_lambda(lambda)).powf(q)) * c_p
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepresentationReport {
    /// `(x, |f(x) - f_B| / J g(x))` for each sampled `x`.
    pub ratios: Vec<(usize, f64)>,
    pub max_ratio: f64,
    pub witness: Option<usize>,
    pub c1: f64,
    pub pass: bool,
}

/// `max |f(x) - f_B| / J g(x)` over the sample, compared with `C₁`.
#[allow(clippy::too_many_arguments)]
pub fn representation_check(
    space: &Space,
    a: usize,
    big_r: f64,
    lambda: f64,
    s: f64,
    f: &[f64],
    g: &[f64],
    sample: &[usize],
    c1: f64,
) -> Result<RepresentationReport> {
    let ball = space.ball(a, big_r);
    let slopes = lip(space, f);
    for &v in &ball {
        if g[v] < slopes[v] * (1.0 - 1e-12) - 1e-300 {
            return Err(Error::GNotUpperGradient { vertex: v, g: g[v], lip: slopes[v] });
        }
    }
    let m = space.measure();
    let mass: f64 = ball.iter().map(|&v| m[v]).sum();
    // shifted by f(a) so constant functions give an exact zero
    let f_b = f[a] + ball.iter().map(|&v| (f[v] - f[a]) * m[v]).sum::<f64>() / mass;
    let ratios: Vec<Result<(usize, f64)>> = sample
        .par_iter()
        .filter(|&&x| x != a)
        .map(|&x| {
            let num = (f[x] - f_b).abs();
            if num == 0.0 {
                return Ok((x, 0.0));
            }
            let j = riesz_potential(space, a, big_r, lambda, s, g, x)?;
            Ok((x, if j == 0.0 { f64::INFINITY } else { num / j }))
        })
        .collect();
    let ratios: Vec<(usize, f64)> = ratios.into_iter().collect::<Result<_>>()?;
    let mut max_ratio = 0.0;
    let mut witness = None;
    for &(x, v) in &ratios {
        if v > max_ratio {
            max_ratio = v;
            witness = Some(x);
        }
    }
    let pass = max_ratio <= c1 * (1.0 + EMPIRICAL_REL);
    Ok(RepresentationReport { ratios, max_ratio, witness, c1, pass })
}

impl RepresentationReport {
    pub fn ratios_csv(&self) -> String {
        let mut s = String::from("x,ratio\n");
        for (x, r) in &self.ratios {
            s.push_str(&format!("{x},{r}\n"));
        }
        s
    }
}

/// Right side of the pointwise bound on `J h(x)` by averages and the maximal function.
#[allow(clippy::too_many_arguments)]
pub fn c6_bound(space: &Space, a: usize, big_r: f64, h: &[f64], s: f64, q: f64, c5: f64, x: usize) -> f64 {
    let ball = space.ball(a, big_r);
    let avg = ball_mean_pow(space, &ball, h, s);
    let mx = maximal_function(space, h, s, x);
    c5 * big_r * (avg.powf(1.0 / s) + avg.powf(1.0 / q) * mx.powf(1.0 / s - 1.0 / q))
}

/// Largest `⨍_B (M(|h|^s 1_B))^α / ⨍_B |h|^(sα)` on `B = B(a, R)` over the given functions.
///
/// Only radii up to `2R + 2h` matter: beyond them every ball already contains `B`.
pub fn local_maximal_constant(space: &Space, a: usize, big_r: f64, hs: &[Vec<f64>], s: f64, alpha: f64) -> f64 {
    if hs.is_empty() {
        return 1.0;
    }
    let m = space.measure();
    let ball = space.ball(a, big_r);
    let mut inside = vec![false; space.n()];
    for &v in &ball {
        inside[v] = true;
    }
    let res = space.resolution();
    let maxima: Vec<Vec<f64>> = ball
        .par_iter()
        .map(|&x| {
            let mut near = space.dist_within(&[x], 2.0 * big_r + 2.0 * res);
            near.sort_by(|p, q| p.1.total_cmp(&q.1).then(p.0.cmp(&q.0)));
            let dists: Vec<f64> = near.iter().map(|p| p.1).collect();
            let mut cum_m = Vec::with_capacity(near.len());
            let mut acc = 0.0;
            for &(v, _) in &near {
                acc += m[v];
                cum_m.push(acc);
            }
            let cuts: Vec<usize> = {
                let mut out = Vec::new();
                let mut k = 0;
                while k < dists.len() {
                    out.push(dists.partition_point(|&d| below(d, dists[k] + res)));
                    let here = dists[k];
                    while k < dists.len() && dists[k] == here {
                        k += 1;
                    }
                }
                out
            };
            hs.iter()
                .map(|h| {
                    let mut cum = Vec::with_capacity(near.len());
                    let mut acc = 0.0;
                    for &(v, _) in &near {
                        if inside[v] {
                            acc += h[v].abs().powf(s) * m[v];
                        }
                        cum.push(acc);
                    }
                    cuts.iter().filter(|&&c| c > 0).map(|&c| cum[c - 1] / cum_m[c - 1]).fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    let mut best = 1.0f64;
    for (k, h) in hs.iter().enumerate() {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &v) in ball.iter().enumerate() {
            num += maxima[i][k].powf(alpha) * m[v];
            den += h[v].abs().powf(s * alpha) * m[v];
        }
        if den > 0.0 {
            best = best.max(num / den);
        }
    }
    best
}

/// Balls `(center, radius)` used when measuring `C_P`: strided centers, radii from
/// `2h` to `diam/2` on a geometric grid.
pub fn poincare_sample_balls(space: &Space, max_centers: usize, max_radii: usize) -> Vec<(usize, f64)> {
    let n = space.n();
    let stride = n.div_ceil(max_centers.max(1)).max(1);
    let h = space.resolution();
    let top = space.diameter() / 2.0;
    let mut radii = Vec::new();
    let mut r = 2.0 * h;
    while r <= top && radii.len() < max_radii {
        radii.push(r);
        r *= 2.0;
    }
    if radii.is_empty() {
        radii.push(top.max(h));
    }
    let mut out = Vec::new();
    for c in (0..n).step_by(stride) {
        for &r in &radii {
            out.push((c, r));
        }
    }
    out
}

/// Largest `(⨍_B |f - f_B|^s)^(1/s) / (r (⨍_{λB} lip f^s)^(1/s))` over balls and functions.
pub fn measured_poincare_constant(
    space: &Space,
    s: f64,
    lambda: f64,
    balls: &[(usize, f64)],
    funcs: &[Vec<f64>],
) -> f64 {
    let slopes: Vec<Vec<f64>> = funcs.par_iter().map(|f| lip(space, f)).collect();
    let m = space.measure();
    balls
        .par_iter()
        .map(|&(c, r)| {
            let b = space.ball(c, r);
            let lb = if lambda == 1.0 { b.clone() } else { space.ball(c, lambda * r) };
            let mass: f64 = b.iter().map(|&v| m[v]).sum();
            let lmass: f64 = lb.iter().map(|&v| m[v]).sum();
            let mut best = 0.0f64;
            for (f, g) in funcs.iter().zip(&slopes) {
                let mean = b.iter().map(|&v| f[v] * m[v]).sum::<f64>() / mass;
                let lhs = b.iter().map(|&v| (f[v] - mean).abs().powf(s) * m[v]).sum::<f64>() / mass;
                let rhs = lb.iter().map(|&v| g[v].powf(s) * m[v]).sum::<f64>() / lmass;
                if lhs > 0.0 && rhs > 0.0 {
                    best = best.max(lhs.powf(1.0 / s) / (r * rhs.powf(1.0 / s)));
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Distance functions from strided points plus the stored coordinates.
pub fn poincare_candidates(space: &Space, count: usize) -> Vec<Vec<f64>> {
    let n = space.n();
    let stride = n.div_ceil(count.max(1)).max(1);
    let mut out: Vec<Vec<f64>> = (0..n).step_by(stride).map(|c| space.row(c).to_vec()).collect();
    if let Some(coords) = space.coords() {
        out.push(coords.iter().map(|p| p[0]).collect());
        out.push(coords.iter().map(|p| p[1]).collect());
    }
    out
}

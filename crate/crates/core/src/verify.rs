//! Discrete energies, weights, test families and the inequality checks.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::constants::p_star;
use crate::constants::{neumann_comparable, patching_constant, riesz_constants};
use crate::covering::{
    decomposition_bounds, expand_covering, kappa_decomposition, net_covering, neighborhood,
    validate_covering, GoodCovering, NetFlavor,
};
use crate::error::{Error, Result};
use crate::graph::{build_covering_graph, discrete_constant_for};
use crate::riesz::{local_maximal_constant, measured_poincare_constant, poincare_candidates, poincare_sample_balls};
use crate::space::{doubling_profile, growth_exponent, ahlfors_fit, SampleSpec, Space};
use crate::tolerances::{le_rel, EMPIRICAL_REL, FORMULA_REL};

/// `lip f(v) = max_{(v,u)} |f(v) - f(u)| / len(v, u)`.
pub fn lip(space: &Space, f: &[f64]) -> Vec<f64> {
    (0..space.n())
        .map(|v| space.neighbors(v).iter().map(|&(u, l)| (f[v] - f[u]).abs() / l).fold(0.0, f64::max))
        .collect()
}

/// `Σ lip f(v)^s m(v)`.
pub fn cheeger_energy(space: &Space, f: &[f64], s: f64) -> f64 {
    lip(space, f).iter().zip(space.measure()).map(|(g, m)| g.powf(s) * m).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `m(B_{d(o,x)}(o))^(t/s-1) d(o,x)^(-t)`.
    MuSt,
    /// `d(o,x)^(-s)`.
    MuS,
    /// `d(o,x)^(Q(t/s-1)-t)`.
    Ahlfors,
    /// `d(o,x)^(Q(t/s-1)-1)`, an alternative exponent kept for comparison.
    AhlforsPrinted,
    Uniform,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Weight {
    pub kind: WeightKind,
    pub o: usize,
    pub s: f64,
    pub t: f64,
    pub q: f64,
    /// Zero at `o`, positive elsewhere.
    pub density: Vec<f64>,
}

pub fn weight_density(space: &Space, o: usize, kind: WeightKind, s: f64, t: f64, q: f64) -> Weight {
    let row = space.row(o);
    let prof = space.radial_profile(o);
    let density = (0..space.n())
        .map(|x| {
            if x == o {
                return 0.0;
            }
            let d = row[x];
            match kind {
                WeightKind::MuSt => prof.mass_below(d).powf(t / s - 1.0) * d.powf(-t),
                WeightKind::MuS => d.powf(-s),
                WeightKind::Ahlfors => d.powf(q * (t / s - 1.0) - t),
                WeightKind::AhlforsPrinted => d.powf(q * (t / s - 1.0) - 1.0),
                WeightKind::Uniform => 1.0,
            }
        })
        .collect();
    Weight { kind, o, s, t, q, density }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MeanComparison {
    pub lhs: f64,
    /// `inf_c ∫_A |f - c|^p dμ`.
    pub inf: f64,
    pub rhs: f64,
    pub pass: bool,
}

fn weighted_median(vals: &mut [(f64, f64)]) -> f64 {
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = vals.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(v, w) in vals.iter() {
        acc += w;
        if acc >= total / 2.0 {
            return v;
        }
    }
    vals.last().map_or(0.0, |p| p.0)
}

/// `∫_A |f - f_{A,μ}|^p dμ <= 2^p inf_c ∫_A |f - c|^p dμ` with `μ = w m`.
pub fn mean_comparison_check(space: &Space, f: &[f64], a: &[usize], weight: &[f64], p: f64) -> Result<MeanComparison> {
    let m = space.measure();
    let mu: Vec<(f64, f64)> = a.iter().map(|&v| (f[v], weight[v] * m[v])).collect();
    let mass: f64 = mu.iter().map(|q| q.1).sum();
    if mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let cost = |c: f64| mu.iter().map(|&(x, w)| (x - c).abs().powf(p) * w).sum::<f64>();
    let mean = mu.iter().map(|&(x, w)| x * w).sum::<f64>() / mass;
    let lhs = cost(mean);
    let inf = if p == 2.0 {
        lhs
    } else if p == 1.0 {
        let mut v = mu.clone();
        cost(weighted_median(&mut v))
    } else {
        let (mut lo, mut hi) = mu.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, q| (acc.0.min(q.0), acc.1.max(q.0)));
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c1 = hi - g * (hi - lo);
            let c2 = lo + g * (hi - lo);
            if cost(c1) <= cost(c2) {
                hi = c2;
            } else {
                lo = c1;
            }
        }
        cost((lo + hi) / 2.0).min(lhs)
    };
    let rhs = 2f64.powf(p) * inf;
    Ok(MeanComparison { lhs, inf, rhs, pass: lhs <= rhs * (1.0 + FORMULA_REL) })
}

// ---------------------------------------------------------------- families

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilySpec {
    pub seed: u64,
    /// Target size of the sampled part; small spaces add exhaustive members on top.
    pub count: usize,
    /// Every member vanishes here.
    pub zero_set: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Member {
    pub id: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestFamily {
    pub seed: u64,
    pub zero_set: Vec<usize>,
    pub members: Vec<Member>,
}

impl TestFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members restricted to `set` (values outside set to zero).
    pub fn restricted(&self, set: &[usize]) -> TestFamily {
        let members = self
            .members
            .iter()
            .map(|mb| {
                let mut v = vec![0.0; mb.values.len()];
                for &x in set {
                    v[x] = mb.values[x];
                }
                Member { id: mb.id.clone(), values: v }
            })
            .collect();
        TestFamily { seed: self.seed, zero_set: self.zero_set.clone(), members }
    }
}

fn ramp(d: f64, inner: f64, outer: f64) -> f64 {
    if d <= inner {
        1.0
    } else if d >= outer {
        0.0
    } else {
        (outer - d) / (outer - inner)
    }
}

/// Radial powers, tents, annulus cutoffs, random Lipschitz functions and smoothed
/// indicators, all vanishing on `spec.zero_set`.
pub fn make_family(space: &Space, o: usize, spec: &FamilySpec) -> TestFamily {
    let n = space.n();
    let h = space.resolution();
    let row_o = space.row(o);
    let mut zero = vec![false; n];
    for &z in &spec.zero_set {
        zero[z] = true;
    }
    let r_b = spec.zero_set.iter().map(|&z| row_o[z]).fold(f64::INFINITY, f64::min);
    let r_b = if r_b.is_finite() { r_b } else { space.eccentricity(o) + h };
    let dist_zero = if spec.zero_set.is_empty() { vec![f64::INFINITY; n] } else { space.dist_from_set(&spec.zero_set) };
    let free: Vec<usize> = (0..n).filter(|&v| !zero[v]).collect();
    let count = spec.count.max(5);
    let share = |k: usize| count * k / 10;
    let mut members = Vec::new();
    let finish = |mut v: Vec<f64>| {
        for (x, z) in v.iter_mut().zip(&zero) {
            if *z {
                *x = 0.0;
            }
        }
        v
    };

    // radial powers with a cutoff at the boundary layer
    let betas = [-1.5, -1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0];
    let fracs = [0.5, 0.25, 0.75, 0.9];
    for k in 0..share(3).min(betas.len() * fracs.len()) {
        let beta = betas[k % betas.len()];
        let frac = fracs[(k / betas.len()) % fracs.len()];
        let v = (0..n).map(|x| row_o[x].max(h).powf(beta) * ramp(row_o[x], frac * r_b, r_b)).collect();
        members.push(Member { id: format!("radial_power(beta={beta},plateau={frac})"), values: finish(v) });
    }

    // tents centered on strided free vertices
    let n_tent = share(2);
    if !free.is_empty() && n_tent > 0 {
        let widths = [r_b / 8.0, r_b / 4.0, r_b / 2.0];
        let n_centers = n_tent.div_ceil(widths.len());
        let stride = free.len().div_ceil(n_centers).max(1);
        'outer: for &c in free.iter().step_by(stride) {
            let row_c = space.row(c);
            for &w0 in &widths {
                if members.len() >= share(3) + n_tent {
                    break 'outer;
                }
                let w = w0.min(dist_zero[c]).max(h);
                let v = (0..n).map(|x| (1.0 - row_c[x] / w).max(0.0)).collect();
                members.push(Member { id: format!("tent(center={c},width={w})"), values: finish(v) });
            }
        }
    }

    // annulus cutoffs
    let mut radii: Vec<f64> = Vec::new();
    if n <= 16 {
        radii = (0..n).map(|x| row_o[x]).filter(|&d| d <= r_b).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
    } else {
        let mut r = r_b;
        while r >= h {
            radii.push(r);
            r /= 2.0;
        }
        radii.push(0.0);
        radii.sort_by(f64::total_cmp);
    }
    let mut pairs = Vec::new();
    for (i, &a) in radii.iter().enumerate() {
        for &b in &radii[i + 1..] {
            pairs.push((a, b));
        }
    }
    let n_ann = if n <= 16 { pairs.len() } else { share(2).min(pairs.len()) };
    let step = (pairs.len() as f64 / n_ann.max(1) as f64).max(1.0);
    for k in 0..n_ann {
        let (a, b) = pairs[((k as f64 * step) as usize).min(pairs.len() - 1)];
        let v = (0..n).map(|x| ramp(row_o[x], a, b)).collect();
        members.push(Member { id: format!("annulus_cutoff(r={a},R={b})"), values: finish(v) });
    }

    // smoothed indicators
    if free.len() <= 10 && !free.is_empty() {
        let widths = [h, 2.0 * h];
        for mask in 1u32..(1 << free.len()) {
            let set: Vec<usize> = (0..free.len()).filter(|&i| mask >> i & 1 == 1).map(|i| free[i]).collect();
            let d_set = space.dist_from_set(&set);
            let gap = set.iter().map(|&x| dist_zero[x]).fold(f64::INFINITY, f64::min);
            for &w0 in &widths {
                let w = w0.min(gap);
                let v = (0..n).map(|x| (1.0 - d_set[x] / w).max(0.0)).collect();
                members.push(Member { id: format!("indicator_smooth(mask={mask},width={w})"), values: finish(v) });
            }
        }
    } else if !free.is_empty() {
        let n_ind = share(1);
        let stride = free.len().div_ceil(n_ind.max(1)).max(1);
        for (k, &c) in free.iter().step_by(stride).take(n_ind).enumerate() {
            let r = r_b * [0.125, 0.25, 0.05][k % 3];
            let set = space.ball(c, r.max(h));
            let d_set = space.dist_from_set(&set);
            let gap = set.iter().map(|&x| dist_zero[x]).fold(f64::INFINITY, f64::min);
            let w = (r / 2.0).max(h).min(gap);
            let v = (0..n).map(|x| (1.0 - d_set[x] / w).max(0.0)).collect();
            members.push(Member { id: format!("indicator_smooth(center={c},r={r},width={w})"), values: finish(v) });
        }
    }

    // random Lipschitz functions fill the remainder
    let sampled = members.len();
    let want = count.saturating_sub(sampled).max(share(1));
    let ls = [4.0, 8.0, 16.0, 32.0];
    for k in 0..want {
        let l = ls[k % ls.len()] / r_b;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64));
        let mut v: Vec<f64> = (0..n).map(|x| if zero[x] { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
        lipschitz_project(space, &mut v, l, &zero);
        members.push(Member { id: format!("random_lipschitz(L={l},k={k})"), values: v });
    }
    TestFamily { seed: spec.seed, zero_set: spec.zero_set.clone(), members }
}

/// Iterated edge projection onto `|f(u) - f(v)| <= L len(u, v)`, keeping `fixed` at zero.
fn lipschitz_project(space: &Space, f: &mut [f64], l: f64, fixed: &[bool]) {
    for _ in 0..500 {
        let mut moved = false;
        for &(u, v, len) in space.edges() {
            let cap = l * len;
            let diff = f[u] - f[v];
            if diff.abs() <= cap * (1.0 + 1e-12) {
                continue;
            }
            moved = true;
            let excess = diff.abs() - cap;
            let sign = diff.signum();
            match (fixed[u], fixed[v]) {
                (true, true) => {}
                (true, false) => f[v] += sign * excess,
                (false, true) => f[u] -= sign * excess,
                (false, false) => {
                    f[u] -= sign * excess / 2.0;
                    f[v] += sign * excess / 2.0;
                }
            }
        }
        if !moved {
            break;
        }
    }
}

/// Vertices of the outermost level of the κ-decomposition at `o`.
pub fn boundary_layer(space: &Space, o: usize, kappa: f64) -> Result<Vec<usize>> {
    let d = kappa_decomposition(space, o, kappa)?;
    let mut out: Vec<usize> =
        d.pieces.iter().filter(|p| p.level == d.boundary_level).flat_map(|p| p.members.iter().cloned()).collect();
    out.sort_unstable();
    Ok(out)
}

/// Family with the default size whose members vanish on the boundary layer.
pub fn default_family(space: &Space, o: usize, kappa: f64, seed: u64, count: usize) -> Result<TestFamily> {
    let zero_set = boundary_layer(space, o, kappa)?;
    Ok(make_family(space, o, &FamilySpec { seed, count, zero_set }))
}

// ---------------------------------------------------------------- reports

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InequalityReport {
    pub inequality: String,
    pub s: f64,
    pub t: f64,
    pub kappa: Option<f64>,
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub empirical_best: f64,
    pub theoretical: f64,
    pub witness: Option<String>,
    pub pass: bool,
    pub hypotheses_violated: bool,
    /// Filled only when timing is requested, so reports stay reproducible.
    pub seconds: Option<f64>,
    /// Fitted and measured inputs (`Q`, `eta`, `C_P`, `C_M`, ...).
    pub fitted: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl InequalityReport {
    fn new(inequality: &str, s: f64, t: f64) -> InequalityReport {
        InequalityReport {
            inequality: inequality.to_string(),
            s,
            t,
            kappa: None,
            q1: None,
            q2: None,
            c1: None,
            c2: None,
            empirical_best: 0.0,
            theoretical: f64::INFINITY,
            witness: None,
            pass: false,
            hypotheses_violated: false,
            seconds: None,
            fitted: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn conclude(&mut self) {
        self.pass = le_rel(self.empirical_best, self.theoretical, EMPIRICAL_REL);
    }

    pub fn fitted_value(&self, key: &str) -> Option<f64> {
        self.fitted.iter().find(|p| p.0 == key).map(|p| p.1)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckConfig {
    pub kappa: f64,
    pub seed: u64,
    /// Record wall-clock seconds in reports.
    pub timing: bool,
    /// Use the alternative Ahlfors exponent `Q(t/s-1)-1`.
    pub printed_ahlfors_exponent: bool,
    /// Centers used when measuring `C_P` and `C_M`.
    pub sample_centers: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { kappa: 2.0, seed: 0, timing: false, printed_ahlfors_exponent: false, sample_centers: 12 }
    }
}

/// Largest ratio over the family; ties keep the first member.
fn sweep<F>(family: &TestFamily, ratio: F) -> (f64, Option<String>)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let vals: Vec<f64> = family.members.par_iter().map(|mb| ratio(&mb.values)).collect();
    let mut best = 0.0;
    let mut witness = None;
    for (i, &v) in vals.iter().enumerate() {
        if v > best || (v.is_nan() && witness.is_none()) {
            best = v;
            witness = Some(family.members[i].id.clone());
        }
    }
    (best, witness)
}

fn check_vanishing(space: &Space, family: &TestFamily) -> Result<()> {
    for mb in &family.members {
        if mb.values.len() != space.n() {
            return Err(Error::InvalidArgument(format!("member {} has {} values", mb.id, mb.values.len())));
        }
        if family.zero_set.iter().any(|&z| mb.values[z] != 0.0) {
            return Err(Error::InvalidArgument(format!("member {} does not vanish on the boundary layer", mb.id)));
        }
    }
    Ok(())
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

// ---------------------------------------------------------------- local constants

/// Measured inputs for the local inequalities.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LocalInputs {
    pub q: f64,
    pub c_p: f64,
    pub c_m: f64,
    /// `C₁ C₅ (2^(t-1)(1+C_M))^(1/t)`, which is `C_s` when `C_M = 1`; infinite if `s >= Q`.
    pub c_s: f64,
}

/// Doubling fit, measured `C_P` (λ = 1) and measured `C_M` on sampled balls.
pub fn measure_local_inputs(space: &Space, s: f64, t: f64, family: &TestFamily, cfg: &CheckConfig) -> Result<LocalInputs> {
    let q = doubling_profile(space, &SampleSpec::interior(space, 64))?.q;
    let balls = poincare_sample_balls(space, cfg.sample_centers, 6);
    let mut funcs = poincare_candidates(space, 8);
    let stride = family.len().div_ceil(24).max(1);
    funcs.extend(family.members.iter().step_by(stride).map(|m| m.values.clone()));
    let c_p = measured_poincare_constant(space, s, 1.0, &balls, &funcs);
    let c_p = if c_p > 0.0 { c_p } else { 1.0 };
    let alpha = if q > s { t * (1.0 / s - 1.0 / q) } else { 1.0 };
    let slopes: Vec<Vec<f64>> = family.members.iter().step_by(stride.max(family.len() / 6).max(1)).map(|m| lip(space, &m.values)).collect();
    let mut c_m = 1.0f64;
    let r = (space.diameter() / 16.0).max(2.0 * space.resolution());
    let n = space.n();
    for c in (0..n).step_by(n.div_ceil(3).max(1)) {
        c_m = c_m.max(local_maximal_constant(space, c, r, &slopes, s, alpha));
    }
    let c_s = match riesz_constants(q, c_p, 1.0, s, q) {
        Ok(rc) => rc.c1 * rc.c5 * (2f64.powf(t - 1.0) * (1.0 + c_m)).powf(1.0 / t),
        Err(_) => f64::INFINITY,
    };
    Ok(LocalInputs { q, c_p, c_m, c_s })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LocalConstant {
    pub rho: f64,
    pub n: usize,
    pub q1: f64,
    pub q2: f64,
    pub c1: f64,
    pub c2: f64,
    /// `(∫_A |f - f_A|^t)^(1/t) <= k (∫_{A_ρ} g^s)^(1/s)`.
    pub k: f64,
}

/// Constant of `(∫_A |f - f_A|^t dm)^(1/t) <= K (∫_{A_ρ} g^s dm)^(1/s)` from a net covering.
/// With `t = s` the balls use the measured Poincaré constant, otherwise the local Sobolev one.
pub fn local_constant_rho(space: &Space, a: &[usize], rho: f64, s: f64, t: f64, inputs: &LocalInputs) -> LocalConstant {
    let poincare = t == s;
    let flavor = if poincare { NetFlavor::Poincare { lambda: 1.0 } } else { NetFlavor::Sobolev };
    let cov = net_covering(space, a, rho, flavor);
    let ones = vec![1.0; space.n()];
    let val = validate_covering(&cov, space, &ones, None);
    let m = space.measure();
    let mass = |set: &[usize]| set.iter().map(|&v| m[v]).sum::<f64>();
    let c1 = if poincare {
        inputs.c_p * rho
    } else {
        let e = 1.0 / t - 1.0 / s;
        let a1 = cov.u.iter().map(|u| inputs.c_s * (rho / 3.0) * mass(u).powf(e)).fold(0.0, f64::max);
        let a2 = cov.star.iter().map(|u| inputs.c_s * rho * mass(u).powf(e)).fold(0.0, f64::max);
        a1.max(a2)
    };
    let n = cov.len();
    let c2 = if n <= 1 {
        0.0
    } else {
        let vm: Vec<f64> = cov.u.iter().map(|u| mass(u)).collect();
        let k = vm.iter().cloned().fold(0.0, f64::max) / vm.iter().cloned().fold(f64::INFINITY, f64::min);
        neumann_comparable(n, t, k).powf(1.0 / t)
    };
    let p = patching_constant(c1, c2, val.q1_emp, val.q2_emp_m, s, t);
    LocalConstant { rho, n, q1: val.q1_emp, q2: val.q2_emp_m, c1, c2, k: 2.0 * p.powf(1.0 / t) }
}

/// `ρ = dist(A, V ∖ A')`, so that `A_ρ ⊆ A'`.
pub fn inner_gap(space: &Space, a: &[usize], a_prime: &[usize]) -> f64 {
    let d = space.dist_from_set(a);
    let mut inside = vec![false; space.n()];
    for &v in a_prime {
        inside[v] = true;
    }
    let gap = (0..space.n()).filter(|&v| !inside[v]).map(|v| d[v]).fold(f64::INFINITY, f64::min);
    if gap.is_finite() {
        gap
    } else {
        d.iter().cloned().fold(0.0, f64::max) + space.resolution()
    }
}

pub fn local_constant(space: &Space, a: &[usize], a_prime: &[usize], s: f64, t: f64, inputs: &LocalInputs) -> LocalConstant {
    local_constant_rho(space, a, inner_gap(space, a, a_prime), s, t, inputs)
}

// ---------------------------------------------------------------- assembly

/// Theoretical constant of `(∫|f|^t w dm)^(1/t) <= C Ch_s(f)^(1/s)` for `f` vanishing on the boundary layer.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Assembly {
    pub q1: f64,
    pub q2: f64,
    pub c1: f64,
    pub c2: f64,
    /// `patching_constant(c1, c2, q1, q2, s, t)`.
    pub patching: f64,
    pub covering_pass: bool,
    pub pieces: usize,
}

fn assemble(
    space: &Space,
    o: usize,
    s: f64,
    t: f64,
    weight: &Weight,
    inputs: &LocalInputs,
    cfg: &CheckConfig,
) -> Result<(Assembly, GoodCovering)> {
    let decomp = kappa_decomposition(space, o, cfg.kappa)?;
    let cov = expand_covering(space, &decomp);
    let bounds = decomposition_bounds(inputs.q, cfg.kappa, t / s - 1.0, t).ok();
    let val = validate_covering(&cov, space, &weight.density, bounds);
    let g = build_covering_graph(&cov, space, &weight.density, 1)?;
    let c2 = discrete_constant_for(&g, t, cfg.seed)?;
    let w = &weight.density;
    let wmax = |set: &[usize]| set.iter().map(|&v| w[v]).fold(0.0, f64::max);
    let per_piece: Vec<f64> = (0..cov.len())
        .into_par_iter()
        .map(|i| {
            let k1 = local_constant(space, &cov.u[i], &cov.star[i], s, t, inputs).k;
            let k2 = local_constant(space, &cov.star[i], &cov.sharp[i], s, t, inputs).k;
            (2.0 * wmax(&cov.u[i]).powf(1.0 / t) * k1).max(2.0 * wmax(&cov.star[i]).powf(1.0 / t) * k2)
        })
        .collect();
    let c1 = per_piece.iter().cloned().fold(0.0, f64::max);
    let q1 = val.q1_emp;
    let q2 = val.q2_emp_m.max(val.q2_emp_mu);
    let patching = patching_constant(c1, c2, q1, q2, s, t);
    let covering_pass = val.axioms_pass.iter().all(|&b| b);
    Ok((Assembly { q1, q2, c1, c2, patching, covering_pass, pieces: cov.len() }, cov))
}

fn fill_assembly(rep: &mut InequalityReport, a: &Assembly, cfg: &CheckConfig, inputs: &LocalInputs, eta: f64) {
    rep.kappa = Some(cfg.kappa);
    rep.q1 = Some(a.q1);
    rep.q2 = Some(a.q2);
    rep.c1 = Some(a.c1);
    rep.c2 = Some(a.c2);
    rep.fitted = vec![
        ("Q".into(), inputs.q),
        ("eta".into(), eta),
        ("C_P".into(), inputs.c_p),
        ("C_M".into(), inputs.c_m),
        ("pieces".into(), a.pieces as f64),
    ];
    if !a.covering_pass {
        rep.notes.push("covering axioms failed against their bounds".into());
    }
}

fn weighted_integral(space: &Space, f: &[f64], w: &[f64], t: f64) -> f64 {
    f.iter().zip(w).zip(space.measure()).map(|((x, w), m)| x.abs().powf(t) * w * m).sum()
}

/// `(∫|f|^t dμ_{s,t})^(1/t) <= C Ch_s(f)^(1/s)`.
pub fn weighted_sobolev_check(
    space: &Space,
    o: usize,
    s: f64,
    t: f64,
    family: &TestFamily,
    cfg: &CheckConfig,
) -> Result<InequalityReport> {
    let weight_kind = WeightKind::MuSt;
    weighted_pipeline("weighted-sobolev", space, o, s, t, weight_kind, family, cfg)
}

#[allow(clippy::too_many_arguments)]
fn weighted_pipeline(
    name: &str,
    space: &Space,
    o: usize,
    s: f64,
    t: f64,
    empirical_weight: WeightKind,
    family: &TestFamily,
    cfg: &CheckConfig,
) -> Result<InequalityReport> {
    if s < 1.0 || t < s {
        return Err(Error::ExponentOutOfRange(format!("need 1 <= s <= t, got s = {s}, t = {t}")));
    }
    if o >= space.n() {
        return Err(Error::NoBasePoint(o));
    }
    check_vanishing(space, family)?;
    let start = Instant::now();
    let mut rep = InequalityReport::new(name, s, t);
    let eta = growth_exponent(space, o);
    let inputs = measure_local_inputs(space, s, t, family, cfg)?;
    if eta <= s {
        rep.hypotheses_violated = true;
        rep.notes.push(format!("fitted eta = {eta} <= s"));
    }
    if inputs.q > s && t > p_star(s, inputs.q)? * (1.0 + FORMULA_REL) {
        rep.hypotheses_violated = true;
        rep.notes.push("t exceeds p*".into());
    }
    if t > s && inputs.q <= s {
        rep.hypotheses_violated = true;
        rep.notes.push("local Sobolev constant needs s < Q".into());
    }
    let w_st = weight_density(space, o, WeightKind::MuSt, s, t, inputs.q);
    let (asm, _) = assemble(space, o, s, t, &w_st, &inputs, cfg)?;
    fill_assembly(&mut rep, &asm, cfg, &inputs, eta);
    let w_emp = if empirical_weight == WeightKind::MuSt {
        w_st
    } else {
        weight_density(space, o, empirical_weight, s, t, inputs.q)
    };
    let (best, witness) = sweep(family, |f| {
        safe_ratio(weighted_integral(space, f, &w_emp.density, t).powf(1.0 / t), cheeger_energy(space, f, s).powf(1.0 / s))
    });
    rep.empirical_best = best;
    rep.witness = witness;
    rep.theoretical = asm.patching.powf(1.0 / t);
    if cfg.timing {
        rep.seconds = Some(start.elapsed().as_secs_f64());
    }
    rep.conclude();
    Ok(rep)
}

/// `∫|f|^s d(o,·)^(-s) dm <= C Ch_s(f)`.
pub fn hardy_check(space: &Space, o: usize, s: f64, family: &TestFamily, cfg: &CheckConfig) -> Result<InequalityReport> {
    if s < 1.0 {
        return Err(Error::ExponentOutOfRange(format!("need s >= 1, got {s}")));
    }
    if o >= space.n() {
        return Err(Error::NoBasePoint(o));
    }
    check_vanishing(space, family)?;
    let start = Instant::now();
    let mut rep = InequalityReport::new("hardy", s, s);
    let eta = growth_exponent(space, o);
    if eta <= s {
        rep.hypotheses_violated = true;
        rep.notes.push(format!("fitted eta = {eta} <= s"));
    }
    let inputs = measure_local_inputs(space, s, s, family, cfg)?;
    let w = weight_density(space, o, WeightKind::MuS, s, s, inputs.q);
    let (asm, _) = assemble(space, o, s, s, &w, &inputs, cfg)?;
    fill_assembly(&mut rep, &asm, cfg, &inputs, eta);
    let (best, witness) =
        sweep(family, |f| safe_ratio(weighted_integral(space, f, &w.density, s), cheeger_energy(space, f, s)));
    rep.empirical_best = best;
    rep.witness = witness;
    rep.theoretical = asm.patching;
    if cfg.timing {
        rep.seconds = Some(start.elapsed().as_secs_f64());
    }
    rep.conclude();
    Ok(rep)
}

/// Weighted Sobolev inequality with the power weight of an Ahlfors regular space.
pub fn ahlfors_sobolev_check(
    space: &Space,
    o: usize,
    s: f64,
    t: f64,
    family: &TestFamily,
    cfg: &CheckConfig,
) -> Result<InequalityReport> {
    let fit = ahlfors_fit(space)?;
    if t == s {
        let mut rep = hardy_check(space, o, s, family, cfg)?;
        rep.inequality = "ahlfors".into();
        rep.empirical_best = rep.empirical_best.powf(1.0 / s);
        rep.theoretical = rep.theoretical.powf(1.0 / s);
        rep.fitted.push(("C_A".into(), fit.c_a));
        rep.conclude();
        return Ok(rep);
    }
    let kind = if cfg.printed_ahlfors_exponent { WeightKind::AhlforsPrinted } else { WeightKind::Ahlfors };
    let mut rep = weighted_pipeline("ahlfors", space, o, s, t, kind, family, cfg)?;
    let q = rep.fitted_value("Q").unwrap_or(fit.q);
    let w_st = weight_density(space, o, WeightKind::MuSt, s, t, q);
    let w_a = weight_density(space, o, kind, s, t, fit.q);
    let ratio = w_a
        .density
        .iter()
        .zip(&w_st.density)
        .filter(|p| *p.1 > 0.0)
        .map(|(a, b)| a / b)
        .fold(0.0, f64::max);
    let factor = fit.c_a.powf(1.0 / s - 1.0 / t).max(ratio.powf(1.0 / t));
    rep.theoretical *= factor;
    rep.fitted.push(("C_A".into(), fit.c_a));
    rep.fitted.push(("Q_A".into(), fit.q));
    rep.fitted.push(("weight_factor".into(), factor));
    rep.conclude();
    Ok(rep)
}

/// `(∫_B |f - f_B|^t)^(1/t) <= C R m(B)^(1/t-1/s) (∫_B lip f^s)^(1/s)` on `B = B(a, R)`.
pub fn local_sobolev_check(
    space: &Space,
    a: usize,
    big_r: f64,
    s: f64,
    t: f64,
    family: &TestFamily,
    cfg: &CheckConfig,
) -> Result<InequalityReport> {
    if s < 1.0 || t < s {
        return Err(Error::ExponentOutOfRange(format!("need 1 <= s <= t, got s = {s}, t = {t}")));
    }
    let start = Instant::now();
    let ball = space.ball(a, big_r);
    let m = space.measure();
    let mass: f64 = ball.iter().map(|&v| m[v]).sum();
    if mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let mut rep = InequalityReport::new("local-sobolev", s, t);
    let inputs = measure_local_inputs(space, s, t, family, cfg)?;
    let funcs: Vec<Vec<f64>> = family.members.iter().map(|mb| mb.values.clone()).collect();
    let c_p_here = measured_poincare_constant(space, s, 1.0, &[(a, big_r)], &funcs);
    let c_p = inputs.c_p.max(c_p_here);
    let ratio = |f: &[f64]| {
        let g = lip(space, f);
        let mean = ball.iter().map(|&v| f[v] * m[v]).sum::<f64>() / mass;
        let lhs = ball.iter().map(|&v| (f[v] - mean).abs().powf(t) * m[v]).sum::<f64>().powf(1.0 / t);
        let energy = ball.iter().map(|&v| g[v].powf(s) * m[v]).sum::<f64>().powf(1.0 / s);
        safe_ratio(lhs, big_r * mass.powf(1.0 / t - 1.0 / s) * energy)
    };
    let (best, witness) = sweep(family, ratio);
    rep.empirical_best = best;
    rep.witness = witness;
    rep.theoretical = if t == s {
        c_p
    } else {
        let slopes: Vec<Vec<f64>> = family.members.iter().step_by(family.len().div_ceil(16).max(1)).map(|mb| lip(space, &mb.values)).collect();
        let alpha = if inputs.q > s { t * (1.0 / s - 1.0 / inputs.q) } else { 1.0 };
        let c_m = inputs.c_m.max(local_maximal_constant(space, a, big_r, &slopes, s, alpha));
        match riesz_constants(inputs.q, c_p, 1.0, s, inputs.q) {
            Ok(rc) => {
                rep.c1 = Some(rc.c1);
                rep.c2 = Some(rc.c2);
                rep.fitted.push(("C_M".into(), c_m));
                rc.c1 * rc.c5 * (2f64.powf(t - 1.0) * (1.0 + c_m)).powf(1.0 / t)
            }
            Err(_) => {
                rep.hypotheses_violated = true;
                rep.notes.push("local Sobolev constant needs s < Q".into());
                f64::INFINITY
            }
        }
    };
    if inputs.q > s && t >= p_star(s, inputs.q)? {
        rep.hypotheses_violated = true;
        rep.notes.push("t is not below p*".into());
    }
    rep.fitted.push(("Q".into(), inputs.q));
    rep.fitted.push(("C_P".into(), c_p));
    if cfg.timing {
        rep.seconds = Some(start.elapsed().as_secs_f64());
    }
    rep.conclude();
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnulusFlavor {
    /// `(∫_A |f-f_A|^t)^(1/t) <= C R / m(B_R(o))^(1/s-1/t) (∫_{A_ρ} g^s)^(1/s)`.
    Sobolev,
    /// `∫_A |f-f_A|^s <= C R^s ∫_{A_ρ} g^s`.
    Poincare,
}

/// Local inequality on a connected subset of `A(o, R, αR)` with `ρ = δR`.
#[allow(clippy::too_many_arguments)]
pub fn annulus_piece_check(
    space: &Space,
    o: usize,
    big_r: f64,
    alpha: f64,
    delta: f64,
    a: &[usize],
    s: f64,
    t: f64,
    family: &TestFamily,
    flavor: AnnulusFlavor,
    cfg: &CheckConfig,
) -> Result<InequalityReport> {
    let t = if flavor == AnnulusFlavor::Poincare { s } else { t };
    if s < 1.0 || t < s {
        return Err(Error::ExponentOutOfRange(format!("need 1 <= s <= t, got s = {s}, t = {t}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !space.is_connected_set(a) {
        return Err(Error::NotConnected);
    }
    let net_flavor = match flavor {
        AnnulusFlavor::Sobolev => NetFlavor::Sobolev,
        AnnulusFlavor::Poincare => NetFlavor::Poincare { lambda: 1.0 },
    };
    // validates annulus membership and ρ >= resolution
    crate::covering::annulus_piece_covering(space, o, big_r, alpha, delta, a, net_flavor)?;
    let start = Instant::now();
    let rho = delta * big_r;
    let a_rho = neighborhood(space, a, rho);
    let m = space.measure();
    let mass_a: f64 = a.iter().map(|&v| m[v]).sum();
    let name = match flavor {
        AnnulusFlavor::Sobolev => "annulus-sobolev",
        AnnulusFlavor::Poincare => "annulus-poincare",
    };
    let mut rep = InequalityReport::new(name, s, t);
    let inputs = measure_local_inputs(space, s, t, family, cfg)?;
    let lc = local_constant_rho(space, a, rho, s, t, &inputs);
    let ball_mass = space.ball_mass(o, big_r);
    let ratio = |f: &[f64]| {
        let g = lip(space, f);
        let mean = a.iter().map(|&v| f[v] * m[v]).sum::<f64>() / mass_a;
        let lhs = a.iter().map(|&v| (f[v] - mean).abs().powf(t) * m[v]).sum::<f64>();
        let energy = a_rho.iter().map(|&v| g[v].powf(s) * m[v]).sum::<f64>();
        match flavor {
            AnnulusFlavor::Sobolev => safe_ratio(
                lhs.powf(1.0 / t),
                big_r * ball_mass.powf(1.0 / t - 1.0 / s) * energy.powf(1.0 / s),
            ),
            AnnulusFlavor::Poincare => safe_ratio(lhs, big_r.powf(s) * energy),
        }
    };
    let (best, witness) = sweep(family, ratio);
    rep.empirical_best = best;
    rep.witness = witness;
    rep.theoretical = match flavor {
        AnnulusFlavor::Sobolev => lc.k / (big_r * ball_mass.powf(1.0 / t - 1.0 / s)),
        AnnulusFlavor::Poincare => lc.k.powf(s) / big_r.powf(s),
    };
    rep.q1 = Some(lc.q1);
    rep.q2 = Some(lc.q2);
    rep.c1 = Some(lc.c1);
    rep.c2 = Some(lc.c2);
    rep.fitted = vec![
        ("Q".into(), inputs.q),
        ("C_P".into(), inputs.c_p),
        ("C_M".into(), inputs.c_m),
        ("rho".into(), rho),
        ("net_size".into(), lc.n as f64),
    ];
    if t > s && inputs.q <= s {
        rep.hypotheses_violated = true;
        rep.notes.push("local Sobolev constant needs s < Q".into());
    }
    if cfg.timing {
        rep.seconds = Some(start.elapsed().as_secs_f64());
    }
    rep.conclude();
    Ok(rep)
}

/// Exact best constant of `Σ_{k>=1} |f_k| m_k / k <= C Σ_k lip f(k) m_k` on the unit path
/// `0, 1, ..., n-1` based at `0`, over `f` vanishing at `n-1`.
///
/// Extremals are ramps with constant slope on a run of consecutive edges, so the
/// constant is the best ratio `Σ_{j=p}^{q} G_j / Σ_{v=p}^{q+1} m_v` with
/// `G_j = Σ_{k=1}^{j} m_k / k`.
pub fn path_hardy_constant(masses: &[f64]) -> f64 {
    let n = masses.len();
    if n < 2 {
        return 0.0;
    }
    let mut g = vec![0.0; n - 1];
    let mut acc = 0.0;
    for j in 0..n - 1 {
        if j >= 1 {
            acc += masses[j] / j as f64;
        }
        g[j] = acc;
    }
    let mut best = 0.0f64;
    for p in 0..n - 1 {
        let mut gain = 0.0;
        let mut cost = masses[p];
        for q in p..n - 1 {
            gain += g[q];
            cost += masses[q + 1];
            best = best.max(gain / cost);
        }
    }
    best
}

/// The dyadic truncations used for the necessity signal, with their exact constants.
pub fn path_hardy_sweep(exponents: std::ops::RangeInclusive<u32>) -> Vec<(usize, f64)> {
    exponents
        .map(|e| {
            let n = 1usize << e;
            (n, path_hardy_constant(&vec![1.0; n]))
        })
        .collect()
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Space;
use crate::error::{Error, Result};
use crate::tolerances::AHLFORS_CAP;

/// The (center, radius) grid a profile was estimated on.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleSpec {
    pub centers: Vec<usize>,
    pub radii: Vec<f64>,
    /// Keep only pairs whose doubled ball is not the whole space.
    pub interior: bool,
}

impl SampleSpec {
    /// Radii at half-integer multiples of the resolution in `[1.5 h, diam/2]`,
    /// with every `stride`-th vertex as a center (at most `max_centers`).
    pub fn interior(space: &Space, max_centers: usize) -> SampleSpec {
        let n = space.n();
        let max_centers = max_centers.max(1);
        let stride = n.div_ceil(max_centers).max(1);
        let centers: Vec<usize> = (0..n).step_by(stride).collect();
        SampleSpec { centers, radii: half_grid(space.resolution(), space.diameter() / 2.0, 64), interior: true }
    }
}

/// Half-integer multiples of `h` up to `max`, thinned geometrically to at most `cap` values.
pub(crate) fn half_grid(h: f64, max: f64, cap: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 1.0;
    while (k + 0.5) * h <= max {
        out.push((k + 0.5) * h);
        k += 1.0;
    }
    geometric_subset(out, cap)
}

pub(crate) fn geometric_subset(values: Vec<f64>, cap: usize) -> Vec<f64> {
    if values.len() <= cap || cap < 2 {
        return values;
    }
    let len = values.len();
    let mut idx: Vec<usize> = (0..cap)
        .map(|j| {
            let t = j as f64 / (cap - 1) as f64;
            ((len as f64).powf(t).round() as usize).clamp(1, len) - 1
        })
        .collect();
    idx.dedup();
    idx.into_iter().map(|i| values[i]).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceProfile {
    pub c_d: f64,
    pub q: f64,
    pub pairs: usize,
    pub sample_spec: SampleSpec,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PIParams {
    pub p: f64,
    pub c_p: f64,
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ReverseDoublingParams {
    pub o: usize,
    pub eta: f64,
    pub c_o: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AhlforsParams {
    pub q: f64,
    pub c_a: f64,
}

/// Largest sampled ratio `m(B_2r(x)) / m(B_r(x))`.
pub fn doubling_profile(space: &Space, samples: &SampleSpec) -> Result<SpaceProfile> {
    if space.n() == 1 {
        return Ok(SpaceProfile { c_d: 1.0, q: 0.0, pairs: 0, sample_spec: samples.clone() });
    }
    let res = space.resolution();
    let half_diam = space.diameter() / 2.0;
    let per_center: Vec<(f64, usize)> = samples
        .centers
        .par_iter()
        .map(|&x| {
            let prof = space.radial_profile(x);
            let ecc = prof.max_dist();
            let mut best = 0.0f64;
            let mut count = 0;
            for &r in &samples.radii {
                if r < res || r > half_diam + 1e-12 {
                    continue;
                }
                if samples.interior && 2.0 * r > ecc {
                    continue;
                }
                let small = prof.mass_below(r);
                if small <= 0.0 {
                    continue;
                }
                best = best.max(prof.mass_below(2.0 * r) / small);
                count += 1;
            }
            (best, count)
        })
        .collect();
    let pairs: usize = per_center.iter().map(|p| p.1).sum();
    if pairs == 0 {
        return Err(Error::EmptySample);
    }
    let c_d = per_center.iter().map(|p| p.0).fold(1.0, f64::max);
    Ok(SpaceProfile { c_d, q: c_d.log2(), pairs, sample_spec: samples.clone() })
}

/// `inf (m(B_R(o)) / m(B_r(o))) (r/R)^eta` over half-integer radii up to the eccentricity of `o`.
pub fn reverse_doubling_fit(space: &Space, o: usize, eta: f64) -> Result<ReverseDoublingParams> {
    let ecc = space.eccentricity(o);
    let radii = half_grid(space.resolution(), ecc, 2048);
    reverse_doubling_fit_radii(space, o, eta, &radii)
}

pub fn reverse_doubling_fit_radii(
    space: &Space,
    o: usize,
    eta: f64,
    radii: &[f64],
) -> Result<ReverseDoublingParams> {
    if o >= space.n() {
        return Err(Error::NoBasePoint(o));
    }
    let prof = space.radial_profile(o);
    let masses: Vec<f64> = radii.iter().map(|&r| prof.mass_below(r)).collect();
    let mut c_o = f64::INFINITY;
    for i in 0..radii.len() {
        if masses[i] <= 0.0 {
            continue;
        }
        for j in i..radii.len() {
            let v = masses[j] / masses[i] * (radii[i] / radii[j]).powf(eta);
            c_o = c_o.min(v);
        }
    }
    if !c_o.is_finite() {
        return Err(Error::EmptySample);
    }
    Ok(ReverseDoublingParams { o, eta, c_o })
}

/// Least-squares slope of `log m(B_r(o))` against `log r` for `r` in `[2h, ecc/2]`.
pub fn growth_exponent(space: &Space, o: usize) -> f64 {
    let prof = space.radial_profile(o);
    let h = space.resolution();
    let top = prof.max_dist() / 2.0;
    let mut pts = Vec::new();
    let mut r = 2.0 * h;
    while r <= top {
        pts.push((r.ln(), prof.mass_below(r).ln()));
        r *= 2f64.sqrt();
    }
    if pts.len() < 2 {
        return 0.0;
    }
    slope(&pts).0
}

fn slope(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return (0.0, my);
    }
    let b = sxy / sxx;
    (b, my - b * mx)
}

/// Ahlfors fit on the interior sample grid with the default cap.
pub fn ahlfors_fit(space: &Space) -> Result<AhlforsParams> {
    let spec = SampleSpec::interior(space, 256);
    let h = space.resolution();
    let half = space.diameter() / 2.0;
    let radii: Vec<f64> = spec.radii.iter().cloned().filter(|&r| r >= h && r <= half).collect();
    ahlfors_fit_samples(space, &spec.centers, &radii, true, AHLFORS_CAP)
}

/// Least-squares `Q` from `log m(B_r(x))` against `log r`, then
/// `C_A = max max(m / r^Q, r^Q / m)` over the samples.
pub fn ahlfors_fit_samples(
    space: &Space,
    centers: &[usize],
    radii: &[f64],
    interior: bool,
    cap: f64,
) -> Result<AhlforsParams> {
    let samples: Vec<Vec<(f64, f64)>> = centers
        .par_iter()
        .map(|&x| {
            let prof = space.radial_profile(x);
            let ecc = prof.max_dist();
            radii
                .iter()
                .filter(|&&r| !interior || 2.0 * r <= ecc)
                .map(|&r| (r, prof.mass_below(r)))
                .filter(|p| p.1 > 0.0)
                .collect()
        })
        .collect();
    let flat: Vec<(f64, f64)> = samples.into_iter().flatten().collect();
    let distinct = {
        let mut rs: Vec<f64> = flat.iter().map(|p| p.0).collect();
        rs.sort_by(f64::total_cmp);
        rs.dedup();
        rs.len()
    };
    if distinct < 2 {
        return Err(Error::NotAhlfors { c_a: f64::INFINITY, cap });
    }
    let logs: Vec<(f64, f64)> = flat.iter().map(|&(r, m)| (r.ln(), m.ln())).collect();
    let q = slope(&logs).0;
    let mut c_a = 1.0f64;
    for &(r, m) in &flat {
        let rq = r.powf(q);
        c_a = c_a.max(m / rq).max(rq / m);
    }
    if c_a > cap {
        return Err(Error::NotAhlfors { c_a, cap });
    }
    Ok(AhlforsParams { q, c_a })
}

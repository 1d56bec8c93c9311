//! Numeric tolerances shared by every module.

/// Relative slack used when comparing a distance with a radius.
///
/// Shortest-path sums accumulate rounding error, so a vertex at nominal
/// distance `r` may come out as `r ± 1e-15`. Radii are compared with
/// `d < r - DIST_EPS * max(1, r)`.
pub const DIST_EPS: f64 = 1e-9;

/// Relative tolerance for closed-form identities.
pub const FORMULA_REL: f64 = 1e-9;

/// Relative tolerance for empirical-versus-theoretical comparisons.
pub const EMPIRICAL_REL: f64 = 1e-6;

/// Multiplier on `resolution / R` added to local empirical comparisons.
pub const LOCAL_RES_SLACK: f64 = 3.0;

/// Vertex counts up to this value get a fully precomputed distance matrix.
pub const APSP_LIMIT: usize = 5000;

/// Byte budget for cached distance rows on larger spaces.
pub const ROW_CACHE_BYTES: usize = 256 << 20;

/// Default cap for the Ahlfors regularity constant.
pub const AHLFORS_CAP: f64 = 64.0;

/// `d < r` with rounding slack.
#[inline]
pub fn below(d: f64, r: f64) -> bool {
    d < r - DIST_EPS * r.abs().max(1.0)
}

/// Relative comparison `a <= b (1 + rel)`.
#[inline]
pub fn le_rel(a: f64, b: f64, rel: f64) -> bool {
    a <= b * (1.0 + rel) || a <= b
}

//! Benchmark spaces. Every generated space has its base point at vertex 0.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Edge, Space};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GalleryKind {
    GridQuadrant,
    SectorUnion,
    RadialProfile,
    ConeGrid,
}

impl GalleryKind {
    pub fn name(self) -> &'static str {
        match self {
            GalleryKind::GridQuadrant => "grid_quadrant",
            GalleryKind::SectorUnion => "sector_union",
            GalleryKind::RadialProfile => "radial_profile",
            GalleryKind::ConeGrid => "cone_grid",
        }
    }
}

impl FromStr for GalleryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid_quadrant" => Ok(GalleryKind::GridQuadrant),
            "sector_union" => Ok(GalleryKind::SectorUnion),
            "radial_profile" => Ok(GalleryKind::RadialProfile),
            "cone_grid" => Ok(GalleryKind::ConeGrid),
            other => Err(Error::InvalidSpec(format!("unknown kind `{other}`"))),
        }
    }
}

/// Parameters of a gallery space.
///
/// `size` is the truncation parameter: grid side, path length, ring count, or
/// the Euclidean truncation radius of the unbounded sector for `sector_union`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GallerySpec {
    pub kind: GalleryKind,
    pub size: usize,
    pub eta: Option<f64>,
    pub resolution: Option<f64>,
}

pub const SECTOR_DEFAULT_SIZE: usize = 34;

impl GallerySpec {
    pub fn grid_quadrant(n: usize) -> Self {
        GallerySpec { kind: GalleryKind::GridQuadrant, size: n, eta: None, resolution: None }
    }

    pub fn sector_union(resolution: f64) -> Self {
        GallerySpec {
            kind: GalleryKind::SectorUnion,
            size: SECTOR_DEFAULT_SIZE,
            eta: None,
            resolution: Some(resolution),
        }
    }

    pub fn radial_profile(n: usize, eta: f64) -> Self {
        GallerySpec { kind: GalleryKind::RadialProfile, size: n, eta: Some(eta), resolution: None }
    }

    pub fn cone_grid(n: usize, eta: f64) -> Self {
        GallerySpec { kind: GalleryKind::ConeGrid, size: n, eta: Some(eta), resolution: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::InvalidSpec(format!("size must be >= 2, got {}", self.size)));
        }
        match self.kind {
            GalleryKind::RadialProfile | GalleryKind::ConeGrid => match self.eta {
                Some(e) if e >= 1.0 && e.is_finite() => {}
                Some(e) => return Err(Error::InvalidSpec(format!("eta must be >= 1, got {e}"))),
                None => return Err(Error::InvalidSpec(format!("{} needs eta", self.kind.name()))),
            },
            GalleryKind::SectorUnion => match self.resolution {
                Some(r) if r > 0.0 && r.is_finite() => {}
                Some(r) => {
                    return Err(Error::InvalidSpec(format!("resolution must be > 0, got {r}")))
                }
                None => return Err(Error::InvalidSpec("sector_union needs a resolution".into())),
            },
            GalleryKind::GridQuadrant => {}
        }
        Ok(())
    }
}

/// `kind:a[:b]`, e.g. `grid_quadrant:64`, `radial_profile:512:2`, `sector_union:0.25[:34]`.
impl FromStr for GallerySpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let kind: GalleryKind = parts[0].parse()?;
        let bad = |what: &str| Error::InvalidSpec(format!("cannot parse {what} in `{s}`"));
        let spec = match kind {
            GalleryKind::GridQuadrant => {
                if parts.len() != 2 {
                    return Err(bad("grid_quadrant:n"));
                }
                GallerySpec::grid_quadrant(parts[1].parse().map_err(|_| bad("n"))?)
            }
            GalleryKind::RadialProfile | GalleryKind::ConeGrid => {
                if parts.len() != 3 {
                    return Err(bad("kind:n:eta"));
                }
                let n = parts[1].parse().map_err(|_| bad("n"))?;
                let eta = parts[2].parse().map_err(|_| bad("eta"))?;
                GallerySpec { kind, size: n, eta: Some(eta), resolution: None }
            }
            GalleryKind::SectorUnion => {
                if parts.len() < 2 || parts.len() > 3 {
                    return Err(bad("sector_union:resolution[:size]"));
                }
                let mut spec = GallerySpec::sector_union(parts[1].parse().map_err(|_| bad("resolution"))?);
                if parts.len() == 3 {
                    spec.size = parts[2].parse().map_err(|_| bad("size"))?;
                }
                spec
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for GallerySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GalleryKind::GridQuadrant => write!(f, "grid_quadrant:{}", self.size),
            GalleryKind::RadialProfile | GalleryKind::ConeGrid => {
                write!(f, "{}:{}:{}", self.kind.name(), self.size, self.eta.unwrap_or(1.0))
            }
            GalleryKind::SectorUnion => {
                write!(f, "sector_union:{}:{}", self.resolution.unwrap_or(1.0), self.size)
            }
        }
    }
}

pub fn generate(spec: &GallerySpec) -> Result<Space> {
    spec.validate()?;
    match spec.kind {
        GalleryKind::GridQuadrant => grid_quadrant(spec.size),
        GalleryKind::SectorUnion => sector_union(spec.resolution.unwrap(), spec.size as f64),
        GalleryKind::RadialProfile => radial_profile(spec.size, spec.eta.unwrap()),
        GalleryKind::ConeGrid => cone_grid(spec.size, spec.eta.unwrap()),
    }
}

/// `(n+1)^2` lattice points of `[0,n]^2`, 4-neighbour unit edges, vertex `y(n+1)+x`.
pub fn grid_quadrant(n: usize) -> Result<Space> {
    let side = n + 1;
    let mut edges = Vec::with_capacity(2 * n * side);
    let mut coords = Vec::with_capacity(side * side);
    for y in 0..side {
        for x in 0..side {
            let v = y * side + x;
            coords.push([x as f64, y as f64]);
            if x + 1 < side {
                edges.push((v, v + 1, 1.0));
            }
            if y + 1 < side {
                edges.push((v, v + side, 1.0));
            }
        }
    }
    Space::with_coords(side * side, edges, vec![1.0; side * side], Some(coords))
}

/// Path `1..n` with mass `k^(eta-1)` at vertex `k` (index `k-1`).
pub fn radial_profile(n: usize, eta: f64) -> Result<Space> {
    let edges: Vec<Edge> = (0..n - 1).map(|k| (k, k + 1, 1.0)).collect();
    let measure = (1..=n).map(|k| (k as f64).powf(eta - 1.0)).collect();
    let coords = (0..n).map(|k| [k as f64, 0.0]).collect();
    Space::with_coords(n, edges, measure, Some(coords))
}

const ANGLE_TOL: f64 = 1e-9;

fn in_closed_arc(theta: f64, lo: f64, hi: f64) -> bool {
    theta >= lo - ANGLE_TOL && theta <= hi + ANGLE_TOL
}

/// Membership in the closure of the four-region planar set.
fn sector_member(x: f64, y: f64, size: f64) -> bool {
    let r = x.hypot(y);
    let tol = 1e-9;
    if r <= 1.0 + tol {
        return true;
    }
    // angle in [0, 2pi)
    let mut th = y.atan2(x);
    if th < 0.0 {
        th += 2.0 * PI;
    }
    let signed = if th > PI { th - 2.0 * PI } else { th };
    if r <= size + tol && in_closed_arc(signed, -PI / 4.0, PI / 4.0) {
        return true;
    }
    if r <= 20.0 + tol && in_closed_arc(th, PI / 2.0, 3.0 * PI / 4.0) {
        return true;
    }
    if r <= 17.0 + tol && in_closed_arc(th, PI, 1.5 * PI) {
        let in_block = th > 1.25 * PI + ANGLE_TOL
            && th < 1.75 * PI - ANGLE_TOL
            && r > 3.0 + tol
            && r < 15.0 - tol;
        return !in_block;
    }
    false
}

/// Lattice points of step `h` in the closed union of the unit disc and the
/// three sectors, king-move edges. The unbounded sector is cut at radius `size`.
pub fn sector_union(h: f64, size: f64) -> Result<Space> {
    let k = (size / h).ceil() as i64;
    let mut pts: Vec<(i64, i64)> = Vec::new();
    for j in -k..=k {
        for i in -k..=k {
            if sector_member(i as f64 * h, j as f64 * h, size) {
                pts.push((i, j));
            }
        }
    }
    // origin first
    let origin = pts.iter().position(|&p| p == (0, 0)).expect("origin is a member");
    let o = pts.remove(origin);
    pts.insert(0, o);
    let mut index = std::collections::HashMap::with_capacity(pts.len());
    for (v, &p) in pts.iter().enumerate() {
        index.insert(p, v);
    }
    let diag = std::f64::consts::SQRT_2 * h;
    let mut edges = Vec::new();
    for (v, &(i, j)) in pts.iter().enumerate() {
        for (di, dj, len) in [(1, 0, h), (0, 1, h), (1, 1, diag), (1, -1, diag)] {
            if let Some(&u) = index.get(&(i + di, j + dj)) {
                edges.push((v, u, len));
            }
        }
    }
    let coords = pts.iter().map(|&(i, j)| [i as f64 * h, j as f64 * h]).collect();
    let n = pts.len();
    Space::with_coords(n, edges, vec![1.0; n], Some(coords))
}

/// Apex plus rings `r = 1..n` carrying `ceil(4 r^(eta-1))` equally spaced points.
/// Ring cycles, nearest-angle radial links in both directions, Euclidean lengths.
pub fn cone_grid(n: usize, eta: f64) -> Result<Space> {
    let counts: Vec<usize> = (1..=n)
        .map(|r| ((4.0 * (r as f64).powf(eta - 1.0)) - 1e-9).ceil().max(1.0) as usize)
        .collect();
    let mut start = vec![1usize; n + 1];
    for r in 1..n {
        start[r + 1] = start[r] + counts[r - 1];
    }
    let total = 1 + counts.iter().sum::<usize>();
    let mut coords = vec![[0.0, 0.0]; total];
    for r in 1..=n {
        let k = counts[r - 1];
        for j in 0..k {
            let th = 2.0 * PI * j as f64 / k as f64;
            coords[start[r] + j] = [r as f64 * th.cos(), r as f64 * th.sin()];
        }
    }
    let len = |a: usize, b: usize| {
        let (p, q) = (coords[a], coords[b]);
        (p[0] - q[0]).hypot(p[1] - q[1])
    };
    let mut pairs = std::collections::BTreeSet::new();
    let mut add = |a: usize, b: usize| {
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    };
    for j in 0..counts[0] {
        add(0, start[1] + j);
    }
    let nearest = |r: usize, th: f64| -> usize {
        let k = counts[r - 1];
        let j = (th * k as f64 / (2.0 * PI)).round() as usize % k;
        start[r] + j
    };
    for r in 1..=n {
        let k = counts[r - 1];
        if k >= 2 {
            for j in 0..k {
                add(start[r] + j, start[r] + (j + 1) % k);
            }
        }
        if r < n {
            for j in 0..k {
                let th = 2.0 * PI * j as f64 / k as f64;
                add(start[r] + j, nearest(r + 1, th));
            }
            let k2 = counts[r];
            for j in 0..k2 {
                let th = 2.0 * PI * j as f64 / k2 as f64;
                add(start[r + 1] + j, nearest(r, th));
            }
        }
    }
    let edges: Vec<Edge> = pairs.into_iter().map(|(a, b)| (a, b, len(a, b))).collect();
    Space::with_coords(total, edges, vec![1.0; total], Some(coords))
}

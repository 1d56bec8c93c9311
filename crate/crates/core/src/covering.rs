//! κ-decompositions, good coverings, nets and covering validation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{layer_bound, theoretical_q2};
use crate::error::{Error, Result};
use crate::space::Space;
use crate::tolerances::{below, le_rel, EMPIRICAL_REL};

/// A connected piece `U_{i,a}` of a κ-decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub level: i32,
    pub index: usize,
    pub members: Vec<usize>,
    pub touches_inner: bool,
    pub touches_outer: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeKind {
    /// A component that does not reach the outer sphere of its shell.
    Thin,
    /// A component of the partial outermost shell of a truncated space.
    Truncation,
    /// A thin component with no lower neighbour; kept as its own piece.
    Kept,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub level: i32,
    /// Smallest vertex of the absorbed component.
    pub first_vertex: usize,
    pub size: usize,
    pub kind: MergeKind,
    /// `(level, index)` of the receiving piece.
    pub into: (i32, usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KappaDecomposition {
    pub o: usize,
    pub kappa: f64,
    pub pieces: Vec<Piece>,
    pub merged_from: Vec<MergeRecord>,
    /// Level of the outermost pieces after truncation.
    pub boundary_level: i32,
}

impl KappaDecomposition {
    pub fn levels(&self) -> Vec<i32> {
        let mut l: Vec<i32> = self.pieces.iter().map(|p| p.level).collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// Number of pieces per level.
    pub fn level_counts(&self) -> BTreeMap<i32, usize> {
        let mut m = BTreeMap::new();
        for p in &self.pieces {
            *m.entry(p.level).or_insert(0) += 1;
        }
        m
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("decomposition serializes")
    }
}

/// Shell index `i` with `κ^(i-1) <= d < κ^i`.
pub fn shell_level(d: f64, kappa: f64) -> i32 {
    let mut i = (d.ln() / kappa.ln()).floor() as i32 + 1;
    while !below(d, kappa.powi(i)) {
        i += 1;
    }
    while below(d, kappa.powi(i - 1)) {
        i -= 1;
    }
    i
}

struct Comp {
    level: i32,
    members: Vec<usize>,
    lambda: bool,
}

pub fn kappa_decomposition(space: &Space, o: usize, kappa: f64) -> Result<KappaDecomposition> {
    if o >= space.n() {
        return Err(Error::NoBasePoint(o));
    }
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(Error::KappaOutOfRange(kappa));
    }
    let n = space.n();
    let res = space.resolution();
    let d: Vec<f64> = space.row(o).to_vec();
    let mut by_level: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        if v == o {
            continue;
        }
        let i = shell_level(d[v], kappa);
        by_level.entry(i).or_default().push(v);
    }
    if by_level.is_empty() {
        return Ok(KappaDecomposition { o, kappa, pieces: vec![], merged_from: vec![], boundary_level: 0 });
    }

    let mut comps: Vec<Comp> = Vec::new();
    let mut comp_of = vec![usize::MAX; n];
    for (&i, verts) in &by_level {
        let outer = kappa.powi(i);
        for members in space.components(verts) {
            let reach = members.iter().any(|&v| {
                d[v] >= outer - res || space.neighbors(v).iter().any(|&(u, _)| !below(d[u], outer))
            });
            let id = comps.len();
            for &v in &members {
                comp_of[v] = id;
            }
            comps.push(Comp { level: i, members, lambda: reach });
        }
    }
    let top = *by_level.keys().next_back().unwrap();
    let bottom = *by_level.keys().next().unwrap();

    // connecting edge counts between components
    let mut links: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); comps.len()];
    for &(u, v, _) in space.edges() {
        if u == o || v == o {
            continue;
        }
        let (a, b) = (comp_of[u], comp_of[v]);
        if a != b {
            *links[a].entry(b).or_insert(0) += 1;
            *links[b].entry(a).or_insert(0) += 1;
        }
    }

    // Choose a lower neighbour: level i-1 first (Λ preferred), else the highest lower level.
    let choose = |c: usize, allowed: &dyn Fn(usize) -> bool| -> Option<usize> {
        let lvl = comps[c].level;
        let mut best: Option<(i32, bool, usize, std::cmp::Reverse<usize>)> = None;
        for (&b, &count) in &links[c] {
            if comps[b].level >= lvl || !allowed(b) {
                continue;
            }
            let key = (comps[b].level, comps[b].lambda, count, std::cmp::Reverse(b));
            if best.is_none_or(|k| key > k) {
                best = Some(key);
            }
        }
        best.map(|k| k.3 .0)
    };

    let mut parent: Vec<usize> = (0..comps.len()).collect();
    let mut kinds: Vec<Option<MergeKind>> = vec![None; comps.len()];
    for c in 0..comps.len() {
        let lvl = comps[c].level;
        if lvl == top && top > bottom {
            continue;
        }
        if comps[c].lambda {
            continue;
        }
        match choose(c, &|b| comps[b].level < top || top == bottom) {
            Some(b) => {
                parent[c] = b;
                kinds[c] = Some(MergeKind::Thin);
            }
            None => kinds[c] = Some(MergeKind::Kept),
        }
    }
    if top > bottom {
        for c in 0..comps.len() {
            if comps[c].level != top {
                continue;
            }
            match choose(c, &|_| true) {
                Some(b) => {
                    parent[c] = b;
                    kinds[c] = Some(MergeKind::Truncation);
                }
                None => kinds[c] = Some(MergeKind::Kept),
            }
        }
    }
    let root = |mut c: usize| {
        while parent[c] != c {
            c = parent[c];
        }
        c
    };

    let mut members_of: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for c in 0..comps.len() {
        members_of.entry(root(c)).or_default().extend_from_slice(&comps[c].members);
    }
    let mut pieces: Vec<Piece> = members_of
        .into_iter()
        .map(|(r, mut members)| {
            members.sort_unstable();
            let i = comps[r].level;
            let inner = kappa.powi(i - 1);
            let outer = kappa.powi(i);
            Piece {
                level: i,
                index: 0,
                touches_inner: members.iter().any(|&v| d[v] < inner + 2.0 * res),
                touches_outer: members.iter().any(|&v| d[v] >= outer - 2.0 * res),
                members,
            }
        })
        .collect();
    pieces.sort_by(|a, b| a.level.cmp(&b.level).then(a.members[0].cmp(&b.members[0])));
    let mut count: BTreeMap<i32, usize> = BTreeMap::new();
    for p in pieces.iter_mut() {
        let k = count.entry(p.level).or_insert(0);
        p.index = *k;
        *k += 1;
    }
    let mut label_of_root = BTreeMap::new();
    for p in &pieces {
        label_of_root.insert(root(comp_of[p.members[0]]), (p.level, p.index));
    }
    let mut merged_from = Vec::new();
    for c in 0..comps.len() {
        if let Some(kind) = kinds[c] {
            merged_from.push(MergeRecord {
                level: comps[c].level,
                first_vertex: comps[c].members[0],
                size: comps[c].members.len(),
                kind,
                into: label_of_root[&root(c)],
            });
        }
    }
    let boundary_level = pieces.iter().map(|p| p.level).max().unwrap_or(0);
    Ok(KappaDecomposition { o, kappa, pieces, merged_from, boundary_level })
}

/// Triples `(U, U*, U#)` with their touching structure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoodCovering {
    pub u: Vec<Vec<usize>>,
    pub star: Vec<Vec<usize>>,
    pub sharp: Vec<Vec<usize>>,
    /// `(level, index)` for decomposition coverings, `(0, i)` for nets.
    pub labels: Vec<(i32, usize)>,
    /// Unordered pairs `i < j` with touching `U_i`, `U_j`.
    pub adjacency: Vec<(usize, usize)>,
    /// `(i, j, k(i, j))` for every ordered adjacent pair.
    pub k_map: Vec<(usize, usize, usize)>,
    /// Vertices the `U` sets must cover.
    pub domain: Vec<usize>,
    /// Set that must contain every `U#`, if any.
    pub outer: Option<Vec<usize>>,
    /// Net centers, for net coverings.
    pub centers: Vec<usize>,
}

impl GoodCovering {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Neighbours of each triple in the adjacency relation.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.len()];
        for &(i, j) in &self.adjacency {
            nb[i].push(j);
            nb[j].push(i);
        }
        for l in nb.iter_mut() {
            l.sort_unstable();
        }
        nb
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("covering serializes")
    }

    /// Piece adjacency in Graphviz format.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph covering {\n");
        for (i, &(l, a)) in self.labels.iter().enumerate() {
            s.push_str(&format!("  p{i} [label=\"({l},{a})\\n{}\"];\n", self.u[i].len()));
        }
        for &(i, j) in &self.adjacency {
            s.push_str(&format!("  p{i} -- p{j};\n"));
        }
        s.push_str("}\n");
        s
    }
}

fn words(p: usize) -> usize {
    p.div_ceil(64).max(1)
}

/// Row `i` is the bitset of sets `j` whose member touches a member of set `i`
/// (shared vertex or an edge between them).
pub(crate) fn touch_rows(space: &Space, sets: &[Vec<usize>]) -> Vec<Vec<u64>> {
    let n = space.n();
    let w = words(sets.len());
    let mut contain = vec![0u64; n * w];
    for (i, s) in sets.iter().enumerate() {
        for &v in s {
            contain[v * w + i / 64] |= 1 << (i % 64);
        }
    }
    sets.par_iter()
        .map(|s| {
            let mut row = vec![0u64; w];
            for &v in s {
                for k in 0..w {
                    row[k] |= contain[v * w + k];
                }
                for &(u, _) in space.neighbors(v) {
                    for k in 0..w {
                        row[k] |= contain[u * w + k];
                    }
                }
            }
            row
        })
        .collect()
}

fn bits(row: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (k, &word) in row.iter().enumerate() {
        let mut x = word;
        while x != 0 {
            let b = x.trailing_zeros() as usize;
            out.push(k * 64 + b);
            x &= x - 1;
        }
    }
    out
}

fn union_of(sets: &[Vec<usize>], which: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = which.iter().flat_map(|&j| sets[j].iter().copied()).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `U* = ∪ {U_j : U_j touches U_i}`, `U# = ∪ {U*_j : U*_j touches U*_i}`, `k(i, j) = i`.
pub fn expand_covering(space: &Space, decomp: &KappaDecomposition) -> GoodCovering {
    let u: Vec<Vec<usize>> = decomp.pieces.iter().map(|p| p.members.clone()).collect();
    let labels = decomp.pieces.iter().map(|p| (p.level, p.index)).collect();
    let domain: Vec<usize> = (0..space.n()).filter(|&v| v != decomp.o).collect();
    expand_sets(space, u, labels, domain, None, vec![])
}

fn expand_sets(
    space: &Space,
    u: Vec<Vec<usize>>,
    labels: Vec<(i32, usize)>,
    domain: Vec<usize>,
    outer: Option<Vec<usize>>,
    centers: Vec<usize>,
) -> GoodCovering {
    let rows = touch_rows(space, &u);
    let nb: Vec<Vec<usize>> = rows.iter().map(|r| bits(r)).collect();
    let star: Vec<Vec<usize>> = nb.par_iter().map(|l| union_of(&u, l)).collect();
    let star_rows = touch_rows(space, &star);
    let sharp: Vec<Vec<usize>> = star_rows.par_iter().map(|r| union_of(&star, &bits(r))).collect();
    let (adjacency, k_map) = adjacency_from(&nb);
    GoodCovering { u, star, sharp, labels, adjacency, k_map, domain, outer, centers }
}

fn adjacency_from(nb: &[Vec<usize>]) -> (Vec<(usize, usize)>, Vec<(usize, usize, usize)>) {
    let mut adjacency = Vec::new();
    let mut k_map = Vec::new();
    for (i, l) in nb.iter().enumerate() {
        for &j in l {
            if j == i {
                continue;
            }
            if i < j {
                adjacency.push((i, j));
            }
            k_map.push((i, j, i));
        }
    }
    (adjacency, k_map)
}

/// Greedy farthest-point net: pairwise distances `>= radius`, every point of
/// `subset` within distance `< radius` of a center.
pub fn greedy_net(space: &Space, subset: &[usize], radius: f64) -> Vec<usize> {
    if subset.is_empty() {
        return vec![];
    }
    let mut sub = subset.to_vec();
    sub.sort_unstable();
    sub.dedup();
    let n = space.n();
    let mut pos = vec![usize::MAX; n];
    for (k, &v) in sub.iter().enumerate() {
        pos[v] = k;
    }
    let mut mind = vec![f64::INFINITY; sub.len()];
    let mut centers = Vec::new();
    let mut next = sub[0];
    loop {
        centers.push(next);
        let cutoff = mind.iter().cloned().fold(0.0, f64::max);
        for (v, dv) in space.dist_within(&[next], cutoff) {
            let k = pos[v];
            if k != usize::MAX && dv < mind[k] {
                mind[k] = dv;
            }
        }
        mind[pos[next]] = 0.0;
        let mut far = (0, f64::NEG_INFINITY);
        for (k, &m) in mind.iter().enumerate() {
            if m > far.1 {
                far = (k, m);
            }
        }
        if below(far.1, radius) {
            break;
        }
        next = sub[far.0];
    }
    centers
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "flavor")]
pub enum NetFlavor {
    /// `(B_{ρ/3}, B_ρ, B_ρ)` on a `ρ/3`-net.
    Sobolev,
    /// `(B_{ρ/λ}, B_ρ, B_{λρ})` on a `ρ/λ`-net.
    Poincare { lambda: f64 },
}

/// `{x : d(x, A) < ρ}`.
pub fn neighborhood(space: &Space, a: &[usize], rho: f64) -> Vec<usize> {
    let mut out: Vec<usize> =
        space.dist_within(a, rho).into_iter().filter(|p| below(p.1, rho)).map(|p| p.0).collect();
    out.extend_from_slice(a);
    out.sort_unstable();
    out.dedup();
    out
}

/// Net covering of `(A, A_ρ)`.
pub fn net_covering(space: &Space, a: &[usize], rho: f64, flavor: NetFlavor) -> GoodCovering {
    let (net_r, u_r, star_r, sharp_r) = match flavor {
        NetFlavor::Sobolev => (rho / 3.0, rho / 3.0, rho, rho),
        NetFlavor::Poincare { lambda } => (rho / lambda, rho / lambda, rho, lambda * rho),
    };
    let centers = greedy_net(space, a, net_r);
    let u: Vec<Vec<usize>> = centers.par_iter().map(|&x| space.ball(x, u_r)).collect();
    let star: Vec<Vec<usize>> = centers.par_iter().map(|&x| space.ball(x, star_r)).collect();
    let sharp: Vec<Vec<usize>> = if sharp_r == star_r {
        star.clone()
    } else {
        centers.par_iter().map(|&x| space.ball(x, sharp_r)).collect()
    };
    let rows = touch_rows(space, &u);
    let nb: Vec<Vec<usize>> = rows.iter().map(|r| bits(r)).collect();
    let (adjacency, k_map) = adjacency_from(&nb);
    let mut domain = a.to_vec();
    domain.sort_unstable();
    domain.dedup();
    let outer = Some(neighborhood(space, a, sharp_r.max(rho)));
    let labels = (0..centers.len()).map(|i| (0, i)).collect();
    GoodCovering { u, star, sharp, labels, adjacency, k_map, domain, outer, centers }
}

/// Net covering of a subset of the annulus `A(o, R, αR)` with `ρ = δR`.
#[allow(clippy::too_many_arguments)]
pub fn annulus_piece_covering(
    space: &Space,
    o: usize,
    r: f64,
    alpha: f64,
    delta: f64,
    a: &[usize],
    flavor: NetFlavor,
) -> Result<GoodCovering> {
    if o >= space.n() {
        return Err(Error::NoBasePoint(o));
    }
    let row = space.row(o);
    let big = alpha * r;
    let slack = space.resolution();
    if a.is_empty() || a.iter().any(|&v| row[v] < r - slack || row[v] > big + slack) {
        return Err(Error::NotInAnnulus);
    }
    let rho = delta * r;
    if rho < space.resolution() {
        return Err(Error::RhoBelowResolution { rho, resolution: space.resolution() });
    }
    Ok(net_covering(space, a, rho, flavor))
}

/// Net size bound `[4(6α/δ+1)]^Q`.
pub fn net_count_bound(alpha: f64, delta: f64, q: f64) -> f64 {
    (4.0 * (6.0 * alpha / delta + 1.0)).powf(q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringBounds {
    pub q1: f64,
    pub q2: f64,
}

/// Bounds for a κ-decomposition covering: `Q₁ <= 101 h` and `theoretical_Q2`.
pub fn decomposition_bounds(q: f64, kappa: f64, alpha: f64, beta: f64) -> Result<CoveringBounds> {
    let h = layer_bound(q, kappa)?;
    Ok(CoveringBounds { q1: 101.0 * h, q2: theoretical_q2(q, kappa, alpha, beta) })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoveringValidation {
    pub q1_emp: f64,
    pub q2_emp_m: f64,
    pub q2_emp_mu: f64,
    pub q1_bound: Option<f64>,
    pub q2_bound: Option<f64>,
    /// Axioms (1) nesting, (2) coverage, (3) overlap, (4) k-containment and measure ratio.
    pub axioms_pass: [bool; 4],
    /// Pointwise maxima of `Σ 1_{U*_i}` and `Σ_i Σ_{j~i} 1_{U*_k(i,j)}`.
    pub overlap_sums: (f64, f64),
    pub overlap_pass: (bool, bool),
}

impl CoveringValidation {
    pub fn all_pass(&self) -> bool {
        self.axioms_pass.iter().all(|&b| b) && self.overlap_pass.0 && self.overlap_pass.1
    }
}

fn subset_of(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|v| b.binary_search(v).is_ok())
}

/// Checks the four covering axioms with `m` and with `μ = w m`.
pub fn validate_covering(
    cov: &GoodCovering,
    space: &Space,
    weight: &[f64],
    bounds: Option<CoveringBounds>,
) -> CoveringValidation {
    let p = cov.len();
    let m = space.measure();
    let mass = |s: &[usize]| s.iter().map(|&v| m[v]).sum::<f64>();
    let wmass = |s: &[usize]| s.iter().map(|&v| m[v] * weight[v]).sum::<f64>();

    let nested = (0..p).all(|i| subset_of(&cov.u[i], &cov.star[i]) && subset_of(&cov.star[i], &cov.sharp[i]));

    let mut covered = vec![false; space.n()];
    for s in &cov.u {
        for &v in s {
            covered[v] = true;
        }
    }
    let mut coverage = cov.domain.iter().all(|&v| covered[v]);
    if let Some(outer) = &cov.outer {
        coverage &= cov.sharp.iter().all(|s| subset_of(s, outer));
    }

    let sharp_rows = touch_rows(space, &cov.sharp);
    let q1_emp = sharp_rows.iter().map(|r| bits(r).len()).max().unwrap_or(0) as f64;
    let axiom3 = match bounds {
        Some(b) => q1_emp <= b.q1,
        None => true,
    };

    let um: Vec<f64> = cov.u.iter().map(|s| mass(s)).collect();
    let uw: Vec<f64> = cov.u.iter().map(|s| wmass(s)).collect();
    let sm: Vec<f64> = cov.star.iter().map(|s| mass(s)).collect();
    let sw: Vec<f64> = cov.star.iter().map(|s| wmass(s)).collect();
    let mut contained = true;
    let mut q2m = 0.0f64;
    let mut q2w = 0.0f64;
    let pairs = cov.k_map.iter().cloned().chain((0..p).map(|i| (i, i, i)));
    for (i, j, k) in pairs {
        contained &= subset_of(&cov.u[i], &cov.star[k]) && subset_of(&cov.u[j], &cov.star[k]);
        q2m = q2m.max(sm[k] / um[i].min(um[j]));
        q2w = q2w.max(sw[k] / uw[i].min(uw[j]));
    }
    let axiom4 = contained
        && match bounds {
            Some(b) => le_rel(q2m, b.q2, EMPIRICAL_REL) && le_rel(q2w, b.q2, EMPIRICAL_REL),
            None => q2m.is_finite() && q2w.is_finite(),
        };

    // pointwise overlap sums
    let mut c1 = vec![0u32; space.n()];
    let mut c12 = vec![0u64; space.n()];
    let mut k_count = vec![1u64; p];
    for &(_, _, k) in &cov.k_map {
        k_count[k] += 1;
    }
    for (i, s) in cov.star.iter().enumerate() {
        for &v in s {
            c1[v] += 1;
            c12[v] += k_count[i];
        }
    }
    let s1 = c1.iter().cloned().max().unwrap_or(0) as f64;
    let s12 = c12.iter().cloned().max().unwrap_or(0) as f64;
    CoveringValidation {
        q1_emp,
        q2_emp_m: q2m,
        q2_emp_mu: q2w,
        q1_bound: bounds.map(|b| b.q1),
        q2_bound: bounds.map(|b| b.q2),
        axioms_pass: [nested, coverage, axiom3, axiom4],
        overlap_sums: (s1, s12),
        overlap_pass: (s1 <= q1_emp, s12 <= q1_emp.powi(3)),
    }
}

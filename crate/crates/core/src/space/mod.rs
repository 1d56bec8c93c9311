//! Finite metric measure spaces carried by weighted graphs.
//!
//! The metric is the shortest-path metric of the edge graph. Balls are open,
//! annuli are half-open `{r <= d < R}` so that they partition balls.

mod io;
mod profile;

pub use io::{load_space, save_space, space_from_json, space_to_json, SpaceFile};
pub use profile::{
    ahlfors_fit, ahlfors_fit_samples, doubling_profile, growth_exponent, reverse_doubling_fit,
    reverse_doubling_fit_radii, AhlforsParams, PIParams, ReverseDoublingParams, SampleSpec,
    SpaceProfile,
};

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::ops::Deref;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tolerances::{below, APSP_LIMIT, ROW_CACHE_BYTES};

/// An undirected edge `(u, v, length)`.
pub type Edge = (usize, usize, f64);

/// A finite metric measure space: graph metric plus positive vertex masses.
pub struct Space {
    n: usize,
    coords: Option<Vec<[f64; 2]>>,
    edges: Vec<Edge>,
    measure: Vec<f64>,
    resolution: f64,
    adj: Vec<Vec<(usize, f64)>>,
    dist: Distances,
}

impl std::fmt::Debug for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Space")
            .field("n", &self.n)
            .field("edges", &self.edges)
            .field("measure", &self.measure)
            .finish_non_exhaustive()
    }
}

enum Distances {
    Full(Vec<f64>),
    Lazy(RowCache),
}

struct RowCache {
    cap: usize,
    inner: Mutex<(HashMap<usize, Arc<[f64]>>, VecDeque<usize>)>,
}

/// A row of the distance matrix.
pub enum Row<'a> {
    Full(&'a [f64]),
    Cached(Arc<[f64]>),
}

impl Deref for Row<'_> {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        match self {
            Row::Full(s) => s,
            Row::Cached(a) => a,
        }
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra_within(adj: &[Vec<(usize, f64)>], sources: &[usize], cutoff: f64) -> Vec<(usize, f64)> {
    let mut d: HashMap<usize, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    let mut out = Vec::new();
    for &s in sources {
        d.insert(s, 0.0);
        heap.push(HeapItem(0.0, s));
    }
    while let Some(HeapItem(du, u)) = heap.pop() {
        if du > d[&u] || du >= cutoff {
            continue;
        }
        out.push((u, du));
        for &(v, w) in &adj[u] {
            let nd = du + w;
            if nd < cutoff && d.get(&v).is_none_or(|&old| nd < old) {
                d.insert(v, nd);
                heap.push(HeapItem(nd, v));
            }
        }
    }
    out.sort_unstable_by_key(|p| p.0);
    out
}

fn dijkstra(adj: &[Vec<(usize, f64)>], sources: &[usize]) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        d[s] = 0.0;
        heap.push(HeapItem(0.0, s));
    }
    while let Some(HeapItem(du, u)) = heap.pop() {
        if du > d[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = du + w;
            if nd < d[v] {
                d[v] = nd;
                heap.push(HeapItem(nd, v));
            }
        }
    }
    d
}

impl Space {
    /// Builds a space from an edge list and vertex masses.
    pub fn new(n: usize, edges: Vec<Edge>, measure: Vec<f64>) -> Result<Space> {
        Space::with_coords(n, edges, measure, None)
    }

    pub fn with_coords(
        n: usize,
        edges: Vec<Edge>,
        measure: Vec<f64>,
        coords: Option<Vec<[f64; 2]>>,
    ) -> Result<Space> {
        Space::build(n, edges, measure, coords, APSP_LIMIT)
    }

    /// Like [`Space::with_coords`] with an explicit all-pairs threshold.
    pub fn build(
        n: usize,
        edges: Vec<Edge>,
        measure: Vec<f64>,
        coords: Option<Vec<[f64; 2]>>,
        apsp_limit: usize,
    ) -> Result<Space> {
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if measure.len() != n {
            return Err(Error::InvalidArgument(format!(
                "measure has {} entries for {} vertices",
                measure.len(),
                n
            )));
        }
        if let Some(c) = &coords {
            if c.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "coords has {} entries for {} vertices",
                    c.len(),
                    n
                )));
            }
        }
        for (v, &m) in measure.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::NonPositiveMass { vertex: v, mass: m });
            }
        }
        let mut adj = vec![Vec::new(); n];
        let mut resolution = f64::INFINITY;
        for (i, &(u, v, len)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge {i} references a missing vertex"
                )));
            }
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::NonPositiveLength { index: i, length: len });
            }
            if u == v {
                continue;
            }
            adj[u].push((v, len));
            adj[v].push((u, len));
            resolution = resolution.min(len);
        }
        for a in adj.iter_mut() {
            a.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        }
        if !resolution.is_finite() {
            resolution = 1.0;
        }
        let components = count_components(&adj);
        if components != 1 {
            return Err(Error::DisconnectedGraph { components });
        }
        let dist = if n <= apsp_limit {
            let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(&adj, &[s])).collect();
            let mut full = Vec::with_capacity(n * n);
            for r in rows {
                full.extend_from_slice(&r);
            }
            // symmetrize to remove any rounding asymmetry between directions
            for i in 0..n {
                for j in (i + 1)..n {
                    let m = full[i * n + j].min(full[j * n + i]);
                    full[i * n + j] = m;
                    full[j * n + i] = m;
                }
            }
            Distances::Full(full)
        } else {
            let cap = (ROW_CACHE_BYTES / (8 * n)).max(64);
            Distances::Lazy(RowCache { cap, inner: Mutex::new((HashMap::new(), VecDeque::new())) })
        };
        Ok(Space { n, coords, edges, measure, resolution, adj, dist })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    /// Length of the shortest edge.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    pub fn is_precomputed(&self) -> bool {
        matches!(self.dist, Distances::Full(_))
    }

    /// Distances from `x` to every vertex.
    pub fn row(&self, x: usize) -> Row<'_> {
        match &self.dist {
            Distances::Full(full) => Row::Full(&full[x * self.n..(x + 1) * self.n]),
            Distances::Lazy(cache) => {
                {
                    let guard = cache.inner.lock().unwrap();
                    if let Some(r) = guard.0.get(&x) {
                        return Row::Cached(r.clone());
                    }
                }
                let r: Arc<[f64]> = dijkstra(&self.adj, &[x]).into();
                let mut guard = cache.inner.lock().unwrap();
                if !guard.0.contains_key(&x) {
                    if guard.1.len() >= cache.cap {
                        if let Some(old) = guard.1.pop_front() {
                            guard.0.remove(&old);
                        }
                    }
                    guard.0.insert(x, r.clone());
                    guard.1.push_back(x);
                }
                Row::Cached(r)
            }
        }
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        match &self.dist {
            Distances::Full(full) => full[x * self.n + y],
            Distances::Lazy(_) => self.row(x)[y],
        }
    }

    /// Distance from the set `sources` to every vertex.
    pub fn dist_from_set(&self, sources: &[usize]) -> Vec<f64> {
        dijkstra(&self.adj, sources)
    }

    /// Vertices at distance `< cutoff` from the set, with their distances, sorted by vertex.
    pub fn dist_within(&self, sources: &[usize], cutoff: f64) -> Vec<(usize, f64)> {
        dijkstra_within(&self.adj, sources, cutoff)
    }

    /// Open ball `{y : d(x, y) < r}`, sorted.
    pub fn ball(&self, x: usize, r: f64) -> Vec<usize> {
        if let Distances::Full(full) = &self.dist {
            let row = &full[x * self.n..(x + 1) * self.n];
            return (0..self.n).filter(|&y| below(row[y], r)).collect();
        }
        let cached = match &self.dist {
            Distances::Lazy(cache) => cache.inner.lock().unwrap().0.get(&x).cloned(),
            Distances::Full(_) => None,
        };
        match cached {
            Some(row) => (0..self.n).filter(|&y| below(row[y], r)).collect(),
            None => dijkstra_within(&self.adj, &[x], r)
                .into_iter()
                .filter(|p| below(p.1, r))
                .map(|p| p.0)
                .collect(),
        }
    }

    /// Half-open annulus `{y : r <= d(o, y) < big_r}`, sorted.
    pub fn annulus(&self, o: usize, r: f64, big_r: f64) -> Vec<usize> {
        let row = self.row(o);
        (0..self.n).filter(|&y| !below(row[y], r) && below(row[y], big_r)).collect()
    }

    pub fn ball_mass(&self, x: usize, r: f64) -> f64 {
        let row = self.row(x);
        let mut m = 0.0;
        for y in 0..self.n {
            if below(row[y], r) {
                m += self.measure[y];
            }
        }
        m
    }

    pub fn mass(&self, set: &[usize]) -> f64 {
        set.iter().map(|&v| self.measure[v]).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn eccentricity(&self, x: usize) -> f64 {
        self.row(x).iter().cloned().fold(0.0, f64::max)
    }

    /// Exact diameter on precomputed spaces; a four-sweep lower estimate otherwise.
    pub fn diameter(&self) -> f64 {
        match &self.dist {
            Distances::Full(full) => full.iter().cloned().fold(0.0, f64::max),
            Distances::Lazy(_) => {
                let mut x = 0;
                let mut best = 0.0f64;
                for _ in 0..4 {
                    let row = self.row(x);
                    let (far, d) = argmax(&row);
                    if d <= best && x != 0 {
                        break;
                    }
                    best = best.max(d);
                    x = far;
                }
                best
            }
        }
    }

    /// Sorted distances from `x` with cumulative masses, for fast ball-mass queries.
    pub fn radial_profile(&self, x: usize) -> RadialProfile {
        let row = self.row(x);
        let mut idx: Vec<usize> = (0..self.n).collect();
        idx.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        let mut dists = Vec::with_capacity(self.n);
        let mut cum = Vec::with_capacity(self.n);
        let mut acc = 0.0;
        for &v in &idx {
            acc += self.measure[v];
            dists.push(row[v]);
            cum.push(acc);
        }
        RadialProfile { dists, cum }
    }

    /// SHA-256 of a canonical byte encoding of the space.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        for &(u, v, l) in &self.edges {
            h.update((u as u64).to_le_bytes());
            h.update((v as u64).to_le_bytes());
            h.update(l.to_bits().to_le_bytes());
        }
        for m in &self.measure {
            h.update(m.to_bits().to_le_bytes());
        }
        if let Some(c) = &self.coords {
            for p in c {
                h.update(p[0].to_bits().to_le_bytes());
                h.update(p[1].to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Same graph with every mass multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Space> {
        Space::with_coords(
            self.n,
            self.edges.clone(),
            self.measure.iter().map(|m| m * c).collect(),
            self.coords.clone(),
        )
    }

    /// Whether the vertex set induces a connected subgraph.
    pub fn is_connected_set(&self, set: &[usize]) -> bool {
        if set.is_empty() {
            return true;
        }
        let mut inside = vec![false; self.n];
        for &v in set {
            inside[v] = true;
        }
        components_of(self, set, &inside).len() == 1
    }

    /// Connected components of the subgraph induced by `set`, each sorted,
    /// ordered by smallest member.
    pub fn components(&self, set: &[usize]) -> Vec<Vec<usize>> {
        let mut inside = vec![false; self.n];
        for &v in set {
            inside[v] = true;
        }
        components_of(self, set, &inside)
    }
}

fn components_of(space: &Space, set: &[usize], inside: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; space.n];
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    for &s in &sorted {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < comp.len() {
            let u = comp[i];
            i += 1;
            for &(v, _) in &space.adj[u] {
                if inside[v] && !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn count_components(adj: &[Vec<(usize, f64)>]) -> usize {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

fn argmax(row: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &d) in row.iter().enumerate() {
        if d > best.1 {
            best = (i, d);
        }
    }
    best
}

/// Distances from a center in increasing order with cumulative masses.
pub struct RadialProfile {
    pub dists: Vec<f64>,
    pub cum: Vec<f64>,
}

impl RadialProfile {
    /// Mass of the open ball of radius `r`.
    pub fn mass_below(&self, r: f64) -> f64 {
        let k = self.dists.partition_point(|&d| below(d, r));
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// Number of vertices in the open ball of radius `r`.
    pub fn count_below(&self, r: f64) -> usize {
        self.dists.partition_point(|&d| below(d, r))
    }

    pub fn max_dist(&self) -> f64 {
        *self.dists.last().unwrap_or(&0.0)
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }
}

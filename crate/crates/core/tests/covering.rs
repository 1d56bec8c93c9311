use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::PI;

use pilab::constants::{layer_bound, theoretical_q2};
use pilab::covering::{
    annulus_piece_covering, decomposition_bounds, expand_covering, greedy_net, kappa_decomposition, net_count_bound,
    validate_covering, MergeKind, NetFlavor,
};
use pilab::gallery::{self, GallerySpec};
use pilab::space::{doubling_profile, SampleSpec};
use pilab::verify::{weight_density, WeightKind};
use pilab::{Error, Space};

fn path(n: usize) -> Space {
    let edges = (0..n - 1).map(|k| (k, k + 1, 1.0)).collect();
    Space::new(n, edges, vec![1.0; n]).unwrap()
}

/// Components of the subgraph induced by `set`, by breadth-first search.
fn bfs_components(space: &Space, set: &[usize]) -> usize {
    let inside: BTreeSet<usize> = set.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for &s in set {
        if !seen.insert(s) {
            continue;
        }
        count += 1;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &(u, _) in space.neighbors(v) {
                if inside.contains(&u) && seen.insert(u) {
                    q.push_back(u);
                }
            }
        }
    }
    count
}

fn sector() -> Space {
    gallery::generate(&GallerySpec::sector_union(0.25)).unwrap()
}

fn angle(space: &Space, v: usize) -> f64 {
    let [x, y] = space.coords().unwrap()[v];
    let t = y.atan2(x);
    if t < -PI / 2.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

#[test]
fn radial_one_piece_per_level() {
    let s = gallery::radial_profile(64, 2.0).unwrap();
    let d = kappa_decomposition(&s, 0, 2.0).unwrap();
    assert!(d.level_counts().values().all(|&c| c == 1));
}

#[test]
fn grid_pieces_match_flood_fill() {
    let g = gallery::grid_quadrant(32).unwrap();
    let d = kappa_decomposition(&g, 0, 2.0).unwrap();
    let counts = d.level_counts();
    for l in d.levels() {
        let shell = g.annulus(0, 2f64.powi(l - 1), 2f64.powi(l));
        // the unit shell holds (1,0) and (0,1), which are not lattice neighbours
        let want = if l == 1 { 2 } else { 1 };
        assert_eq!(bfs_components(&g, &shell), want, "level {l}");
        assert_eq!(counts[&l], want, "level {l}");
    }
}

#[test]
fn sector_outer_fragment_merged_inward() {
    let s = sector();
    let d = kappa_decomposition(&s, 0, 2.0).unwrap();
    assert_eq!(d.level_counts()[&5], 1);
    let coords = s.coords().unwrap();
    // the second sector spans angles [π/2, 3π/4]
    let merged: Vec<_> = d
        .merged_from
        .iter()
        .filter(|m| m.level == 5 && m.kind == MergeKind::Thin)
        .filter(|m| {
            let a = angle(&s, m.first_vertex);
            (PI / 2.0 - 1e-6..=3.0 * PI / 4.0 + 1e-6).contains(&a)
        })
        .collect();
    assert_eq!(merged.len(), 1, "{:?}", d.merged_from);
    let rec = merged[0];
    assert_eq!(rec.into.0, 4);
    let target = d.pieces.iter().find(|p| (p.level, p.index) == rec.into).unwrap();
    assert!(target.members.contains(&rec.first_vertex));
    let [x, y] = coords[rec.first_vertex];
    assert!(x.hypot(y) >= 15.0);
}

#[test]
fn pieces_partition_all_but_base() {
    for s in [sector(), gallery::grid_quadrant(32).unwrap(), gallery::cone_grid(48, 1.5).unwrap()] {
        let d = kappa_decomposition(&s, 0, 2.0).unwrap();
        let mut seen = vec![0u32; s.n()];
        for p in &d.pieces {
            assert!(s.is_connected_set(&p.members));
            for &v in &p.members {
                seen[v] += 1;
            }
        }
        assert_eq!(seen[0], 0);
        assert!(seen[1..].iter().all(|&c| c == 1));
    }
}

#[test]
fn pieces_reach_both_shells() {
    let s = sector();
    let d = kappa_decomposition(&s, 0, 2.0).unwrap();
    let row = s.row(0);
    let h = s.resolution();
    for p in &d.pieces {
        let inner = 2f64.powi(p.level - 1);
        let outer = 2f64.powi(p.level);
        let lo = p.members.iter().map(|&v| row[v]).fold(f64::INFINITY, f64::min);
        let hi = p.members.iter().map(|&v| row[v]).fold(0.0, f64::max);
        assert!(lo < inner + 2.0 * h, "piece {:?}", (p.level, p.index));
        if p.level < d.boundary_level {
            assert!(hi >= outer - 2.0 * h, "piece {:?}", (p.level, p.index));
        }
    }
}

#[test]
fn level_counts_within_layer_bound() {
    for s in [sector(), gallery::grid_quadrant(64).unwrap(), gallery::radial_profile(256, 2.0).unwrap()] {
        let q = doubling_profile(&s, &SampleSpec::interior(&s, 32)).unwrap().q;
        let h = layer_bound(q, 2.0).unwrap();
        let d = kappa_decomposition(&s, 0, 2.0).unwrap();
        for (&l, &c) in &d.level_counts() {
            assert!(c as f64 <= h, "level {l}: {c} pieces > {h}");
        }
    }
}

#[test]
fn decomposition_errors() {
    let p = path(4);
    assert!(matches!(kappa_decomposition(&p, 9, 2.0), Err(Error::NoBasePoint(9))));
    assert!(matches!(kappa_decomposition(&p, 0, 1.0), Err(Error::KappaOutOfRange(_))));
}

#[test]
fn decomposition_is_deterministic() {
    let s = sector();
    let a = kappa_decomposition(&s, 0, 2.0).unwrap().to_json();
    let b = kappa_decomposition(&s, 0, 2.0).unwrap().to_json();
    assert_eq!(a, b);
    let ca = expand_covering(&s, &kappa_decomposition(&s, 0, 2.0).unwrap()).to_json();
    let cb = expand_covering(&s, &kappa_decomposition(&s, 0, 2.0).unwrap()).to_json();
    assert_eq!(ca, cb);
}

#[test]
fn radial_star_spans_three_shells() {
    let s = gallery::radial_profile(128, 2.0).unwrap();
    let d = kappa_decomposition(&s, 0, 2.0).unwrap();
    let cov = expand_covering(&s, &d);
    let level_of: BTreeMap<usize, i32> =
        d.pieces.iter().flat_map(|p| p.members.iter().map(move |&v| (v, p.level))).collect();
    let top = *d.levels().last().unwrap();
    let bottom = d.levels()[0];
    for (k, p) in d.pieces.iter().enumerate() {
        let levels: BTreeSet<i32> = cov.star[k].iter().map(|v| level_of[v]).collect();
        let want: BTreeSet<i32> = (p.level - 1..=p.level + 1).filter(|l| (bottom..=top).contains(l)).collect();
        assert_eq!(levels, want, "level {}", p.level);
    }
}

#[test]
fn single_shell_triples_coincide() {
    // star with three unit spokes: every non-base vertex sits in [1, 2)
    let s = Space::new(4, vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], vec![1.0; 4]).unwrap();
    let d = kappa_decomposition(&s, 0, 2.0).unwrap();
    let cov = expand_covering(&s, &d);
    for k in 0..cov.len() {
        assert_eq!(cov.u[k], cov.star[k]);
        assert_eq!(cov.star[k], cov.sharp[k]);
    }
}

#[test]
fn sector_stars_stay_in_their_sector() {
    let s = sector();
    let d = kappa_decomposition(&s, 0, 2.0).unwrap();
    let cov = expand_covering(&s, &d);
    let row = s.row(0);
    let in_first = |v: usize| angle(&s, v).abs() <= PI / 4.0 + 1e-6;
    let in_third = |v: usize| (PI - 1e-6..=1.5 * PI + 1e-6).contains(&angle(&s, v));
    for level in 3..=4 {
        let (lo, hi) = (2f64.powi(level - 1), 2f64.powi(level));
        for (k, p) in d.pieces.iter().enumerate() {
            if p.level != level || !p.members.iter().all(|&v| in_first(v)) {
                continue;
            }
            let hits = cov.star[k].iter().filter(|&&v| in_third(v) && row[v] >= lo && row[v] < hi).count();
            assert_eq!(hits, 0, "level {level}");
        }
    }
}

/// Number of pieces whose `U#` meets or touches the `U#` of piece `k`.
fn sharp_overlap(space: &Space, sharp: &[Vec<usize>], k: usize) -> usize {
    let mut near: BTreeSet<usize> = sharp[k].iter().copied().collect();
    for &v in &sharp[k] {
        near.extend(space.neighbors(v).iter().map(|p| p.0));
    }
    sharp.iter().filter(|s| s.iter().any(|v| near.contains(v))).count()
}

#[test]
fn radial_overlap_counts() {
    for n in [64, 512, 4096] {
        let s = gallery::radial_profile(n, 2.0).unwrap();
        let d = kappa_decomposition(&s, 0, 2.0).unwrap();
        let cov = expand_covering(&s, &d);
        let v = validate_covering(&cov, &s, &vec![1.0; s.n()], None);
        assert!(v.axioms_pass[0]);
        assert!(v.all_pass());
        let oracle = (0..cov.len()).map(|k| sharp_overlap(&s, &cov.sharp, k)).max().unwrap();
        assert_eq!(v.q1_emp, oracle as f64, "n = {n}");
        // U# of a shell spans four shells each way, so overlapping U# sit within nine levels
        assert!(v.q1_emp <= 19.0);
        if n == 64 {
            assert!(v.q1_emp <= 7.0);
        }
    }
}

#[test]
fn sector_weighted_ratio_under_formula() {
    let s = sector();
    let cov = expand_covering(&s, &kappa_decomposition(&s, 0, 2.0).unwrap());
    let q = doubling_profile(&s, &SampleSpec::interior(&s, 32)).unwrap().q;
    let w = weight_density(&s, 0, WeightKind::MuSt, 1.0, 2.0, q);
    let bounds = decomposition_bounds(q, 2.0, 1.0, 2.0).unwrap();
    assert_eq!(bounds.q2, theoretical_q2(q, 2.0, 1.0, 2.0));
    let v = validate_covering(&cov, &s, &w.density, Some(bounds));
    assert!(v.q2_emp_mu <= bounds.q2, "{} > {}", v.q2_emp_mu, bounds.q2);
    assert!(v.all_pass());
}

#[test]
fn overlap_sums_bounded() {
    for s in [sector(), gallery::grid_quadrant(32).unwrap()] {
        let cov = expand_covering(&s, &kappa_decomposition(&s, 0, 2.0).unwrap());
        let v = validate_covering(&cov, &s, &vec![1.0; s.n()], None);
        assert!(v.overlap_sums.0 <= v.q1_emp);
        assert!(v.overlap_sums.1 <= v.q1_emp.powi(3));
    }
}

#[test]
fn nets_on_a_path() {
    let p = path(10);
    let all: Vec<usize> = (0..10).collect();
    assert_eq!(greedy_net(&p, &all, 20.0).len(), 1);
    let net = greedy_net(&p, &all, 2.0);
    for (i, &a) in net.iter().enumerate() {
        for &b in &net[i + 1..] {
            assert!(p.dist(a, b) >= 1.0);
        }
    }
    for v in 0..10 {
        assert!(net.iter().any(|&c| p.dist(c, v) < 2.0), "vertex {v} uncovered");
    }
    assert_eq!(greedy_net(&p, &[7], 3.0), vec![7]);
}

#[test]
fn annulus_net_examples() {
    let g = gallery::grid_quadrant(32).unwrap();
    let v = 10 * 33 + 2;
    let r = g.dist(0, v);
    let single = annulus_piece_covering(&g, 0, r, 2.0, 0.9, &[v], NetFlavor::Sobolev).unwrap();
    assert_eq!(single.len(), 1);
    assert!(single.u[0].contains(&v));

    let a = g.annulus(0, 8.0, 16.0);
    let cov = annulus_piece_covering(&g, 0, 8.0, 2.0, 0.5, &a, NetFlavor::Sobolev).unwrap();
    let q = doubling_profile(&g, &SampleSpec::interior(&g, 32)).unwrap().q;
    assert!((cov.len() as f64) <= net_count_bound(2.0, 0.5, q));
    let val = validate_covering(&cov, &g, &vec![1.0; g.n()], None);
    assert!(val.axioms_pass[0] && val.axioms_pass[1]);

    let cov = annulus_piece_covering(&g, 0, 8.0, 2.0, 0.5, &a, NetFlavor::Poincare { lambda: 1.0 }).unwrap();
    for k in 0..cov.len() {
        assert_eq!(cov.u[k], cov.star[k]);
        assert_eq!(cov.star[k], cov.sharp[k]);
    }
}

#[test]
fn annulus_net_errors() {
    let g = gallery::grid_quadrant(32).unwrap();
    let far = g.annulus(0, 30.0, 40.0);
    assert!(matches!(
        annulus_piece_covering(&g, 0, 8.0, 2.0, 0.5, &far, NetFlavor::Sobolev),
        Err(Error::NotInAnnulus)
    ));
    let a = g.annulus(0, 8.0, 16.0);
    assert!(matches!(
        annulus_piece_covering(&g, 0, 8.0, 2.0, 0.05, &a, NetFlavor::Sobolev),
        Err(Error::RhoBelowResolution { .. })
    ));
}

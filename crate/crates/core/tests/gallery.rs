use pilab::covering::kappa_decomposition;
use pilab::gallery::{self, GalleryKind, GallerySpec};
use pilab::space::{load_space, reverse_doubling_fit, save_space, space_from_json, space_to_json};
use pilab::Error;

#[test]
fn small_grid() {
    let g = gallery::generate(&GallerySpec::grid_quadrant(2)).unwrap();
    assert_eq!(g.n(), 9);
    assert_eq!(g.edges().len(), 12);
}

#[test]
fn radial_masses() {
    let r = gallery::generate(&GallerySpec::radial_profile(4, 2.0)).unwrap();
    assert_eq!(r.measure(), &[1.0, 2.0, 3.0, 4.0]);
}

#[test]
fn grid_total_mass() {
    for n in [1, 5, 17] {
        let g = gallery::grid_quadrant(n).unwrap();
        assert_eq!(g.total_mass(), ((n + 1) * (n + 1)) as f64);
    }
}

#[test]
fn sector_outer_shell_has_one_piece() {
    let s = gallery::generate(&GallerySpec::sector_union(0.25)).unwrap();
    let d = kappa_decomposition(&s, 0, 2.0).unwrap();
    assert_eq!(d.level_counts().get(&5), Some(&1));
}

#[test]
fn sectors_apart_outside_unit_ball() {
    // three components per shell once the sectors separate
    let s = gallery::generate(&GallerySpec::sector_union(0.25)).unwrap();
    for (lo, hi) in [(2.0, 4.0), (4.0, 8.0)] {
        let shell = s.annulus(0, lo, hi);
        assert_eq!(s.components(&shell).len(), 3, "shell [{lo}, {hi})");
    }
}

#[test]
fn round_trip() {
    let g = gallery::grid_quadrant(2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    save_space(&g, &path).unwrap();
    let back = load_space(&path).unwrap();
    assert_eq!(back.n(), g.n());
    assert_eq!(back.edges(), g.edges());
    assert_eq!(back.measure(), g.measure());
    assert_eq!(back.coords(), g.coords());
    assert_eq!(back.hash(), g.hash());
}

fn schema_field(text: &str) -> String {
    match space_from_json(text) {
        Err(Error::Schema { field, .. }) => field,
        other => panic!("expected a schema error, got {other:?}"),
    }
}

#[test]
fn schema_errors() {
    let zero_mass = r#"{"vertices":2,"edges":[[0,1,1.0]],"measure":[1.0,0.0]}"#;
    assert_eq!(schema_field(zero_mass), "measure");
    let missing = r#"{"vertices":2,"edges":[[0,5,1.0]],"measure":[1.0,1.0]}"#;
    assert_eq!(schema_field(missing), "edges");
    let ok = space_to_json(&gallery::grid_quadrant(1).unwrap());
    assert!(space_from_json(&ok).is_ok());
}

#[test]
fn radial_growth_bounded() {
    for eta in [1.0, 1.5, 2.0, 3.0] {
        let n = 512;
        let s = gallery::radial_profile(n, eta).unwrap();
        let prof = s.radial_profile(0);
        let ratios: Vec<f64> = (2..=n / 2).map(|r| prof.mass_below(r as f64) / (r as f64).powf(eta)).collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi / lo <= 8.0, "eta {eta}: [{lo}, {hi}]");
    }
}

#[test]
fn cone_reverse_doubling() {
    for eta in [1.5, 2.0] {
        let s = gallery::cone_grid(256, eta).unwrap();
        let fit = reverse_doubling_fit(&s, 0, eta).unwrap();
        assert!(fit.c_o > 0.05, "eta {eta}: C_o = {}", fit.c_o);
    }
}

#[test]
fn spec_validation() {
    assert!(GallerySpec::radial_profile(10, 0.5).validate().is_err());
    assert!(GallerySpec::grid_quadrant(1).validate().is_err());
    assert!(GallerySpec::sector_union(0.0).validate().is_err());
    assert!("nope".parse::<GalleryKind>().is_err());
    assert_eq!("cone_grid".parse::<GalleryKind>().unwrap(), GalleryKind::ConeGrid);
}

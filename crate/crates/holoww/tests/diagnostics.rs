use std::f64::consts::PI;

use holoww::diagnostics::*;
use holoww::spectral::{Grid, SpectralField, C64, I};
use holoww::waterwave::{make_localized_data, WaterState};

#[test]
fn energy_of_single_modes() {
    let g = Grid::with(32, 2.0 * PI, 2.0 / 3.0).unwrap();
    let e = SpectralField::from_fn(&g, |a| (-I * a).exp());
    let z = SpectralField::zeros(&g);
    assert!((energy0(&e, &z) - PI).abs() < 1e-13);
    assert!((energy0(&z, &e) - PI).abs() < 1e-13);
    // the cubic correction vanishes for a single mode
    assert!(energy_cubic(&e).abs() < 1e-13);
    assert!((energy(&e, &e) - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn energy0_is_quadratic() {
    let g = Grid::with(256, 64.0, 2.0 / 3.0).unwrap();
    let s = make_localized_data(0.01, 2.0, &g).unwrap();
    let a = energy0(&s.w, &s.q);
    let b = energy0(&s.w.scale(C64::new(3.0, 0.0)), &s.q.scale(C64::new(3.0, 0.0)));
    assert!((b / a - 9.0).abs() < 1e-12);
    let c = energy_cubic(&s.w);
    let d = energy_cubic(&s.w.scale(C64::new(2.0, 0.0)));
    assert!((d / c - 8.0).abs() < 1e-10);
}

#[test]
fn diagonalize_inverts() {
    let g = Grid::with(128, 32.0, 2.0 / 3.0).unwrap();
    let s = make_localized_data(0.05, 1.0, &g).unwrap();
    let d = s.diff_state().unwrap();
    let (a, b) = diagonalize(&s.w, &s.q, &d.r);
    let (w, q) = undiagonalize(&a, &b, &d.r);
    assert!(w.sub(&s.w).max_abs() < 1e-15);
    assert!(q.sub(&s.q).max_abs() < 1e-15);
    assert!(b.sub(&s.q).max_abs() > 0.0);
}

#[test]
fn zero_state_has_zero_norms() {
    let g = Grid::with(64, 16.0, 2.0 / 3.0).unwrap();
    let s = WaterState::zero(&g);
    let r = DiagnosticsRecord::compute(&s, 0.5).unwrap();
    assert_eq!(r.e, 0.0);
    assert_eq!(r.xnorm, 0.0);
    assert_eq!(r.wh, 0.0);
    assert!(r.hn.iter().all(|&h| h == 0.0));
    assert_eq!(r.chord_arc_min, 1.0);
    assert_eq!(r.fields().len(), DiagnosticsRecord::csv_header().split(',').count());
}

#[test]
fn sobolev_norms_increase_with_order() {
    let g = Grid::with(256, 64.0, 2.0 / 3.0).unwrap();
    let s = make_localized_data(0.01, 2.0, &g).unwrap();
    let d = s.diff_state().unwrap();
    let h: Vec<f64> = (0..6).map(|n| sobolev_norm(&d, n)).collect();
    for w in h.windows(2) {
        assert!(w[1] >= w[0]);
    }
    let (a, b) = control_norms(&d);
    assert!(a > 0.0 && b > 0.0);
}

#[test]
fn weighted_energy_size_equals_eps() {
    let g = Grid::with(1024, 256.0, 2.0 / 3.0).unwrap();
    let s = make_localized_data(0.01, 2.0, &g).unwrap();
    let r = DiagnosticsRecord::compute(&s, 0.5).unwrap();
    assert!((r.wh.sqrt() - 0.01).abs() < 1e-10);
    assert_eq!(r.sqrtt_x, 0.0);
}

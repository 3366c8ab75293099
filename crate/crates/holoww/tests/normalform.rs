use std::f64::consts::PI;

use holoww::harness::config::ExperimentConfig;
use holoww::harness::experiments::{decomposition_error, null_check, random_holomorphic, run_sweep};
use holoww::normalform::*;
use holoww::spectral::{derivative, Grid, GridSpec, SpectralField, C64, I};
use holoww::waterwave::{make_localized_data, WaterState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nf_config() -> ExperimentConfig {
    ExperimentConfig {
        grid: GridSpec { n_points: 256, length: 64.0, dealias_fraction: 2.0 / 3.0 },
        width: 1.0,
        carrier: 1.0,
        t_max: 0.0,
        ..ExperimentConfig::default()
    }
}

#[test]
fn zero_maps_to_zero() {
    let g = Grid::with(64, 16.0, 2.0 / 3.0).unwrap();
    let nf = to_normal_form(&WaterState::zero(&g));
    assert_eq!(nf.wt.max_abs(), 0.0);
    assert_eq!(nf.qt.max_abs(), 0.0);
    let cs = cubic_sources_from(&nf.wt, &nf.qt);
    assert_eq!(cs.g_total().max_abs(), 0.0);
    assert_eq!(null_cancellation_check(&nf.wt, &nf.qt), 0.0);
}

#[test]
fn single_mode_normal_form() {
    let g = Grid::with(32, 2.0 * PI, 2.0 / 3.0).unwrap();
    let eps = 0.05;
    let w = SpectralField::from_fn(&g, |a| eps * (-I * a).exp());
    let s = WaterState::new(0.0, holoww::spectral::project_dealias(&w), SpectralField::zeros(&g)).unwrap();
    let nf = to_normal_form(&s);
    for (&a, z) in g.alpha().iter().zip(nf.wt.values()) {
        let want = eps * (-I * a).exp() + I * eps * eps * (1.0 + (-2.0 * I * a).exp());
        assert!((z - want).norm() < 1e-14);
    }
}

#[test]
fn deviation_is_quadratic() {
    let g = Grid::with(256, 64.0, 2.0 / 3.0).unwrap();
    let dev = |eps: f64| {
        let s = make_localized_data(eps, 1.0, &g).unwrap();
        let nf = to_normal_form(&s);
        pair_size(&nf.wt.sub(&s.w), &nf.qt.sub(&s.q))
    };
    let p = (dev(0.01) / dev(0.005)).log2();
    assert!((p - 2.0).abs() < 0.02, "exponent {p}");
}

#[test]
fn split_sums_to_the_unsplit_sources() {
    let (err, k3r) = decomposition_error(3).unwrap();
    assert!(err <= 1e-12, "decomposition error {err}");
    assert_eq!(k3r, 0.0);
}

#[test]
fn phase_rotation_sorts_the_split_terms() {
    // W, R → e^{iθ}W, e^{iθ}R: resonant terms carry one net factor,
    // the nonresonant ones three or minus one
    let g = Grid::with(256, 64.0, 2.0 / 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w = random_holomorphic(&g, &mut rng, 30, 0.1);
    let r = random_holomorphic(&g, &mut rng, 30, 0.1);
    let rot = C64::new(0.0, 1.0);
    let a = cubic_sources_from(&w, &r);
    let b = cubic_sources_from(&w.scale(rot), &r.scale(rot));
    let close = |x: &SpectralField, y: &SpectralField, f: C64| {
        let scale = x.max_abs().max(1e-300);
        x.scale(f).sub(y).max_abs() / scale
    };
    assert!(close(&a.g3r, &b.g3r, rot) < 1e-12);
    assert!(close(&a.g3nr, &b.g3nr, rot.powi(3)) < 1e-12);
    assert!(close(&a.k3nr, &b.k3nr, rot.conj()) < 1e-12);
    // and the resonant term is not invariant under the other rotations
    assert!(close(&a.g3r, &b.g3r, rot.powi(3)) > 0.1);
}

#[test]
fn sweep_exponents() {
    let r = run_sweep(&nf_config()).unwrap();
    let e = &r.exponents;
    assert!(e.rhs_quadratic.within(2.0, 0.1), "{:?}", e.rhs_quadratic);
    assert!(e.nf_deviation.within(2.0, 0.1), "{:?}", e.nf_deviation);
    assert!(e.nf_residual.within(3.0, 0.3), "{:?}", e.nf_residual);
    assert!(e.nf_quartic.within(4.0, 0.5), "{:?}", e.nf_quartic);
    assert!(e.cubic_sources.within(3.0, 0.1), "{:?}", e.cubic_sources);
    assert!(r.nf_residual_cubic && r.nf_quartic_ok && r.rhs_quadratic_ok);
}

#[test]
fn residual_vanishes_in_the_linear_regime() {
    let cfg = nf_config();
    let g = Grid::new(cfg.grid).unwrap();
    let s = make_localized_data(1e-8, 1.0, &g).unwrap();
    let (gg, kk) = nf_residual(&s, 0.05).unwrap();
    let rel = pair_size(&gg, &kk) / pair_size(&s.w, &s.q);
    assert!(rel < 1e-10, "relative residual {rel}");
}

#[test]
fn residual_matches_cubic_sources() {
    let g = Grid::with(256, 64.0, 2.0 / 3.0).unwrap();
    let s = make_localized_data(0.005, 1.0, &g).unwrap();
    let nf = to_normal_form(&s);
    let (gg, kk) = nf_residual(&s, 0.05).unwrap();
    let cs = cubic_sources_from(&nf.wt, &derivative(&nf.qt));
    let rel = pair_size(&gg.sub(&cs.g_total()), &kk.sub(&cs.k_total())) / pair_size(&gg, &kk);
    assert!(rel < 0.05, "relative mismatch {rel}");
}

#[test]
fn null_forms_cancel_on_the_ansatz_only() {
    let r = null_check(1).unwrap();
    assert!(r.ansatz_ratio <= 0.1, "{:?}", r.ansatz_ratios);
    assert!(r.random_ratio > 0.5, "random baseline {}", r.random_ratio);
    assert!(r.g3r_center_rel_err < 0.05);
}

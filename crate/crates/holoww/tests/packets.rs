use std::sync::Arc;

use holoww::normalform::NormalFormState;
use holoww::packets::*;
use holoww::spectral::{Grid, SpectralField, C64, I};
use holoww::Error;

fn grid() -> Arc<Grid> {
    Grid::with(4096, 1024.0, 2.0 / 3.0).unwrap()
}

#[test]
fn bump_has_unit_mass() {
    let n = 200_000;
    let h = 2.0 / n as f64;
    let m: f64 = (1..n).map(|k| chi(-1.0 + k as f64 * h)).sum::<f64>() * h;
    assert!((m - 1.0).abs() < 1e-10);
    assert_eq!(chi(1.0), 0.0);
    assert_eq!(chi(-1.5), 0.0);
}

#[test]
fn bump_derivatives_match_differences() {
    let h = 1e-5;
    for y in [-0.8, -0.3, 0.0, 0.25, 0.7] {
        let d1 = (chi(y + h) - chi(y - h)) / (2.0 * h);
        let d2 = (chi(y + h) - 2.0 * chi(y) + chi(y - h)) / (h * h);
        assert!((d1 - chi_prime(y)).abs() < 1e-7, "y={y}");
        assert!((d2 - chi_second(y)).abs() < 1e-4, "y={y}");
    }
}

fn band_fraction(v: f64, t: f64, grid: &Arc<Grid>, c: f64) -> f64 {
    let p = build_packet(v, t, grid).unwrap();
    let xv = packet_frequency(v);
    let band = c / packet_halfwidth(v, t);
    let total: f64 = p.u.coeffs().iter().map(|z| z.norm_sqr()).sum();
    let near: f64 = p
        .u
        .coeffs()
        .iter()
        .zip(grid.xi())
        .filter(|(_, &x)| (x - xv).abs() <= band)
        .map(|(z, _)| z.norm_sqr())
        .sum();
    near / total
}

#[test]
fn packet_is_localized_in_frequency() {
    // a band of width ~ t^{-1/2} around ξ_v holds the packet at every t
    let big = Grid::with(16384, 4096.0, 2.0 / 3.0).unwrap();
    for (t, g) in [(400.0, grid()), (1600.0, big)] {
        let f = band_fraction(1.0, t, &g, 8.0);
        assert!(f > 0.99, "t={t}: fraction {f}");
    }
}

#[test]
fn packet_error_decays_like_inverse_t() {
    let big = Grid::with(16384, 4096.0, 2.0 / 3.0).unwrap();
    let rel = |t: f64, g: &Arc<Grid>| {
        let p = build_packet(1.0, t, g).unwrap();
        p.g.max_abs() / p.w.max_abs()
    };
    let (a, b) = (rel(400.0, &grid()), rel(1600.0, &big));
    assert!(a < 0.2 && b < 0.3 * a, "{a} then {b}");
}

#[test]
fn gamma_of_zero_is_zero() {
    let g = grid();
    let nf = NormalFormState { time: 400.0, wt: SpectralField::zeros(&g), qt: SpectralField::zeros(&g) };
    assert_eq!(gamma_at(&nf, 1.0, 400.0, 2, GammaForm::Simplified).unwrap(), C64::new(0.0, 0.0));
    assert_eq!(gamma_at(&nf, 1.0, 400.0, 2, GammaForm::Full).unwrap(), C64::new(0.0, 0.0));
}

#[test]
fn gamma_recovers_the_ansatz_amplitude() {
    let g = grid();
    let t = 400.0;
    let amp = |v: f64| C64::new(0.3, 0.2) * (-((v - 1.0) / 0.3).powi(2)).exp();
    let nf = ansatz_state(amp, t, &g);
    for v in [0.9, 1.0, 1.1] {
        let s = gamma_at(&nf, v, t, 4, GammaForm::Simplified).unwrap();
        let f = gamma_at(&nf, v, t, 4, GammaForm::Full).unwrap();
        assert!((s - amp(v)).norm() < 0.05 * amp(v).norm(), "v={v}: {s} vs {}", amp(v));
        assert!((f - s).norm() < 0.1 * s.norm(), "v={v}: full {f} simplified {s}");
    }
}

#[test]
fn probe_agrees_with_parseval_pairing() {
    let g = grid();
    let t = 400.0;
    let nf = ansatz_state(|v| C64::new((-((v - 1.0) / 0.3).powi(2)).exp(), 0.0), t, &g);
    let p = build_packet(1.0, t, &g).unwrap();
    let a = gamma_simplified(&nf, &p).unwrap();
    let b = gamma_at(&nf, 1.0, t, 8, GammaForm::Simplified).unwrap();
    assert!((a - b).norm() < 1e-3 * b.norm());
    let other = Grid::with(2048, 1024.0, 2.0 / 3.0).unwrap();
    let p2 = build_packet(1.0, t, &other).unwrap();
    assert!(matches!(gamma_functional(&nf, &p2), Err(Error::GridMismatch)));
}

fn synthetic_series(psi: impl Fn(f64) -> C64, ts: &[f64], vs: &[f64]) -> GammaSeries {
    let gamma = ts
        .iter()
        .map(|&t| {
            vs.iter()
                .map(|&v| {
                    let p = psi(v);
                    Some(p * (I * ode_coefficient(v) * p.norm_sqr() * t.ln()).exp())
                })
                .collect()
        })
        .collect();
    GammaSeries { v_grid: vs.to_vec(), t_samples: ts.to_vec(), gamma, sigma: vec![], psi: vec![] }
}

#[test]
fn exact_ode_solution_has_small_residual_and_constant_profile() {
    let ts = t_samples(100.0, 1000.0, 1.02);
    let vs = geomspace(0.7, 1.4, 9);
    let psi = |v: f64| C64::new(0.8, -0.3) * v;
    let gs = ode_residual(&synthetic_series(psi, &ts, &vs));
    assert!(gs.sigma[0].iter().all(|s| s.is_none()));
    for (t, s) in sigma_sup(&gs) {
        // centered difference on a geometric grid: error O((ratio−1)² / t)
        assert!(s < 1e-3 / t, "t={t} sup sigma {s}");
    }
    let prof = extract_profile(&gs).unwrap();
    for (p, &v) in prof.psi.iter().zip(&vs) {
        assert!((p.unwrap() - psi(v)).norm() < 1e-12);
    }
    assert!(prof.discrepancy < 1e-12);
    let j = nearest_index(&vs, 1.0);
    let (slope, _) = phase_slope(&gs, j, 0.0).unwrap();
    assert!((slope / predicted_phase_rate(vs[j], psi(vs[j])) - 1.0).abs() < 1e-9);
}

#[test]
fn unstable_profile_is_refused() {
    let ts = t_samples(100.0, 1000.0, 1.1);
    let vs = vec![1.0];
    let mut gs = synthetic_series(|_| C64::new(1.0, 0.0), &ts, &vs);
    let last = ts.len() - 1;
    gs.gamma[last][0] = Some(C64::new(2.0, 0.0));
    assert!(matches!(extract_profile(&gs), Err(Error::ProfileUnstable(_))));
}

#[test]
fn asymptotic_field_decays_like_inverse_sqrt_t() {
    let g = Grid::with(8192, 4096.0, 2.0 / 3.0).unwrap();
    let pf = ProfileFn { v: vec![0.8, 1.2], psi: vec![C64::new(1.0, 0.0); 2] };
    let (w1, q1) = asymptotic_eval(&pf, 100.0, &g);
    let (w4, _) = asymptotic_eval(&pf, 400.0, &g);
    assert!((w1.max_abs() / w4.max_abs() - 2.0).abs() < 1e-12);
    assert!((w1.max_abs() - 0.1).abs() < 1e-12);
    // Q carries the factor 2α/t
    let j = g.alpha().iter().position(|&a| a >= 100.0).unwrap();
    let a = g.alpha()[j];
    assert!((q1.values()[j] - w1.values()[j] * (2.0 * a / 100.0)).norm() < 1e-14);
    assert_eq!(pf.eval(0.5), C64::new(0.0, 0.0));
    assert_eq!(pf.eval(1.0), C64::new(1.0, 0.0));
}

#[test]
fn negative_velocity_packet() {
    let (v, t) = (-1.0, 100.0);
    let g = Grid::with(2048, 512.0, 2.0 / 3.0).unwrap();
    let p = build_packet(v, t, &g).unwrap();
    // centered at α = vt with the same |v| scaling
    let pc = packet_point(v, t, v * t);
    assert!((pc.u.norm() - chi(0.0)).abs() < 1e-14);
    assert_eq!(packet_point(v, t, v * t - 1.01 * packet_halfwidth(v, t)).u, C64::new(0.0, 0.0));
    let (k, _) = p
        .u
        .coeffs()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
        .unwrap();
    assert!((g.xi()[k] - packet_frequency(v)).abs() < 0.05, "peak at {}", g.xi()[k]);
}

#[test]
fn inadmissible_packets_are_refused() {
    let g = grid();
    assert!(matches!(build_packet(1.0, 0.5, &g), Err(Error::DomainOverflow(_))));
    assert!(matches!(build_packet(3.0, 10.0, &g), Err(Error::DomainOverflow(_))));
    assert!(matches!(build_packet(1.0, 600.0, &g), Err(Error::DomainOverflow(_))));
    assert!(in_omega(1.0, 10.0) && !in_omega(0.5, 10.0));
}

#[test]
fn sample_grids() {
    let ts = t_samples(10.0, 100.0, 1.5);
    assert_eq!(ts[0], 10.0);
    assert_eq!(*ts.last().unwrap(), 100.0);
    assert!(ts.windows(2).all(|w| w[1] > w[0]));
    let vs = v_grid(40.0, 400.0, 5);
    assert_eq!(vs.len(), 5);
    assert!((vs[0] - 40f64.powf(-1.0 / 9.0)).abs() < 1e-14);
    assert!((vs[4] - 400f64.powf(1.0 / 9.0)).abs() < 1e-12);
    assert!(geomspace(1.0, 2.0, 0).is_empty());
}

use std::sync::Arc;

use holoww::diagnostics::{energy, weighted_energy};
use holoww::spectral::{derivative, Grid, SpectralField, C64, I};
use holoww::waterwave::*;
use holoww::Error;

fn grid() -> Arc<Grid> {
    Grid::with(512, 256.0, 2.0 / 3.0).unwrap()
}

fn packet(amp: f64) -> WaterState {
    make_peak_data(amp, 2.0, 0.25, &grid())
}

fn pair_diff(a: &WaterState, b: &WaterState) -> f64 {
    let d = |x: &SpectralField, y: &SpectralField| x.sub(y).max_abs();
    d(&a.w, &b.w).max(d(&a.q, &b.q))
}

#[test]
fn propagator_matches_the_linear_ode() {
    // d/dt (Ŵ, Q̂) = (−iξQ̂, iŴ) checked by a centered difference of the closed form
    let g = Grid::with(16, 2.0 * std::f64::consts::PI, 1.0).unwrap();
    let wh: Vec<C64> = (0..16).map(|k| C64::new(0.1 * k as f64, -0.05)).collect();
    let qh: Vec<C64> = (0..16).map(|k| C64::new(0.02, 0.03 * k as f64)).collect();
    let (t, h) = (0.7, 1e-5);
    let (w0, q0) = propagate_coeffs(&g, &wh, &qh, t);
    let (wp, qp) = propagate_coeffs(&g, &wh, &qh, t + h);
    let (wm, qm) = propagate_coeffs(&g, &wh, &qh, t - h);
    for k in 0..16 {
        let x = g.xi()[k];
        let dw = (wp[k] - wm[k]) / (2.0 * h);
        let dq = (qp[k] - qm[k]) / (2.0 * h);
        assert!((dw - (-I * x * q0[k])).norm() < 1e-6 * (1.0 + w0[k].norm()), "k={k}");
        assert!((dq - I * w0[k]).norm() < 1e-6 * (1.0 + q0[k].norm()), "k={k}");
    }
}

#[test]
fn propagator_is_a_group() {
    let s = packet(0.1);
    let a = linear_propagator(&linear_propagator(&s, 3.0), 4.5);
    let b = linear_propagator(&s, 7.5);
    assert!(pair_diff(&a, &b) < 1e-13);
    let back = linear_propagator(&b, -7.5);
    assert!(pair_diff(&back, &s) < 1e-13);
    assert_eq!(b.time, 7.5);
}

#[test]
fn zero_state_stays_zero() {
    let s = WaterState::zero(&grid());
    let mut st = Stepper::new(s, 0.1, DEFAULT_CHORD_ARC_FLOOR);
    st.advance_to(2.0).unwrap();
    assert_eq!(st.state.w.max_abs(), 0.0);
    assert_eq!(st.state.q.max_abs(), 0.0);
    assert_eq!(st.state.time, 2.0);
}

#[test]
fn small_data_follow_the_linear_flow() {
    let s = packet(1e-7);
    let mut st = Stepper::new(s.clone(), 0.1, DEFAULT_CHORD_ARC_FLOOR);
    st.advance_to(5.0).unwrap();
    let lin = linear_propagator(&s, 5.0);
    // nonlinear effects are O(amp²) relative to O(amp)
    assert!(pair_diff(&st.state, &lin) < 1e-12);
}

#[test]
fn energy_is_conserved() {
    let s = packet(0.2);
    let e0 = energy(&s.w, &s.q);
    let mut st = Stepper::new(s, 0.1, DEFAULT_CHORD_ARC_FLOOR);
    st.advance_to(20.0).unwrap();
    let e1 = energy(&st.state.w, &st.state.q);
    assert!(((e1 - e0) / e0).abs() < 1e-6, "drift {}", (e1 - e0) / e0);
}

#[test]
fn stepper_is_fourth_order() {
    let s = packet(0.3);
    let run = |dt: f64| {
        let mut st = Stepper::new(s.clone(), dt, DEFAULT_CHORD_ARC_FLOOR);
        st.advance_to(4.0).unwrap();
        st.state
    };
    let r = run(0.0125);
    let e1 = pair_diff(&run(0.2), &r);
    let e2 = pair_diff(&run(0.1), &r);
    let order = (e1 / e2).log2();
    assert!(order > 3.6 && order < 4.6, "order {order}");
}

#[test]
fn advance_hits_sample_times_exactly() {
    let mut st = Stepper::new(packet(0.1), 0.15, DEFAULT_CHORD_ARC_FLOOR);
    st.advance_to(1.0).unwrap();
    assert_eq!(st.state.time, 1.0);
    assert_eq!(st.steps_taken, 7);
}

#[test]
fn chord_arc_violation_is_reported() {
    // W = a e^{-iα}: min |1 + W_α| = 1 − a
    let g = Grid::with(32, 2.0 * std::f64::consts::PI, 2.0 / 3.0).unwrap();
    let w = SpectralField::from_fn(&g, |x| 0.8 * (-I * x).exp());
    let s = WaterState::new(0.0, holoww::spectral::project_dealias(&w), SpectralField::zeros(&g)).unwrap();
    assert!((s.chord_arc_min() - 0.2).abs() < 1e-12);
    match s.check(DEFAULT_CHORD_ARC_FLOOR) {
        Err(Error::ChordArcViolation { min, floor }) => assert!(min <= floor),
        other => panic!("expected a chord-arc violation, got {other:?}"),
    }
    assert!(step(&s, 0.1).unwrap_err().is_breakdown());
}

#[test]
fn non_finite_values_are_reported() {
    let g = grid();
    let mut wh = packet(0.1).w.coeffs().to_vec();
    wh[g.n() - 3] = C64::new(f64::NAN, 0.0);
    let s = WaterState::from_coeffs(&g, 1.5, wh, vec![C64::new(0.0, 0.0); g.n()]);
    assert!(matches!(s.check(0.5), Err(Error::NaNDetected { time }) if time == 1.5));
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let mut st = Stepper::new(packet(0.2), 0.1, DEFAULT_CHORD_ARC_FLOOR);
    st.advance_to(1.3).unwrap();
    let mut buf = Vec::new();
    st.state.write_checkpoint(&mut buf).unwrap();
    let back = WaterState::read_checkpoint(&mut buf.as_slice(), &grid()).unwrap();
    assert_eq!(back.time.to_bits(), st.state.time.to_bits());
    assert_eq!(back.w.coeffs(), st.state.w.coeffs());
    assert_eq!(back.q.coeffs(), st.state.q.coeffs());
    // continuing from the copy is bitwise identical
    let a = step(&st.state, 0.1).unwrap();
    let b = step(&back, 0.1).unwrap();
    assert_eq!(a.w.coeffs(), b.w.coeffs());
}

#[test]
fn nonlinear_rhs_is_quadratic() {
    let size = |amp: f64| {
        let s = packet(amp);
        let (dw, dq) = rhs_wq(&s).unwrap();
        let lw = derivative(&s.q).scale(C64::new(-1.0, 0.0));
        let lq = s.w.scale(I);
        dw.sub(&lw).l2_norm() + dq.sub(&lq).l2_norm()
    };
    let p = (size(0.02) / size(0.01)).log2();
    assert!((p - 2.0).abs() < 0.05, "exponent {p}");
}

#[test]
fn localized_data_has_the_requested_size() {
    let g = Grid::with(1024, 256.0, 2.0 / 3.0).unwrap();
    for eps in [1e-3, 1e-2, 3e-2] {
        let s = make_localized_data(eps, 2.0, &g).unwrap();
        let size = weighted_energy(&s).unwrap().sqrt();
        assert!((size / eps - 1.0).abs() < 1e-8, "eps {eps} size {size}");
        assert!(s.w.is_holomorphic() && s.q.is_holomorphic());
    }
    assert_eq!(make_localized_data(0.0, 2.0, &g).unwrap().w.max_abs(), 0.0);
    assert!(matches!(make_localized_data(-1.0, 2.0, &g), Err(Error::InfeasibleData(_))));
    assert!(matches!(make_localized_data(0.01, 0.0, &g), Err(Error::InfeasibleData(_))));
}

#[test]
fn peak_data_has_the_requested_peak() {
    let s = packet(0.3);
    assert!((s.w.values().iter().map(|z| z.norm()).fold(0.0, f64::max) - 0.3).abs() < 1e-3);
    assert!(dt_max(s.grid()) > 0.1);
}

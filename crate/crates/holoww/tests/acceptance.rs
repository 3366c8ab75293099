//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary
//! (harness = false) so the lines come out in order and unbuffered.
//!
//! Criterion 7 is reported but not asserted; see the README.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use holoww::diagnostics::{energy, x_norm};
use holoww::harness::config::ExperimentConfig;
use holoww::harness::experiments::{cmd_run, null_check, packet_report, packet_run, run_sweep, PacketReport};
use holoww::harness::fit::{linear_fit, loglog_fit};
use holoww::harness::oracle::{run_oracles, Faults};
use holoww::normalform::to_normal_form;
use holoww::packets::{gamma_at, geomspace, GammaForm};
use holoww::spectral::{Grid, GridSpec, C64, I};
use holoww::waterwave::{make_localized_data_with, make_peak_data, propagate_coeffs, Stepper, WaterState};

struct Outcome {
    pass: bool,
    asserted: bool,
    detail: String,
}

fn report(n: usize, title: &str, o: &Outcome) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    let note = if o.asserted { "" } else { " (reported, not asserted)" };
    println!("criterion {n:>2} {tag} {title}: {}{note}", o.detail);
}

fn c1() -> Outcome {
    let r = run_oracles(32, 7, Faults::default());
    let worst = r.checks.iter().map(|c| c.error).fold(0.0, f64::max);
    Outcome {
        pass: r.pass && r.elapsed_s < 1.0,
        asserted: true,
        detail: format!("{} checks, worst error {worst:.2e}, {:.3} s", r.checks.len(), r.elapsed_s),
    }
}

fn c2() -> Outcome {
    // one mode at a time on the 2π torus, at ξ = −4, −1, 0, +1
    let g = Grid::with(16, 2.0 * PI, 1.0).unwrap();
    let n = g.n();
    let mut worst = 0.0f64;
    for (k, w0, q0) in [(n - 4, 0.7, 0.2), (n - 1, 1.0, 0.0), (n - 1, 0.0, 1.0), (0, 0.3, -0.4), (1, 0.5, 0.25)] {
        let x = g.xi()[k];
        let (w0, q0) = (C64::new(w0, 0.0), C64::new(q0, 0.1));
        let mut wh = vec![C64::new(0.0, 0.0); n];
        let mut qh = wh.clone();
        wh[k] = w0;
        qh[k] = q0;
        for t in geomspace(0.01, 100.0, 40).into_iter().chain([0.0]) {
            let (w, q) = propagate_coeffs(&g, &wh, &qh, t);
            let (we, qe) = if x < 0.0 {
                let om = (-x).sqrt();
                let (s, c) = (om * t).sin_cos();
                (c * w0 + I * om * s * q0, I * s / om * w0 + c * q0)
            } else if x == 0.0 {
                (w0, q0 + I * t * w0)
            } else {
                let kap = x.sqrt();
                let (s, c) = ((kap * t).sinh(), (kap * t).cosh());
                (c * w0 - I * kap * s * q0, I * s / kap * w0 + c * q0)
            };
            let scale = we.norm().max(qe.norm()).max(1.0);
            worst = worst.max((w[k] - we).norm() / scale).max((q[k] - qe).norm() / scale);
            // every other mode stays exactly zero
            let leak = w.iter().chain(&q).enumerate().filter(|(j, _)| j % n != k).map(|(_, z)| z.norm()).fold(0.0, f64::max);
            worst = worst.max(leak);
        }
    }
    Outcome { pass: worst <= 1e-12, asserted: true, detail: format!("max relative error {worst:.2e} over t in [0, 100]") }
}

fn c3() -> Outcome {
    let cfg = ExperimentConfig::default();
    let dir = tempfile::tempdir().unwrap();
    let t0 = Instant::now();
    match cmd_run(&cfg, dir.path(), None) {
        Ok(s) => Outcome {
            pass: s.energy_drift <= 1e-6,
            asserted: true,
            detail: format!(
                "N = {}, eps = {}, t = {}: drift {:.2e} ({:.1} s)",
                cfg.grid.n_points,
                cfg.eps,
                s.final_time,
                s.energy_drift,
                t0.elapsed().as_secs_f64()
            ),
        },
        Err(e) => Outcome { pass: false, asserted: true, detail: format!("run failed: {e}") },
    }
}

fn c4() -> Outcome {
    let cfg = ExperimentConfig {
        grid: GridSpec { n_points: 256, length: 64.0, dealias_fraction: 2.0 / 3.0 },
        width: 1.0,
        carrier: 1.0,
        t_max: 0.0,
        ..ExperimentConfig::default()
    };
    match run_sweep(&cfg) {
        Ok(r) => Outcome {
            pass: r.nf_residual_cubic && r.nf_quartic_ok,
            asserted: true,
            detail: format!(
                "residual exponent {:.3}, quartic exponent {:.3} over eps {:?}",
                r.exponents.nf_residual.value.unwrap_or(f64::NAN),
                r.exponents.nf_quartic.value.unwrap_or(f64::NAN),
                cfg.eps_list
            ),
        },
        Err(e) => Outcome { pass: false, asserted: true, detail: format!("sweep failed: {e}") },
    }
}

fn c5() -> Outcome {
    let g = Grid::with(8192, 256.0, 2.0 / 3.0).unwrap();
    let s0 = make_localized_data_with(0.01, 0.125, 8.0, &g, 0.5).unwrap();
    let mut st = Stepper::new(s0, 0.04, 0.5);
    let ts = geomspace(10.0, 200.0, 14);
    let mut ys = Vec::new();
    for &t in &ts {
        if let Err(e) = st.advance_to(t) {
            return Outcome { pass: false, asserted: true, detail: format!("breakdown at t = {t}: {e}") };
        }
        ys.push(t.sqrt() * x_norm(&st.state).unwrap());
    }
    let ratio = ys.iter().map(|y| y / ys[0]).fold(0.0, f64::max);
    let slope = loglog_fit(&ts, &ys).map_or(f64::NAN, |f| f.slope);
    Outcome {
        pass: ratio <= 2.0 && slope <= 0.05,
        asserted: true,
        detail: format!("max ratio to t = 10 {ratio:.3}, log-log slope {slope:+.3}"),
    }
}

fn packet_cfg() -> ExperimentConfig {
    ExperimentConfig {
        grid: GridSpec { n_points: 4096, length: 4096.0, dealias_fraction: 2.0 / 3.0 },
        amplitude: Some(0.3),
        width: 2.0,
        carrier: 0.25,
        dt: 0.2,
        t_max: 400.0,
        packet_t_min: 40.0,
        ..ExperimentConfig::default()
    }
}

fn c6(r: &PacketReport) -> Outcome {
    let slope = r.sigma_slope.unwrap_or(f64::NAN);
    let drift = r.rays.iter().find(|x| x.v == 1.0).and_then(|x| x.modulus_drift_per_decade).unwrap_or(f64::NAN);
    Outcome {
        pass: slope <= -0.9 && drift.abs() <= 0.05,
        asserted: true,
        detail: format!(
            "sigma slope {slope:.3} on [{}, {}], |gamma| drift at v = 1 {:+.2}% per decade",
            r.sigma_window[0],
            r.sigma_window[1],
            100.0 * drift
        ),
    }
}

// later window for the phase check; about 25 minutes on one core, so opt-in
fn long_packet_cfg() -> ExperimentConfig {
    ExperimentConfig {
        grid: GridSpec { n_points: 65536, length: 65536.0, dealias_fraction: 2.0 / 3.0 },
        t_max: 4000.0,
        packet_t_min: 400.0,
        ..packet_cfg()
    }
}

fn c7(r: &PacketReport) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for ray in &r.rays {
        let q = ray.ratio.unwrap_or(f64::NAN);
        pass &= (q - 1.0).abs() <= 0.2;
        parts.push(format!(
            "v = {}: ratio {q:.2} (linear-referenced {:.2})",
            ray.v,
            ray.linear_referenced_ratio.unwrap_or(f64::NAN)
        ));
    }
    Outcome { pass, asserted: false, detail: parts.join("; ") }
}

fn c8(r: &PacketReport) -> Outcome {
    Outcome {
        pass: r.profile_unstable.is_none() && r.profile_modulus_mismatch <= 0.05,
        asserted: true,
        detail: format!(
            "max ||Psi(T)|/|Psi(T/2)| - 1| on [0.7, 1.4] = {:.2}% (T/2 sample t = {:.1})",
            100.0 * r.profile_modulus_mismatch,
            r.profile_t_half
        ),
    }
}

fn c9() -> Outcome {
    // temporal: dt-halving against a fine reference
    let g = Grid::with(2048, 1024.0, 2.0 / 3.0).unwrap();
    let s0 = make_peak_data(0.3, 2.0, 0.25, &g);
    let run = |dt: f64| -> WaterState {
        let mut st = Stepper::new(s0.clone(), dt, 0.1);
        st.advance_to(10.0).unwrap();
        st.state
    };
    let reference = run(0.0125);
    let dts = [0.4, 0.2, 0.1];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let s = run(dt);
            s.w.sub(&reference.w).max_abs().max(s.q.sub(&reference.q).max_abs())
        })
        .collect();
    let lx: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let order = linear_fit(&lx, &ly).map_or(f64::NAN, |f| f.slope);

    // spatial: N vs 2N, γ evaluated on the same fine grid
    let at = |n: usize, refine: usize| -> (f64, C64) {
        let g = Grid::with(n, 1024.0, 2.0 / 3.0).unwrap();
        let s0 = make_peak_data(0.3, 2.0, 0.25, &g);
        let e0 = energy(&s0.w, &s0.q);
        let mut st = Stepper::new(s0, 0.2, 0.5);
        st.advance_to(100.0).unwrap();
        (e0, gamma_at(&to_normal_form(&st.state), 1.0, 100.0, refine, GammaForm::Simplified).unwrap())
    };
    let (e1, g1) = at(4096, 8);
    let (e2, g2) = at(8192, 4);
    let de = ((e1 - e2) / e2).abs();
    let dg = (g1 - g2).norm() / g2.norm();
    Outcome {
        pass: (order - 4.0).abs() <= 0.3 && de <= 1e-9 && dg <= 1e-9,
        asserted: true,
        detail: format!(
            "order {order:.2} (dt = 0.4, 0.2, 0.1); N = 4096 vs 8192: E(0) {de:.1e}, gamma(100, 1) {dg:.1e}"
        ),
    }
}

fn c10() -> Outcome {
    match null_check(1) {
        Ok(r) => Outcome {
            pass: r.ansatz_ratio <= 0.1,
            asserted: true,
            detail: format!(
                "ansatz null/generic {:.3} (forms {:.3}, {:.3}, {:.3}); random baseline {:.2}",
                r.ansatz_ratio, r.ansatz_ratios[0], r.ansatz_ratios[1], r.ansatz_ratios[2], r.random_ratio
            ),
        },
        Err(e) => Outcome { pass: false, asserted: true, detail: format!("null check failed: {e}") },
    }
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags through; only listing needs an answer
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut check = |n: usize, title: &str, o: Outcome| {
        report(n, title, &o);
        if o.asserted && !o.pass {
            failed.push(n);
        }
    };
    check(1, "oracle suite", c1());
    check(2, "linear propagator", c2());
    check(3, "energy conservation", c3());
    check(4, "normal form exponents", c4());
    check(5, "pointwise decay", c5());

    let packets = packet_run(&packet_cfg(), false).map(|run| packet_report(&run));
    match &packets {
        Ok(r) => {
            check(6, "gamma ODE residual", c6(r));
            check(7, "modified scattering phase", c7(r));
            check(8, "profile stability", c8(r));
        }
        Err(e) => {
            for (n, title) in [(6, "gamma ODE residual"), (7, "modified scattering phase"), (8, "profile stability")] {
                check(n, title, Outcome { pass: false, asserted: n != 7, detail: format!("packet run failed: {e}") });
            }
        }
    }
    if std::env::var_os("HOLOWW_LONG").is_some() {
        let o = match packet_run(&long_packet_cfg(), false) {
            Ok(run) => c7(&packet_report(&run)),
            Err(e) => Outcome { pass: false, asserted: false, detail: format!("packet run failed: {e}") },
        };
        check(7, "modified scattering phase, window [400, 4000]", o);
    }
    check(9, "self-convergence", c9());
    check(10, "null-form suppression", c10());

    println!("acceptance finished in {:.1} s", start.elapsed().as_secs_f64());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("asserted criteria failed: {failed:?}");
        ExitCode::FAILURE
    }
}

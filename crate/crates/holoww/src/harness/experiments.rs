//! The experiments behind each subcommand. Every function here writes its
//! artifacts into `out` and returns the same report it serialized.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagnostics::{energy, pair_hn_sq, weighted_energy_with, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, Workload};
use crate::harness::fit::{linear_fit, loglog_fit, unwrap_phase};
use crate::harness::io::{write_atomic, write_csv, write_json, CsvAppender, RunManifest};
use crate::normalform::{
    cubic_sources_from, cubic_total_from, null_forms, nf_residual_with, pair_size, to_normal_form,
};
use crate::packets::{
    self, ansatz_state, asymptotic_eval, eval_at, extract_profile, g3r_prediction, gamma_series_with, in_omega,
    ode_residual, pactest_error, profile_at, GammaForm, GammaSeries, ProfileFn,
};
use crate::par;
use crate::spectral::{derivative, Grid, SpectralField, C64};
use crate::waterwave::{
    linear_propagator, make_localized_data_with, make_peak_data, rhs_wq_with, Stepper, WaterState,
};

/// Initial data as configured: peak amplitude if given, else weighted-energy size.
pub fn initial_state(cfg: &ExperimentConfig) -> Result<WaterState> {
    let grid = Grid::new(cfg.grid).map_err(|e| Error::ConfigRefused(e.to_string()))?;
    initial_state_on(cfg, &grid)
}

pub fn initial_state_on(cfg: &ExperimentConfig, grid: &Arc<Grid>) -> Result<WaterState> {
    let s = match cfg.amplitude {
        Some(a) => make_peak_data(a, cfg.width, cfg.carrier, grid),
        None => make_localized_data_with(cfg.eps, cfg.width, cfg.carrier, grid, cfg.chord_arc_floor)?,
    };
    s.check(cfg.chord_arc_floor).map_err(|e| Error::InfeasibleData(e.to_string()))?;
    Ok(s)
}

// ---------------------------------------------------------------- run

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub status: String,
    pub final_time: f64,
    pub rows: usize,
    pub energy_drift: f64,
    pub energy_tol: f64,
    pub steps: u64,
}

pub const DIAG_FILE: &str = "diagnostics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const FINAL_CHECKPOINT_FILE: &str = "checkpoint_final.bin";

fn sample_times(cfg: &ExperimentConfig) -> Vec<f64> {
    let k = (cfg.t_max / cfg.sample_cadence).round() as usize;
    let mut ts: Vec<f64> = (0..=k).map(|i| i as f64 * cfg.sample_cadence).filter(|&t| t < cfg.t_max).collect();
    ts.push(cfg.t_max);
    ts
}

fn save_checkpoint(path: &Path, s: &WaterState) -> Result<()> {
    let mut buf = Vec::new();
    s.write_checkpoint(&mut buf).map_err(|e| Error::io("serialize checkpoint", e))?;
    write_atomic(path, &buf)
}

pub fn load_checkpoint(path: &Path, cfg: &ExperimentConfig) -> Result<WaterState> {
    let grid = Grid::new(cfg.grid).map_err(|e| Error::ConfigRefused(e.to_string()))?;
    let bytes = fs::read(path).map_err(|e| Error::io(format!("read {}", path.display()), e))?;
    WaterState::read_checkpoint(&mut bytes.as_slice(), &grid)
}

/// Keep the CSV rows at or before `t`; returns (kept row count, energy of the first row).
fn truncate_diagnostics(path: &Path, t: f64) -> Result<(usize, Option<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("read {}", path.display()), e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or(DiagnosticsRecord::csv_header());
    let mut out = String::from(header);
    out.push('\n');
    let mut kept = 0;
    let mut e0 = None;
    for l in lines {
        let mut it = l.split(',');
        let time: f64 = match it.next().and_then(|x| x.parse().ok()) {
            Some(x) => x,
            None => break,
        };
        if time > t {
            break;
        }
        if kept == 0 {
            e0 = it.nth(1).and_then(|x| x.parse().ok());
        }
        out.push_str(l);
        out.push('\n');
        kept += 1;
    }
    write_atomic(path, out.as_bytes())?;
    Ok((kept, e0))
}

/// Step to t_max writing diagnostics every `sample_cadence` and a checkpoint
/// every `checkpoint_every`. On breakdown the last good state is saved before
/// the error is returned.
pub fn cmd_run(cfg: &ExperimentConfig, out: &Path, resume: Option<&Path>) -> Result<RunSummary> {
    cfg.validate(Workload::Flow)?;
    crate::harness::io::ensure_dir(out)?;
    write_atomic(&out.join("config.txt"), cfg.to_text().as_bytes())?;
    let diag_path = out.join(DIAG_FILE);
    let (state, mut csv, mut rows, mut e0) = match resume {
        Some(p) => {
            let s = load_checkpoint(p, cfg)?;
            if !diag_path.exists() {
                return Err(Error::Checkpoint(format!("no {DIAG_FILE} in {} to continue", out.display())));
            }
            let (kept, e0) = truncate_diagnostics(&diag_path, s.time)?;
            (s, CsvAppender::append_to(&diag_path)?, kept, e0)
        }
        None => (initial_state(cfg)?, CsvAppender::create(&diag_path, DiagnosticsRecord::csv_header())?, 0, None),
    };
    let start = state.time;
    let ckpt_stride = ((cfg.checkpoint_every / cfg.sample_cadence).round() as usize).max(1);
    let mut stepper = Stepper::new(state, cfg.dt, cfg.chord_arc_floor);
    let mut manifest = RunManifest::new(cfg.hash());
    let mut drift = 0.0f64;
    let files = ["config.txt", DIAG_FILE, CHECKPOINT_FILE, FINAL_CHECKPOINT_FILE];
    for (i, &t) in sample_times(cfg).iter().enumerate() {
        if t < start || (t == start && rows > 0) {
            continue;
        }
        let step = stepper.advance_to(t).and_then(|_| DiagnosticsRecord::compute(&stepper.state, cfg.chord_arc_floor));
        let rec = match step {
            Ok(r) => r,
            Err(e) => {
                save_checkpoint(&out.join(FINAL_CHECKPOINT_FILE), &stepper.state)?;
                manifest.stage("run", if e.is_breakdown() { "breakdown" } else { "error" });
                manifest.finish(out, &files)?;
                return Err(e);
            }
        };
        let e0v = *e0.get_or_insert(rec.e);
        if e0v != 0.0 {
            drift = drift.max(((rec.e - e0v) / e0v).abs());
        }
        csv.row(&rec.csv_row())?;
        rows += 1;
        if i % ckpt_stride == 0 || t == cfg.t_max {
            save_checkpoint(&out.join(CHECKPOINT_FILE), &stepper.state)?;
        }
    }
    manifest.stage("run", "ok");
    manifest.finish(out, &files)?;
    let summary = RunSummary {
        status: "ok".into(),
        final_time: stepper.state.time,
        rows,
        energy_drift: drift,
        energy_tol: cfg.energy_tol,
        steps: stepper.steps_taken,
    };
    write_json(&out.join("run_summary.json"), &summary)?;
    Ok(summary)
}

/// Parse a diagnostics CSV back into rows of numbers.
pub fn read_diagnostics(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("read {}", path.display()), e))?;
    Ok(text
        .lines()
        .skip(1)
        .map(|l| l.split(',').filter_map(|x| x.parse().ok()).collect())
        .collect())
}

// ---------------------------------------------------------------- sweep / nf-check

#[derive(Clone, Debug, Serialize)]
pub struct Exponent {
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub note: Option<String>,
}

impl Exponent {
    pub fn fit(eps: &[f64], y: &[f64]) -> Self {
        if eps.len() < 2 {
            return Exponent { value: None, stderr: None, note: Some("insufficient points".into()) };
        }
        match loglog_fit(eps, y) {
            Some(f) => Exponent {
                value: Some(f.slope),
                stderr: f.slope_stderr.is_finite().then_some(f.slope_stderr),
                note: None,
            },
            None => Exponent { value: None, stderr: None, note: Some("degenerate data".into()) },
        }
    }

    pub fn within(&self, target: f64, tol: f64) -> bool {
        self.value.map_or(false, |v| (v - target).abs() <= tol)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub peak_w: f64,
    /// ‖rhs − linear part‖, expected quadratic.
    pub rhs_quadratic: f64,
    /// ‖(W̃ − W, Q̃ − Q)‖, expected quadratic.
    pub nf_deviation: f64,
    /// ‖(G̃, K̃)‖ from the flow, expected cubic.
    pub nf_residual: f64,
    /// ‖(G̃, K̃) − cubic sources at (W̃, Q̃_α)‖, expected quartic.
    pub nf_quartic: f64,
    /// ‖cubic sources‖, expected cubic.
    pub cubic_sources: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepExponents {
    pub rhs_quadratic: Exponent,
    pub nf_deviation: Exponent,
    pub nf_residual: Exponent,
    pub nf_quartic: Exponent,
    pub cubic_sources: Exponent,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub exponents: SweepExponents,
    pub nf_residual_cubic: bool,
    pub nf_quartic_ok: bool,
    pub rhs_quadratic_ok: bool,
}

pub fn sweep_point(cfg: &ExperimentConfig, grid: &Arc<Grid>, eps: f64) -> Result<SweepPoint> {
    let c = ExperimentConfig { eps, amplitude: None, ..cfg.clone() };
    let s = initial_state_on(&c, grid)?;
    let (dw, dq) = rhs_wq_with(&s, cfg.chord_arc_floor)?;
    let lin_w = derivative(&s.q).scale(C64::new(-1.0, 0.0));
    let lin_q = s.w.scale(crate::spectral::I);
    let rhs_quadratic = pair_size(&dw.sub(&lin_w), &dq.sub(&lin_q));
    let nf = to_normal_form(&s);
    let nf_deviation = pair_size(&nf.wt.sub(&s.w), &nf.qt.sub(&s.q));
    let (g, k) = nf_residual_with(&s, cfg.dt_probe, cfg.probe_substeps, cfg.chord_arc_floor)?;
    let cs = cubic_sources_from(&nf.wt, &derivative(&nf.qt));
    let (g3, k3) = (cs.g_total(), cs.k_total());
    Ok(SweepPoint {
        eps,
        peak_w: s.w.max_abs(),
        rhs_quadratic,
        nf_deviation,
        nf_residual: pair_size(&g, &k),
        nf_quartic: pair_size(&g.sub(&g3), &k.sub(&k3)),
        cubic_sources: pair_size(&g3, &k3),
    })
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate(Workload::Flow)?;
    let grid = Grid::new(cfg.grid).map_err(|e| Error::ConfigRefused(e.to_string()))?;
    let points: Vec<SweepPoint> =
        par::map(&cfg.eps_list, |&e| sweep_point(cfg, &grid, e)).into_iter().collect::<Result<_>>()?;
    let eps: Vec<f64> = points.iter().map(|p| p.eps).collect();
    let col = |f: fn(&SweepPoint) -> f64| -> Vec<f64> { points.iter().map(f).collect() };
    let exponents = SweepExponents {
        rhs_quadratic: Exponent::fit(&eps, &col(|p| p.rhs_quadratic)),
        nf_deviation: Exponent::fit(&eps, &col(|p| p.nf_deviation)),
        nf_residual: Exponent::fit(&eps, &col(|p| p.nf_residual)),
        nf_quartic: Exponent::fit(&eps, &col(|p| p.nf_quartic)),
        cubic_sources: Exponent::fit(&eps, &col(|p| p.cubic_sources)),
    };
    Ok(SweepReport {
        nf_residual_cubic: exponents.nf_residual.within(3.0, 0.3),
        nf_quartic_ok: exponents.nf_quartic.within(4.0, 0.5),
        rhs_quadratic_ok: exponents.rhs_quadratic.within(2.0, 0.2),
        points,
        exponents,
    })
}

pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<SweepReport> {
    let report = run_sweep(cfg)?;
    crate::harness::io::ensure_dir(out)?;
    write_json(&out.join("sweep.json"), &report)?;
    let mut m = RunManifest::new(cfg.hash());
    m.stage("sweep", "ok");
    m.finish(out, &["sweep.json"])?;
    Ok(report)
}

/// Random holomorphic field with modes |k| ≤ kmax (in index units).
pub fn random_holomorphic(grid: &Arc<Grid>, rng: &mut ChaCha8Rng, kmax: usize, amp: f64) -> SpectralField {
    let n = grid.n();
    let mut c = vec![C64::new(0.0, 0.0); n];
    for k in 0..=kmax.min(n / 2 - 1) {
        let slot = if k == 0 { 0 } else { n - k };
        c[slot] = C64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp));
    }
    SpectralField::holomorphic_from_coeffs(grid, c)
}

#[derive(Clone, Debug, Serialize)]
pub struct NullCheck {
    pub ansatz_ratio: f64,
    pub ansatz_ratios: [f64; 3],
    pub random_ratio: f64,
    /// |G3r(vt) − i t^{-3/2}(2v)^{-5}e^{iφ}γ|γ|²| / |prediction| at v = 1.
    pub g3r_center_rel_err: f64,
}

/// Null forms and G3r on the single-packet asymptotic ansatz.
pub fn null_check(seed: u64) -> Result<NullCheck> {
    let grid = Grid::with(8192, 2048.0, 2.0 / 3.0)?;
    let t = 400.0;
    let gamma = |v: f64| C64::new(0.5 * (-((v - 1.0) / 0.2).powi(2)).exp(), 0.0);
    let nf = ansatz_state(gamma, t, &grid);
    let rep = null_forms(&nf.wt, &nf.qt);
    let cs = cubic_sources_from(&nf.wt, &derivative(&nf.qt));
    let v = 1.0;
    let pred = g3r_prediction(v, t, gamma(v));
    let got = eval_at(&cs.g3r, v * t);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let small = Grid::with(256, 64.0, 2.0 / 3.0)?;
    let w = random_holomorphic(&small, &mut rng, 40, 0.05);
    let q = random_holomorphic(&small, &mut rng, 40, 0.05);
    Ok(NullCheck {
        ansatz_ratio: rep.worst(),
        ansatz_ratios: rep.ratios,
        random_ratio: null_forms(&w, &q).worst(),
        g3r_center_rel_err: (got - pred).norm() / pred.norm(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NfReport {
    pub sweep: SweepReport,
    /// max |split sum − unsplit| / max |unsplit| on random holomorphic inputs.
    pub decomposition_error: f64,
    pub k3r_max: f64,
    /// ‖(G̃,K̃)‖ / ‖(W,Q)‖ for data of size 1e-8.
    pub linear_regime_residual: f64,
    pub null: NullCheck,
    pub pass: bool,
}

pub fn decomposition_error(seed: u64) -> Result<(f64, f64)> {
    let grid = Grid::with(256, 64.0, 2.0 / 3.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut k3r = 0.0f64;
    for _ in 0..4 {
        // band limit keeps every cubic product alias free
        let w = random_holomorphic(&grid, &mut rng, 30, 0.1);
        let r = random_holomorphic(&grid, &mut rng, 30, 0.1);
        let cs = cubic_sources_from(&w, &r);
        let (g, k) = cubic_total_from(&w, &r);
        let scale = g.max_abs().max(k.max_abs());
        worst = worst.max(cs.g_total().sub(&g).max_abs() / scale).max(cs.k_total().sub(&k).max_abs() / scale);
        k3r = k3r.max(cs.k3r.max_abs());
    }
    Ok((worst, k3r))
}

pub fn run_nf_check(cfg: &ExperimentConfig) -> Result<NfReport> {
    let sweep = run_sweep(cfg)?;
    let (decomposition_error, k3r_max) = decomposition_error(cfg.seed)?;
    let grid = Grid::new(cfg.grid)?;
    let tiny = initial_state_on(&ExperimentConfig { eps: 1e-8, amplitude: None, ..cfg.clone() }, &grid)?;
    let (g, k) = nf_residual_with(&tiny, cfg.dt_probe, cfg.probe_substeps, cfg.chord_arc_floor)?;
    let linear_regime_residual = pair_size(&g, &k) / pair_hn_sq(&tiny.w, &tiny.q, 0).sqrt();
    let null = null_check(cfg.seed)?;
    let pass = sweep.nf_residual_cubic && sweep.nf_quartic_ok && decomposition_error <= 1e-12 && null.ansatz_ratio <= 0.1;
    Ok(NfReport { sweep, decomposition_error, k3r_max, linear_regime_residual, null, pass })
}

pub fn cmd_nf_check(cfg: &ExperimentConfig, out: &Path) -> Result<NfReport> {
    let report = run_nf_check(cfg)?;
    crate::harness::io::ensure_dir(out)?;
    write_json(&out.join("nf_check.json"), &report)?;
    let mut m = RunManifest::new(cfg.hash());
    m.stage("nf-check", if report.pass { "ok" } else { "failed" });
    m.finish(out, &["nf_check.json"])?;
    Ok(report)
}

// ---------------------------------------------------------------- packets

/// A nonlinear packet run and its free-flow twin.
pub struct PacketRun {
    pub cfg: ExperimentConfig,
    /// Number of leading columns that form the regular ray grid; the rest are
    /// the extra rays from `packet_rays`.
    pub n_grid: usize,
    pub series: GammaSeries,
    pub linear: GammaSeries,
    pub snapshots: Vec<WaterState>,
    pub energy_start: f64,
    pub energy_end: f64,
    pub wh_size: f64,
}

pub fn packet_run(cfg: &ExperimentConfig, keep_snapshots: bool) -> Result<PacketRun> {
    cfg.validate(Workload::Packets)?;
    let s0 = initial_state(cfg)?;
    let v_grid = cfg.v_grid();
    let n_grid = v_grid.len();
    let rays: Vec<f64> = v_grid.iter().chain(&cfg.packet_rays).cloned().collect();
    let ts = packets::t_samples(cfg.packet_t_min, cfg.t_max, cfg.packet_t_ratio);
    let mut stepper = Stepper::new(s0.clone(), cfg.dt, cfg.chord_arc_floor);
    let mut snapshots = Vec::new();
    let series = gamma_series_with(
        |t| {
            stepper.advance_to(t)?;
            if keep_snapshots {
                snapshots.push(stepper.state.clone());
            }
            Ok(stepper.state.clone())
        },
        &rays,
        &ts,
        cfg.gamma_refine,
        GammaForm::Simplified,
    )?;
    let linear = gamma_series_with(|t| Ok(linear_propagator(&s0, t)), &rays, &ts, cfg.gamma_refine, GammaForm::Simplified)?;
    Ok(PacketRun {
        cfg: cfg.clone(),
        n_grid,
        series: ode_residual(&series),
        linear,
        snapshots,
        energy_start: energy(&s0.w, &s0.q),
        energy_end: energy(&stepper.state.w, &stepper.state.q),
        wh_size: weighted_energy_with(&s0, cfg.chord_arc_floor)?.sqrt(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RayPhase {
    pub v: f64,
    pub slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub predicted: Option<f64>,
    pub ratio: Option<f64>,
    /// Slope of arg(γ/γ_linear), i.e. with the free-flow phase drift removed.
    pub linear_referenced_slope: Option<f64>,
    pub linear_referenced_ratio: Option<f64>,
    /// (|γ(T)|/|γ(T₀)| − 1) per decade of time.
    pub modulus_drift_per_decade: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PacketReport {
    pub t_first: f64,
    pub t_final: f64,
    pub sigma_slope: Option<f64>,
    pub sigma_slope_stderr: Option<f64>,
    pub sigma_window: [f64; 2],
    pub rays: Vec<RayPhase>,
    /// max over v_grid ∩ [0.7, 1.4] of the per-decade modulus drift.
    pub modulus_drift_band: f64,
    /// max over v_grid ∩ [0.7, 1.4] of ||Ψ_T|/|Ψ_{T/2}| − 1|.
    pub profile_modulus_mismatch: f64,
    pub profile_t_half: f64,
    pub profile_unstable: Option<String>,
    /// max over t of ‖γ(t,·)‖_{L²_v} / √𝒲ℋ(0).
    pub gamma_mass_ratio: f64,
    pub energy_drift: f64,
}

fn decade_drift(ts: &[f64], col: &[Option<C64>]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ts.iter().zip(col).filter_map(|(&t, g)| g.map(|g| (t, g.norm()))).collect();
    let (t0, a) = *pts.first()?;
    let (t1, b) = *pts.last()?;
    if t1 <= t0 || a == 0.0 {
        return None;
    }
    Some((b / a - 1.0) / (t1 / t0).log10())
}

fn column(gs: &GammaSeries, j: usize) -> Vec<Option<C64>> {
    gs.gamma.iter().map(|r| r[j]).collect()
}

pub fn packet_report(run: &PacketRun) -> PacketReport {
    let gs = &run.series;
    let ts = &gs.t_samples;
    let t_final = *ts.last().unwrap();
    let t_first = ts[0];
    // σ over the final decade, regular ray grid only
    let lo = (t_final / 10.0).max(t_first);
    let (st, sv): (Vec<f64>, Vec<f64>) = gs
        .sigma
        .iter()
        .zip(ts)
        .filter(|(_, &t)| t >= lo)
        .filter_map(|(row, &t)| {
            let m = row[..run.n_grid].iter().flatten().map(|z| z.norm()).fold(f64::NAN, f64::max);
            (!m.is_nan()).then_some((t, m))
        })
        .unzip();
    let sfit = loglog_fit(&st, &sv);

    let profile = extract_profile(gs);
    let last = ts.len() - 1;
    let ih = packets::nearest_index(ts, 0.5 * t_final);
    let psi = profile_at(gs, last);
    let psi_half = profile_at(gs, ih);

    let mut rays = Vec::new();
    for (j, &v) in gs.v_grid.iter().enumerate().skip(run.n_grid) {
        let col = column(gs, j);
        let fit = packets::phase_slope(gs, j, 0.0);
        let predicted = psi[j].map(|p| packets::predicted_phase_rate(v, p));
        let lin_ref = {
            let (x, ph): (Vec<f64>, Vec<f64>) = ts
                .iter()
                .zip(&col)
                .zip(&run.linear.gamma)
                .filter_map(|((&t, g), lrow)| match (g, lrow[j]) {
                    (Some(g), Some(l)) if l.norm() > 0.0 => Some((t.ln(), (g / l).arg())),
                    _ => None,
                })
                .unzip();
            linear_fit(&x, &unwrap_phase(&ph)).map(|f| f.slope)
        };
        let ratio = |s: Option<f64>| match (s, predicted) {
            (Some(s), Some(p)) if p != 0.0 => Some(s / p),
            _ => None,
        };
        rays.push(RayPhase {
            v,
            slope: fit.map(|f| f.0),
            slope_stderr: fit.and_then(|f| f.1.is_finite().then_some(f.1)),
            predicted,
            ratio: ratio(fit.map(|f| f.0)),
            linear_referenced_slope: lin_ref,
            linear_referenced_ratio: ratio(lin_ref),
            modulus_drift_per_decade: decade_drift(ts, &col),
        });
    }

    let band = |v: f64| (0.7..=1.4).contains(&v);
    let mut drift_band = 0.0f64;
    let mut mismatch = 0.0f64;
    for j in 0..run.n_grid {
        let v = gs.v_grid[j];
        if !band(v) {
            continue;
        }
        if let Some(d) = decade_drift(ts, &column(gs, j)) {
            drift_band = drift_band.max(d.abs());
        }
        if let (Some(a), Some(b)) = (psi[j], psi_half[j]) {
            if b.norm() > 0.0 {
                mismatch = mismatch.max((a.norm() / b.norm() - 1.0).abs());
            }
        }
    }

    // ‖γ(t,·)‖_{L²_v} by the trapezoid rule on the ray grid
    let mut mass_ratio = 0.0f64;
    for row in &gs.gamma {
        let vg = &gs.v_grid[..run.n_grid];
        let mut m = 0.0;
        for j in 1..run.n_grid {
            let a = row[j - 1].map_or(0.0, |z| z.norm_sqr());
            let b = row[j].map_or(0.0, |z| z.norm_sqr());
            m += 0.5 * (a + b) * (vg[j] - vg[j - 1]);
        }
        if run.wh_size > 0.0 {
            mass_ratio = mass_ratio.max(m.sqrt() / run.wh_size);
        }
    }

    PacketReport {
        t_first,
        t_final,
        sigma_slope: sfit.map(|f| f.slope),
        sigma_slope_stderr: sfit.and_then(|f| f.slope_stderr.is_finite().then_some(f.slope_stderr)),
        sigma_window: [lo, t_final],
        rays,
        modulus_drift_band: drift_band,
        profile_modulus_mismatch: mismatch,
        profile_t_half: ts[ih],
        profile_unstable: profile.err().map(|e| e.to_string()),
        gamma_mass_ratio: mass_ratio,
        energy_drift: if run.energy_start != 0.0 {
            ((run.energy_end - run.energy_start) / run.energy_start).abs()
        } else {
            0.0
        },
    }
}

fn series_rows(gs: &GammaSeries, data: &[Vec<Option<C64>>]) -> Vec<Vec<f64>> {
    let mut rows = Vec::new();
    for (row, &t) in data.iter().zip(&gs.t_samples) {
        for (z, &v) in row.iter().zip(&gs.v_grid) {
            if let Some(z) = z {
                rows.push(vec![t, v, z.re, z.im]);
            }
        }
    }
    rows
}

pub fn write_packet_outputs(run: &PacketRun, report: &PacketReport, out: &Path) -> Result<()> {
    crate::harness::io::ensure_dir(out)?;
    let gs = &run.series;
    write_csv(&out.join("gamma.csv"), "t,v,re_gamma,im_gamma", &series_rows(gs, &gs.gamma))?;
    write_csv(&out.join("gamma_linear.csv"), "t,v,re_gamma,im_gamma", &series_rows(&run.linear, &run.linear.gamma))?;
    write_csv(&out.join("sigma.csv"), "t,v,re_sigma,im_sigma", &series_rows(gs, &gs.sigma))?;
    let last = gs.t_samples.len() - 1;
    let ih = packets::nearest_index(&gs.t_samples, 0.5 * gs.t_samples[last]);
    let (p, ph) = (profile_at(gs, last), profile_at(gs, ih));
    let rows: Vec<Vec<f64>> = gs
        .v_grid
        .iter()
        .enumerate()
        .filter_map(|(j, &v)| match (p[j], ph[j]) {
            (Some(a), Some(b)) => Some(vec![v, a.re, a.im, b.re, b.im]),
            _ => None,
        })
        .collect();
    write_csv(&out.join("psi.csv"), "v,re_psi,im_psi,re_psi_half,im_psi_half", &rows)?;
    write_json(&out.join("summary.json"), report)
}

pub fn cmd_packet_test(cfg: &ExperimentConfig, out: &Path) -> Result<PacketReport> {
    let run = packet_run(cfg, false)?;
    let report = packet_report(&run);
    write_packet_outputs(&run, &report, out)?;
    let mut m = RunManifest::new(cfg.hash());
    m.stage("packet-test", if report.profile_unstable.is_some() { "profile-unstable" } else { "ok" });
    m.finish(out, &["gamma.csv", "gamma_linear.csv", "sigma.csv", "psi.csv", "summary.json"])?;
    if let Some(msg) = &report.profile_unstable {
        return Err(Error::ProfileUnstable(msg.clone()));
    }
    Ok(report)
}

// ---------------------------------------------------------------- asymptotics

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsReport {
    pub window: [f64; 2],
    /// (t, √t·sup_Ω|W − W_pred|, √t·sup_Ω|W_pred|)
    pub samples: Vec<[f64; 3]>,
    pub error_slope: Option<f64>,
    pub error_slope_stderr: Option<f64>,
    /// Fitted slope of sup over rays of the packet-centre error of (pactest).
    pub pactest_slope: Option<f64>,
    pub pass: bool,
}

pub fn asymptotics_report(run: &PacketRun) -> Result<AsymptoticsReport> {
    let gs = &run.series;
    let ts = &gs.t_samples;
    let last = ts.len() - 1;
    let t_final = ts[last];
    let psi = profile_at(gs, last);
    let pf = ProfileFn::from_profile(&gs.v_grid[..run.n_grid], &psi[..run.n_grid]);
    let lo = (t_final / 10.0).max(ts[0]);
    let mut samples = Vec::new();
    let mut pact = Vec::new();
    for (i, s) in run.snapshots.iter().enumerate() {
        let t = ts[i];
        if t < lo {
            continue;
        }
        let (wp, _) = asymptotic_eval(&pf, t, s.grid());
        let err = packets::ray_error(&s.w, &wp, t);
        samples.push([t, t.sqrt() * err, t.sqrt() * wp.max_abs()]);
        let nf = to_normal_form(s);
        let mut m = 0.0f64;
        for j in 0..run.n_grid {
            let v = gs.v_grid[j];
            if let Some(g) = gs.gamma[i][j] {
                if in_omega(v, t) {
                    m = m.max(pactest_error(&nf, v, g, 0.0));
                }
            }
        }
        pact.push((t, m));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = samples.iter().map(|s| (s[0], s[1])).unzip();
    let fit = loglog_fit(&x, &y);
    let (px, py): (Vec<f64>, Vec<f64>) = pact.into_iter().unzip();
    let pfit = loglog_fit(&px, &py);
    let error_slope = fit.map(|f| f.slope);
    Ok(AsymptoticsReport {
        window: [lo, t_final],
        samples,
        error_slope,
        error_slope_stderr: fit.and_then(|f| f.slope_stderr.is_finite().then_some(f.slope_stderr)),
        pactest_slope: pfit.map(|f| f.slope),
        pass: error_slope.map_or(false, |s| s <= -0.03),
    })
}

pub fn cmd_asymptotics(cfg: &ExperimentConfig, out: &Path) -> Result<AsymptoticsReport> {
    let run = packet_run(cfg, true)?;
    let report = asymptotics_report(&run)?;
    crate::harness::io::ensure_dir(out)?;
    let rows: Vec<Vec<f64>> = report.samples.iter().map(|s| s.to_vec()).collect();
    write_csv(&out.join("asymptotics.csv"), "t,sqrtt_err,sqrtt_pred", &rows)?;
    write_json(&out.join("asymptotics.json"), &report)?;
    let mut m = RunManifest::new(cfg.hash());
    m.stage("asymptotics", if report.pass { "ok" } else { "failed" });
    m.finish(out, &["asymptotics.csv", "asymptotics.json"])?;
    Ok(report)
}

//! Wave packets along rays α = vt, the packet-tested amplitude γ(t,v), the
//! residual σ of its asymptotic ODE, and the scattering profile Ψ.
//!
//! For v < 0 all length scales use |v|; the phase t²/(4α) keeps its sign so
//! the packet frequency is −1/(4v²) on both branches.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::harness::fit::{linear_fit, unwrap_phase};
use crate::normalform::{to_normal_form, NormalFormState};
use crate::par;
use crate::spectral::{frac_deriv, Grid, SpectralField, C64, I};
use crate::waterwave::WaterState;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// ∫ exp(1 − 1/(1−y²)) dy over (−1, 1).
pub fn bump_mass() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| {
        // the integrand is flat to all orders at ±1, so the trapezoid rule is spectrally accurate
        let n = 20_000;
        let h = 2.0 / n as f64;
        (1..n).map(|k| raw_bump(-1.0 + k as f64 * h)).sum::<f64>() * h
    })
}

fn raw_bump(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - y * y)).exp()
    }
}

/// Unit-mass bump and its first two derivatives.
pub fn chi(y: f64) -> f64 {
    raw_bump(y) / bump_mass()
}

pub fn chi_prime(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - y * y;
    chi(y) * (-2.0 * y / (s * s))
}

pub fn chi_second(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - y * y;
    let d = -2.0 * y / (s * s);
    chi(y) * (d * d - 2.0 / (s * s) - 8.0 * y * y / (s * s * s))
}

/// Packet frequency ξ_v = −1/(4v²).
pub fn packet_frequency(v: f64) -> f64 {
    -1.0 / (4.0 * v * v)
}

/// Half-width of the packet support, t^{1/2}|v|^{3/2}.
pub fn packet_halfwidth(v: f64, t: f64) -> f64 {
    t.sqrt() * v.abs().powf(1.5)
}

pub fn in_omega(v: f64, t: f64) -> bool {
    let a = v.abs();
    a >= t.powf(-1.0 / 9.0) && a <= t.powf(1.0 / 9.0)
}

/// Closed-form packet values at one point: (u, 𝐰, 𝖌).
///
/// 𝐰 = −iv∂_t𝐮 and 𝖌 = ∂_t𝐰 + v∂_α𝐮 = v(∂_α − i∂_t²)𝐮. In the latter the
/// |φ_α| and φ_t² contributions cancel exactly, leaving only terms that are
/// small on the packet scale.
#[derive(Clone, Copy, Debug)]
pub struct PacketPoint {
    pub u: C64,
    pub w: C64,
    pub g: C64,
}

pub fn packet_point(v: f64, t: f64, alpha: f64) -> PacketPoint {
    let s = v.abs();
    let s32 = s.powf(1.5);
    let d = t.sqrt() * s32;
    let y = (alpha - v * t) / d;
    if y.abs() >= 1.0 {
        return PacketPoint { u: ZERO, w: ZERO, g: ZERO };
    }
    let (c0, c1, c2) = (chi(y), chi_prime(y), chi_second(y));
    let e = (I * (t * t / (4.0 * alpha))).exp() / s32;
    let t32 = t.powf(1.5);
    let yt = -(v * t + alpha) / (2.0 * t32 * s32);
    let ytt = (v * t + 3.0 * alpha) / (4.0 * s32 * t * t32);
    let u = e * c0;
    let w = e * (C64::new(v * t / (2.0 * alpha) * c0, 0.0) + I * (v * (v * t + alpha) / (2.0 * t32 * s32)) * c1);
    let g = e
        * v
        * (C64::new(c0 / (2.0 * alpha), 0.0)
            + c1 * C64::new((alpha - v * t) / (2.0 * alpha * d), -ytt)
            - I * (c2 * yt * yt));
    PacketPoint { u, w, g }
}

/// 𝐮, (𝐰, 𝐪 = v𝐮) and the linear error 𝖌 sampled on a grid.
#[derive(Clone, Debug)]
pub struct PacketFamily {
    pub v: f64,
    pub t: f64,
    pub u: SpectralField,
    pub w: SpectralField,
    pub q: SpectralField,
    pub g: SpectralField,
}

fn check_packet(v: f64, t: f64, grid: &Grid) -> Result<()> {
    if !(t >= 1.0) {
        return Err(Error::DomainOverflow(format!("t = {t} < 1")));
    }
    if !in_omega(v, t) {
        return Err(Error::DomainOverflow(format!("v = {v} outside [t^-1/9, t^1/9] at t = {t}")));
    }
    let d = packet_halfwidth(v, t);
    let c = (v * t).abs();
    if c + d >= 0.5 * grid.length() || d >= c {
        return Err(Error::DomainOverflow(format!(
            "support [{:.1}, {:.1}] does not fit the torus of length {}",
            c - d,
            c + d,
            grid.length()
        )));
    }
    Ok(())
}

pub fn build_packet(v: f64, t: f64, grid: &Arc<Grid>) -> Result<PacketFamily> {
    check_packet(v, t, grid)?;
    let pts: Vec<PacketPoint> = grid.alpha().iter().map(|&a| packet_point(v, t, a)).collect();
    let u = SpectralField::from_values(grid, pts.iter().map(|p| p.u).collect());
    let w = SpectralField::from_values(grid, pts.iter().map(|p| p.w).collect());
    let g = SpectralField::from_values(grid, pts.iter().map(|p| p.g).collect());
    let q = u.scale(C64::new(v, 0.0));
    Ok(PacketFamily { v, t, u, w, q, g })
}

/// ⟨(W̃,Q̃),(𝐰,𝐪)⟩ = ∫ W̃𝐰̄ + (|D|^{1/2}Q̃)(|D|^{1/2}𝐪)‾ dα, via Parseval.
pub fn gamma_functional(nf: &NormalFormState, p: &PacketFamily) -> Result<C64> {
    let grid = nf.wt.grid();
    if !grid.same_as(p.u.grid()) {
        return Err(Error::GridMismatch);
    }
    let mut acc = ZERO;
    for (k, &x) in grid.xi().iter().enumerate() {
        acc += nf.wt.coeffs()[k] * p.w.coeffs()[k].conj() + x.abs() * nf.qt.coeffs()[k] * p.q.coeffs()[k].conj();
    }
    Ok(acc * grid.length())
}

/// ½∫(W̃ + |D|^{1/2}Q̃)𝐮̄ dα, the form the asymptotic ODE is stated for.
pub fn gamma_simplified(nf: &NormalFormState, p: &PacketFamily) -> Result<C64> {
    let grid = nf.wt.grid();
    if !grid.same_as(p.u.grid()) {
        return Err(Error::GridMismatch);
    }
    let mut acc = ZERO;
    for (k, &x) in grid.xi().iter().enumerate() {
        acc += (nf.wt.coeffs()[k] + x.abs().sqrt() * nf.qt.coeffs()[k]) * p.u.coeffs()[k].conj();
    }
    Ok(acc * 0.5 * grid.length())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaForm {
    /// The Ḣ₀ pairing with (𝐰, 𝐪).
    Full,
    /// ½∫(W̃ + |D|^{1/2}Q̃)𝐮̄.
    Simplified,
}

/// Normal-form fields interpolated to a refined grid, ready for many γ evaluations.
///
/// The state is band-limited, so zero-padding is exact and the trapezoid sum
/// over the refined grid is the exact pairing with the sampled packet.
pub struct GammaProbe {
    grid: Arc<Grid>,
    wt: Vec<C64>,
    dq_half: Vec<C64>,
    dq_one: Vec<C64>,
}

impl GammaProbe {
    pub fn new(nf: &NormalFormState, refine: usize) -> Result<Self> {
        let coarse = nf.wt.grid();
        let grid = coarse.refine(refine.max(1))?;
        let lift = |f: &SpectralField| -> Vec<C64> { grid.inverse(&coarse.transfer_coeffs(f.coeffs(), &grid)) };
        Ok(GammaProbe {
            wt: lift(&nf.wt),
            dq_half: lift(&frac_deriv(&nf.qt, 0.5)),
            dq_one: lift(&frac_deriv(&nf.qt, 1.0)),
            grid,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// γ(t,v); errors if the packet is not admissible on this grid.
    pub fn gamma(&self, v: f64, t: f64, form: GammaForm) -> Result<C64> {
        check_packet(v, t, &self.grid)?;
        let d = packet_halfwidth(v, t);
        let lo = v * t - d;
        let hi = v * t + d;
        let dx = self.grid.dx();
        let alpha = self.grid.alpha();
        let mut acc = ZERO;
        for (j, &a) in alpha.iter().enumerate() {
            if a <= lo || a >= hi {
                continue;
            }
            let p = packet_point(v, t, a);
            acc += match form {
                GammaForm::Full => self.wt[j] * p.w.conj() + self.dq_one[j] * (v * p.u).conj(),
                GammaForm::Simplified => 0.5 * (self.wt[j] + self.dq_half[j]) * p.u.conj(),
            };
        }
        Ok(acc * dx)
    }
}

/// γ at one (t, v) from a state, on an m-fold refined grid.
pub fn gamma_at(nf: &NormalFormState, v: f64, t: f64, refine: usize, form: GammaForm) -> Result<C64> {
    GammaProbe::new(nf, refine)?.gamma(v, t, form)
}

/// Geometric ray grid in [max(t_min^{−1/9}, 0.3), min(t_max^{1/9}, 3)].
pub fn v_grid(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    let lo = t_min.powf(-1.0 / 9.0).max(0.3);
    let hi = t_max.powf(1.0 / 9.0).min(3.0);
    geomspace(lo, hi, count)
}

pub fn geomspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count).map(|k| lo * (hi / lo).powf(k as f64 / (count - 1) as f64)).collect(),
    }
}

/// t_min·ratio^k below t_max, then t_max itself.
pub fn t_samples(t_min: f64, t_max: f64, ratio: f64) -> Vec<f64> {
    assert!(ratio > 1.0 && t_min > 0.0);
    let mut out = Vec::new();
    let mut t = t_min;
    while t < t_max * (1.0 - 1e-12) {
        out.push(t);
        t *= ratio;
    }
    out.push(t_max);
    out
}

#[derive(Clone, Debug, Default)]
pub struct GammaSeries {
    pub v_grid: Vec<f64>,
    pub t_samples: Vec<f64>,
    /// gamma[i][j] at (t_samples[i], v_grid[j]); None outside Ω(t).
    pub gamma: Vec<Vec<Option<C64>>>,
    /// Same layout; the first and last rows are None.
    pub sigma: Vec<Vec<Option<C64>>>,
    pub psi: Vec<Option<C64>>,
}

/// One row of γ over the ray grid. Rays are evaluated in parallel.
pub fn gamma_row(nf: &NormalFormState, v_grid: &[f64], refine: usize, form: GammaForm) -> Result<Vec<Option<C64>>> {
    let t = nf.time;
    let probe = GammaProbe::new(nf, refine)?;
    par::map(v_grid, |&v| {
        if !in_omega(v, t) {
            return Ok(None);
        }
        probe.gamma(v, t, form).map(Some)
    })
    .into_iter()
    .collect()
}

/// Build γ along a trajectory. `state_at(t)` must return the state at time t,
/// with t increasing through `t_samples`.
pub fn gamma_series_with(
    mut state_at: impl FnMut(f64) -> Result<WaterState>,
    v_grid: &[f64],
    t_samples: &[f64],
    refine: usize,
    form: GammaForm,
) -> Result<GammaSeries> {
    let mut gamma = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let s = state_at(t)?;
        let nf = to_normal_form(&s);
        gamma.push(gamma_row(&nf, v_grid, refine, form)?);
    }
    Ok(GammaSeries {
        v_grid: v_grid.to_vec(),
        t_samples: t_samples.to_vec(),
        gamma,
        sigma: vec![],
        psi: vec![],
    })
}

pub fn gamma_series(
    stepper: &mut crate::waterwave::Stepper,
    v_grid: &[f64],
    t_samples: &[f64],
    refine: usize,
) -> Result<GammaSeries> {
    gamma_series_with(
        |t| {
            stepper.advance_to(t)?;
            Ok(stepper.state.clone())
        },
        v_grid,
        t_samples,
        refine,
        GammaForm::Simplified,
    )
}

/// Nonlinear ODE coefficient 1/(2(2v)⁵).
pub fn ode_coefficient(v: f64) -> f64 {
    0.5 * (2.0 * v).powi(-5)
}

/// σ = centered dγ/dt − (i/(2t(2v)⁵))γ|γ|².
pub fn ode_residual(gs: &GammaSeries) -> GammaSeries {
    let nt = gs.t_samples.len();
    let nv = gs.v_grid.len();
    let mut sigma = vec![vec![None; nv]; nt];
    for i in 1..nt.saturating_sub(1) {
        let (t0, t, t1) = (gs.t_samples[i - 1], gs.t_samples[i], gs.t_samples[i + 1]);
        for j in 0..nv {
            if let (Some(a), Some(g), Some(b)) = (gs.gamma[i - 1][j], gs.gamma[i][j], gs.gamma[i + 1][j]) {
                let c = ode_coefficient(gs.v_grid[j]);
                sigma[i][j] = Some((b - a) / (t1 - t0) - I * (c / t) * g * g.norm_sqr());
            }
        }
    }
    GammaSeries { sigma, ..gs.clone() }
}

/// sup over v of |σ(t_i, ·)|, for the interior rows that have any entry.
pub fn sigma_sup(gs: &GammaSeries) -> Vec<(f64, f64)> {
    gs.sigma
        .iter()
        .zip(&gs.t_samples)
        .filter_map(|(row, &t)| {
            let m = row.iter().flatten().map(|z| z.norm()).fold(f64::NAN, f64::max);
            if m.is_nan() {
                None
            } else {
                Some((t, m))
            }
        })
        .collect()
}

/// Ψ from γ at sample i: γ·exp(−(i/2)(2v)^{−5}|γ|² ln t).
pub fn profile_at(gs: &GammaSeries, i: usize) -> Vec<Option<C64>> {
    let t = gs.t_samples[i];
    gs.gamma[i]
        .iter()
        .zip(&gs.v_grid)
        .map(|(g, &v)| g.map(|g| g * (-I * ode_coefficient(v) * g.norm_sqr() * t.ln()).exp()))
        .collect()
}

#[derive(Clone, Debug)]
pub struct Profile {
    pub t_final: f64,
    pub t_half: f64,
    pub psi: Vec<Option<C64>>,
    pub psi_half: Vec<Option<C64>>,
    /// max_v ||Ψ_T| − |Ψ_{T/2}|| / max_v |Ψ_T|.
    pub discrepancy: f64,
}

/// Relative modulus band the T vs T/2 comparison is expected to sit in.
pub const PROFILE_BAND: f64 = 0.05;

/// Ψ at the final sample, cross-checked against the sample nearest T/2.
pub fn extract_profile(gs: &GammaSeries) -> Result<Profile> {
    let nt = gs.t_samples.len();
    if nt == 0 {
        return Err(Error::ProfileUnstable("empty series".into()));
    }
    let t_final = gs.t_samples[nt - 1];
    let ih = nearest_index(&gs.t_samples, 0.5 * t_final);
    let psi = profile_at(gs, nt - 1);
    let psi_half = profile_at(gs, ih);
    let scale = psi.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for (a, b) in psi.iter().zip(&psi_half) {
        if let (Some(a), Some(b)) = (a, b) {
            worst = worst.max((a.norm() - b.norm()).abs());
        }
    }
    let discrepancy = if scale > 0.0 { worst / scale } else { 0.0 };
    if discrepancy > 3.0 * PROFILE_BAND {
        return Err(Error::ProfileUnstable(format!(
            "|Psi| moved by {:.3e} (relative) between t = {} and t = {}",
            discrepancy, gs.t_samples[ih], t_final
        )));
    }
    Ok(Profile { t_final, t_half: gs.t_samples[ih], psi, psi_half, discrepancy })
}

pub fn nearest_index(xs: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (i, &y) in xs.iter().enumerate() {
        if (y - x).abs() < (xs[best] - x).abs() {
            best = i;
        }
    }
    best
}

/// Slope (and its standard error) of unwrapped arg γ(t, v_j) against ln t over
/// the samples with t ≥ t_from. Needs three or more samples.
pub fn phase_slope(gs: &GammaSeries, j: usize, t_from: f64) -> Option<(f64, f64)> {
    let (x, z): (Vec<f64>, Vec<C64>) = gs
        .t_samples
        .iter()
        .zip(&gs.gamma)
        .filter(|(&t, _)| t >= t_from)
        .filter_map(|(&t, row)| row[j].map(|g| (t.ln(), g)))
        .unzip();
    if x.len() < 3 {
        return None;
    }
    let ph = unwrap_phase(&z.iter().map(|g| g.arg()).collect::<Vec<_>>());
    let f = linear_fit(&x, &ph)?;
    Some((f.slope, f.slope_stderr))
}

/// (1/2)(2v)^{−5}|Ψ|², the predicted phase rate in ln t.
pub fn predicted_phase_rate(v: f64, psi: C64) -> f64 {
    ode_coefficient(v) * psi.norm_sqr()
}

/// Ψ as a function of the ray velocity, linear in v between grid nodes and
/// zero outside the grid.
#[derive(Clone, Debug)]
pub struct ProfileFn {
    pub v: Vec<f64>,
    pub psi: Vec<C64>,
}

impl ProfileFn {
    pub fn from_profile(v_grid: &[f64], psi: &[Option<C64>]) -> Self {
        let (v, psi) = v_grid.iter().zip(psi).map(|(&v, p)| (v, p.unwrap_or(ZERO))).unzip();
        ProfileFn { v, psi }
    }

    pub fn eval(&self, v: f64) -> C64 {
        let n = self.v.len();
        if n == 0 || v < self.v[0] || v > self.v[n - 1] {
            return ZERO;
        }
        let k = self.v.partition_point(|&x| x <= v);
        if k == 0 {
            return self.psi[0];
        }
        if k >= n {
            return self.psi[n - 1];
        }
        let (a, b) = (self.v[k - 1], self.v[k]);
        let s = (v - a) / (b - a);
        self.psi[k - 1] * (1.0 - s) + self.psi[k] * s
    }
}

/// Predicted (W, Q) on the ray region:
/// W ≈ t^{−1/2}e^{it²/(4α)}Ψ(α/t)e^{(i/2)(2α/t)^{−5} ln t |Ψ|²}, Q ≈ (2α/t)W.
pub fn asymptotic_eval(psi: &ProfileFn, t: f64, grid: &Arc<Grid>) -> (SpectralField, SpectralField) {
    let mut w = vec![ZERO; grid.n()];
    let mut q = vec![ZERO; grid.n()];
    for (j, &a) in grid.alpha().iter().enumerate() {
        let v = a / t;
        if v <= 0.0 || !in_omega(v, t) {
            continue;
        }
        let p = psi.eval(v);
        if p == ZERO {
            continue;
        }
        let phase = t * t / (4.0 * a) + ode_coefficient(v) * p.norm_sqr() * t.ln();
        w[j] = p * (I * phase).exp() / t.sqrt();
        q[j] = w[j] * (2.0 * v);
    }
    (SpectralField::from_values(grid, w), SpectralField::from_values(grid, q))
}

/// sup over the ray region Ω(t) of |W − W_pred|.
pub fn ray_error(w: &SpectralField, w_pred: &SpectralField, t: f64) -> f64 {
    let alpha = w.grid().alpha();
    let mut m = 0.0f64;
    for (j, &a) in alpha.iter().enumerate() {
        let v = a / t;
        if v > 0.0 && in_omega(v, t) {
            m = m.max((w.values()[j] - w_pred.values()[j]).norm());
        }
    }
    m
}

/// Value of a field at an arbitrary point, by direct Fourier summation.
pub fn eval_at(f: &SpectralField, alpha: f64) -> C64 {
    f.coeffs().iter().zip(f.grid().xi()).map(|(c, &x)| c * (I * (x * alpha)).exp()).sum()
}

/// |(|D|^s W̃)(vt) − |ξ_v|^s t^{−1/2}e^{iφ}γ| at the packet center.
pub fn pactest_error(nf: &NormalFormState, v: f64, gamma: C64, s: f64) -> f64 {
    let t = nf.time;
    let a = v * t;
    let field = eval_at(&frac_deriv(&nf.wt, s), a);
    let pred = packet_frequency(v).abs().powf(s) * (I * (t * t / (4.0 * a))).exp() * gamma / t.sqrt();
    (field - pred).norm()
}

/// Asymptotic ansatz (W̃, Q̃) = t^{−1/2}e^{iφ}γ(α/t)·(1, 2α/t), projected onto
/// dealiased holomorphic modes.
pub fn ansatz_state(gamma: impl Fn(f64) -> C64, t: f64, grid: &Arc<Grid>) -> NormalFormState {
    let mut w = vec![ZERO; grid.n()];
    let mut q = vec![ZERO; grid.n()];
    for (j, &a) in grid.alpha().iter().enumerate() {
        if a <= 0.0 {
            continue;
        }
        let v = a / t;
        let g = gamma(v);
        if g == ZERO {
            continue;
        }
        w[j] = g * (I * (t * t / (4.0 * a))).exp() / t.sqrt();
        q[j] = w[j] * (2.0 * v);
    }
    NormalFormState {
        time: t,
        wt: SpectralField::holomorphic_from_coeffs(grid, grid.project_values(w)),
        qt: SpectralField::holomorphic_from_coeffs(grid, grid.project_values(q)),
    }
}

/// The (g3r) prediction i t^{−3/2}(2v)^{−5}e^{iφ}γ|γ|² at α = vt.
pub fn g3r_prediction(v: f64, t: f64, gamma: C64) -> C64 {
    let a = v * t;
    I * t.powf(-1.5) * (2.0 * v).powi(-5) * (I * (t * t / (4.0 * a))).exp() * gamma * gamma.norm_sqr()
}

//! The water wave flow in holomorphic coordinates: state, auxiliary fields,
//! both right-hand sides, the exact linear propagator and the Lawson RK4 stepper.
//!
//! Quotients (by `1+𝐖` and by `J`) are evaluated pointwise on the collocation
//! grid and then projected back onto dealiased holomorphic coefficients.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField, C64, I};

pub const DEFAULT_CHORD_ARC_FLOOR: f64 = 0.5;
/// Carrier |ξ₀| used when the caller does not pick one.
pub const DEFAULT_CARRIER: f64 = 1.0;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug)]
pub struct WaterState {
    pub time: f64,
    pub w: SpectralField,
    pub q: SpectralField,
}

/// The differentiated variables (𝐖, R) = (W_α, Q_α/(1+W_α)).
#[derive(Clone, Debug)]
pub struct DiffState {
    pub time: f64,
    pub bw: SpectralField,
    pub r: SpectralField,
}

#[derive(Clone, Debug)]
pub struct AuxFields {
    pub bw: SpectralField,
    pub r: SpectralField,
    pub f: SpectralField,
    pub j: Vec<f64>,
    /// Real advection velocity.
    pub b: Vec<f64>,
    /// Real frequency shift.
    pub a: Vec<f64>,
    /// M from its defining expression.
    pub m: Vec<f64>,
    /// M from the projected expression; should match `m` to scheme accuracy.
    pub m_alt: Vec<f64>,
    pub y: SpectralField,
    /// Largest |Im| dropped when storing b, a, M, M_alt as real arrays.
    pub imag_residual: ImagResidual,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ImagResidual {
    pub b: f64,
    pub a: f64,
    pub m: f64,
    pub m_alt: f64,
}

impl WaterState {
    pub fn new(time: f64, w: SpectralField, q: SpectralField) -> Result<Self> {
        if !w.grid().same_as(q.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(WaterState { time, w, q })
    }

    pub fn zero(grid: &Arc<Grid>) -> Self {
        WaterState { time: 0.0, w: SpectralField::zeros(grid), q: SpectralField::zeros(grid) }
    }

    pub fn from_coeffs(grid: &Arc<Grid>, time: f64, wh: Vec<C64>, qh: Vec<C64>) -> Self {
        WaterState {
            time,
            w: SpectralField::holomorphic_from_coeffs(grid, wh),
            q: SpectralField::holomorphic_from_coeffs(grid, qh),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.w.grid()
    }

    /// min over the grid of |1 + W_α|.
    pub fn chord_arc_min(&self) -> f64 {
        let wa = self.grid().inverse(&self.grid().deriv_coeffs(self.w.coeffs()));
        wa.iter().map(|z| (z + 1.0).norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn check(&self, floor: f64) -> Result<()> {
        if !self.w.coeffs().iter().chain(self.q.coeffs()).all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NaNDetected { time: self.time });
        }
        let min = self.chord_arc_min();
        if min <= floor {
            return Err(Error::ChordArcViolation { min, floor });
        }
        Ok(())
    }

    pub fn diff_state(&self) -> Result<DiffState> {
        let grid = self.grid();
        let bw = crate::spectral::derivative(&self.w);
        let qa = grid.inverse(&grid.deriv_coeffs(self.q.coeffs()));
        let r: Vec<C64> = qa.iter().zip(bw.values()).map(|(q, w)| q / (w + 1.0)).collect();
        let r = SpectralField::holomorphic_from_coeffs(grid, grid.project_values(r));
        Ok(DiffState { time: self.time, bw, r })
    }

    /// Scale both components by `s` (used by amplitude sweeps and normalisation).
    pub fn scaled(&self, s: f64) -> WaterState {
        WaterState {
            time: self.time,
            w: self.w.scale(C64::new(s, 0.0)),
            q: self.q.scale(C64::new(s, 0.0)),
        }
    }

    pub fn write_checkpoint<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        self.w.write_record(out, self.time)?;
        self.q.write_record(out, self.time)
    }

    pub fn read_checkpoint<R: Read>(input: &mut R, grid: &Arc<Grid>) -> Result<WaterState> {
        let (w, t1) = SpectralField::read_record(input, grid)?;
        let (q, t2) = SpectralField::read_record(input, grid)?;
        if t1.to_bits() != t2.to_bits() {
            return Err(Error::Checkpoint("W and Q records carry different times".into()));
        }
        WaterState::new(t1, w, q)
    }
}

impl DiffState {
    pub fn grid(&self) -> &Arc<Grid> {
        self.bw.grid()
    }
}

fn check_floor(one_plus_bw: &[C64], floor: f64) -> Result<()> {
    let min = one_plus_bw.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::NaNDetected { time: f64::NAN });
    }
    if min <= floor {
        return Err(Error::ChordArcViolation { min, floor });
    }
    Ok(())
}

fn re_vec(v: &[C64]) -> (Vec<f64>, f64) {
    let resid = v.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    (v.iter().map(|z| z.re).collect(), resid)
}

/// P̄ with P̄ = I − P, i.e. ξ > 0 only, applied to collocation values.
fn pbar_values(grid: &Grid, v: &[C64]) -> Vec<C64> {
    let mut c = grid.forward(v);
    for (z, &x) in c.iter_mut().zip(grid.xi()) {
        if x <= 0.0 {
            *z = ZERO;
        }
    }
    grid.inverse(&c)
}

fn p_values(grid: &Grid, v: &[C64]) -> Vec<C64> {
    let mut c = grid.forward(v);
    for (z, &x) in c.iter_mut().zip(grid.xi()) {
        if x > 0.0 {
            *z = ZERO;
        }
    }
    grid.inverse(&c)
}

/// Shared construction from 𝐖 and the values of Q_α.
fn aux_core(bw: &SpectralField, qa: &[C64], floor: f64) -> Result<AuxFields> {
    let grid = bw.grid().clone();
    let n = grid.n();
    let bwv = bw.values();
    let opw: Vec<C64> = bwv.iter().map(|w| w + 1.0).collect();
    check_floor(&opw, floor)?;
    let j: Vec<f64> = opw.iter().map(|z| z.norm_sqr()).collect();

    let r = SpectralField::holomorphic_from_coeffs(
        &grid,
        grid.project_values((0..n).map(|k| qa[k] / opw[k]).collect()),
    );
    let f = SpectralField::holomorphic_from_coeffs(
        &grid,
        grid.project_values((0..n).map(|k| (qa[k] - qa[k].conj()) / j[k]).collect()),
    );
    let y = SpectralField::holomorphic_from_coeffs(
        &grid,
        grid.project_values((0..n).map(|k| bwv[k] / opw[k]).collect()),
    );

    // b = P[Q_α/J] + P̄[Q̄_α/J]
    let qj: Vec<C64> = (0..n).map(|k| qa[k] / j[k]).collect();
    let qjc: Vec<C64> = qj.iter().map(|z| z.conj()).collect();
    let pq = p_values(&grid, &qj);
    let pbq = pbar_values(&grid, &qjc);
    let b_c: Vec<C64> = (0..n).map(|k| pq[k] + pbq[k]).collect();

    // a = i(P̄[R̄R_α] − P[RR̄_α])
    let rv = r.values();
    let ra = grid.inverse(&grid.deriv_coeffs(r.coeffs()));
    let g1: Vec<C64> = (0..n).map(|k| rv[k].conj() * ra[k]).collect();
    let g2: Vec<C64> = (0..n).map(|k| rv[k] * ra[k].conj()).collect();
    let pb1 = pbar_values(&grid, &g1);
    let p2 = p_values(&grid, &g2);
    let a_c: Vec<C64> = (0..n).map(|k| I * (pb1[k] - p2[k])).collect();

    // M = R_α/(1+𝐖̄) + R̄_α/(1+𝐖) − b_α
    let (b, b_res) = re_vec(&b_c);
    let bh = grid.forward(&b.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
    let b_alpha = grid.inverse(&grid.deriv_coeffs(&bh));
    let m_c: Vec<C64> = (0..n)
        .map(|k| ra[k] / opw[k].conj() + ra[k].conj() / opw[k] - b_alpha[k])
        .collect();

    // M = P̄[R̄Y_α − R_αȲ] + P[RȲ_α − R̄_αY]
    let yv = y.values();
    let ya = grid.inverse(&grid.deriv_coeffs(y.coeffs()));
    let h1: Vec<C64> = (0..n).map(|k| rv[k].conj() * ya[k] - ra[k] * yv[k].conj()).collect();
    let h2: Vec<C64> = (0..n).map(|k| rv[k] * ya[k].conj() - ra[k].conj() * yv[k]).collect();
    let ph1 = pbar_values(&grid, &h1);
    let ph2 = p_values(&grid, &h2);
    let malt_c: Vec<C64> = (0..n).map(|k| ph1[k] + ph2[k]).collect();

    let (a, a_res) = re_vec(&a_c);
    let (m, m_res) = re_vec(&m_c);
    let (m_alt, malt_res) = re_vec(&malt_c);
    Ok(AuxFields {
        bw: bw.clone(),
        r,
        f,
        j,
        b,
        a,
        m,
        m_alt,
        y,
        imag_residual: ImagResidual { b: b_res, a: a_res, m: m_res, m_alt: malt_res },
    })
}

pub fn compute_aux(s: &WaterState) -> Result<AuxFields> {
    compute_aux_with(s, DEFAULT_CHORD_ARC_FLOOR)
}

pub fn compute_aux_with(s: &WaterState, floor: f64) -> Result<AuxFields> {
    let grid = s.grid();
    let bw = crate::spectral::derivative(&s.w);
    let qa = grid.inverse(&grid.deriv_coeffs(s.q.coeffs()));
    aux_core(&bw, &qa, floor)
}

pub fn aux_from_diff(d: &DiffState, floor: f64) -> Result<AuxFields> {
    let qa: Vec<C64> = d.r.values().iter().zip(d.bw.values()).map(|(r, w)| r * (w + 1.0)).collect();
    aux_core(&d.bw, &qa, floor)
}

/// (ww2d1) in coefficient space. Inputs and outputs are holomorphic coefficient vectors.
pub fn rhs_wq_coeffs(grid: &Grid, wh: &[C64], qh: &[C64], floor: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = grid.n();
    let wa = grid.inverse(&grid.deriv_coeffs(wh));
    let qa = grid.inverse(&grid.deriv_coeffs(qh));
    let w = grid.inverse(wh);
    let opw: Vec<C64> = wa.iter().map(|z| z + 1.0).collect();
    check_floor(&opw, floor)?;
    let mut jinv = vec![0.0; n];
    let mut tmp = vec![ZERO; n];
    for k in 0..n {
        jinv[k] = 1.0 / opw[k].norm_sqr();
        tmp[k] = (qa[k] - qa[k].conj()) * jinv[k];
    }
    let fh = grid.project_values(tmp);
    let f = grid.inverse(&fh);
    let mut dw = vec![ZERO; n];
    let mut dq = vec![ZERO; n];
    for k in 0..n {
        dw[k] = -f[k] * opw[k];
        dq[k] = -f[k] * qa[k] + I * w[k] - qa[k].norm_sqr() * jinv[k];
    }
    let dwh = grid.project_values(dw);
    let dqh = grid.project_values(dq);
    if dwh.iter().chain(&dqh).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NaNDetected { time: f64::NAN });
    }
    Ok((dwh, dqh))
}

pub fn rhs_wq(s: &WaterState) -> Result<(SpectralField, SpectralField)> {
    rhs_wq_with(s, DEFAULT_CHORD_ARC_FLOOR)
}

pub fn rhs_wq_with(s: &WaterState, floor: f64) -> Result<(SpectralField, SpectralField)> {
    let grid = s.grid();
    let (dw, dq) = rhs_wq_coeffs(grid, s.w.coeffs(), s.q.coeffs(), floor)
        .map_err(|e| stamp(e, s.time))?;
    Ok((
        SpectralField::holomorphic_from_coeffs(grid, dw),
        SpectralField::holomorphic_from_coeffs(grid, dq),
    ))
}

fn stamp(e: Error, time: f64) -> Error {
    match e {
        Error::NaNDetected { .. } => Error::NaNDetected { time },
        other => other,
    }
}

/// (ww2d-diff) in coefficient space for (𝐖, R).
pub fn rhs_diff_coeffs(grid: &Arc<Grid>, bwh: &[C64], rh: &[C64], floor: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    let d = DiffState {
        time: 0.0,
        bw: SpectralField::holomorphic_from_coeffs(grid, bwh.to_vec()),
        r: SpectralField::holomorphic_from_coeffs(grid, rh.to_vec()),
    };
    let aux = aux_from_diff(&d, floor)?;
    let n = grid.n();
    let bwv = d.bw.values();
    let bwa = grid.inverse(&grid.deriv_coeffs(bwh));
    let ra = grid.inverse(&grid.deriv_coeffs(rh));
    let mut dbw = vec![ZERO; n];
    let mut dr = vec![ZERO; n];
    for k in 0..n {
        let opw = bwv[k] + 1.0;
        dbw[k] = -aux.b[k] * bwa[k] - opw * ra[k] / opw.conj() + opw * aux.m[k];
        dr[k] = -aux.b[k] * ra[k] + I * (bwv[k] - aux.a[k]) / opw;
    }
    Ok((grid.project_values(dbw), grid.project_values(dr)))
}

pub fn rhs_diff(d: &DiffState) -> Result<(SpectralField, SpectralField)> {
    rhs_diff_with(d, DEFAULT_CHORD_ARC_FLOOR)
}

pub fn rhs_diff_with(d: &DiffState, floor: f64) -> Result<(SpectralField, SpectralField)> {
    let grid = d.grid();
    let (a, b) = rhs_diff_coeffs(grid, d.bw.coeffs(), d.r.coeffs(), floor).map_err(|e| stamp(e, d.time))?;
    Ok((
        SpectralField::holomorphic_from_coeffs(grid, a),
        SpectralField::holomorphic_from_coeffs(grid, b),
    ))
}

/// Exact flow of w_t + q_α = 0, q_t − iw = 0, mode by mode.
pub fn propagate_coeffs(grid: &Grid, wh: &[C64], qh: &[C64], t: f64) -> (Vec<C64>, Vec<C64>) {
    let n = grid.n();
    let mut w = vec![ZERO; n];
    let mut q = vec![ZERO; n];
    for k in 0..n {
        let x = grid.xi()[k];
        let (w0, q0) = (wh[k], qh[k]);
        if x < 0.0 {
            let om = (-x).sqrt();
            let (s, c) = (om * t).sin_cos();
            w[k] = c * w0 + I * (om * s) * q0;
            q[k] = I * (s / om) * w0 + c * q0;
        } else if x == 0.0 {
            w[k] = w0;
            q[k] = q0 + I * t * w0;
        } else {
            if w0 == ZERO && q0 == ZERO {
                continue;
            }
            let kap = x.sqrt();
            let (sh, ch) = ((kap * t).sinh(), (kap * t).cosh());
            w[k] = ch * w0 - I * (x * sh / kap) * q0;
            q[k] = I * (sh / kap) * w0 + ch * q0;
        }
    }
    (w, q)
}

pub fn linear_propagator(s: &WaterState, dt: f64) -> WaterState {
    let grid = s.grid();
    let (w, q) = propagate_coeffs(grid, s.w.coeffs(), s.q.coeffs(), dt);
    let mut out = WaterState::from_coeffs(grid, s.time + dt, w, q);
    out.w = keep_flag(out.w, s.w.is_holomorphic());
    out.q = keep_flag(out.q, s.q.is_holomorphic());
    out
}

fn keep_flag(f: SpectralField, holo: bool) -> SpectralField {
    if holo {
        f
    } else {
        let g = f.grid().clone();
        SpectralField::from_coeffs(&g, f.into_coeffs())
    }
}

type Pair = (Vec<C64>, Vec<C64>);

fn axpy(a: &[C64], h: f64, b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y * h).collect()
}

/// One Lawson RK4 step for u' = Lu + N(u), where L is the linear water wave
/// operator and `nl` returns N(u) = rhs(u) − Lu.
pub fn lawson_rk4<F>(grid: &Grid, w: &[C64], q: &[C64], h: f64, nl: F) -> Result<Pair>
where
    F: Fn(&[C64], &[C64]) -> Result<Pair>,
{
    let half = 0.5 * h;
    let (k1w, k1q) = nl(w, q)?;
    let (ew, eq) = propagate_coeffs(grid, w, q, half);
    let (e1w, e1q) = propagate_coeffs(grid, &k1w, &k1q, half);
    let (k2w, k2q) = nl(&axpy(&ew, half, &e1w), &axpy(&eq, half, &e1q))?;
    let (k3w, k3q) = nl(&axpy(&ew, half, &k2w), &axpy(&eq, half, &k2q))?;
    let (fw, fq) = propagate_coeffs(grid, &k3w, &k3q, half);
    let (eew, eeq) = propagate_coeffs(grid, w, q, h);
    let (k4w, k4q) = nl(&axpy(&eew, h, &fw), &axpy(&eeq, h, &fq))?;
    let (g1w, g1q) = propagate_coeffs(grid, &k1w, &k1q, h);
    let s23w: Vec<C64> = k2w.iter().zip(&k3w).map(|(a, b)| a + b).collect();
    let s23q: Vec<C64> = k2q.iter().zip(&k3q).map(|(a, b)| a + b).collect();
    let (g23w, g23q) = propagate_coeffs(grid, &s23w, &s23q, half);
    let n = grid.n();
    let mut nw = vec![ZERO; n];
    let mut nq = vec![ZERO; n];
    let c = h / 6.0;
    for k in 0..n {
        nw[k] = eew[k] + c * (g1w[k] + 2.0 * g23w[k] + k4w[k]);
        nq[k] = eeq[k] + c * (g1q[k] + 2.0 * g23q[k] + k4q[k]);
    }
    Ok((nw, nq))
}

fn nl_wq(grid: &Grid, w: &[C64], q: &[C64], floor: f64) -> Result<Pair> {
    let (mut dw, mut dq) = rhs_wq_coeffs(grid, w, q, floor)?;
    for k in 0..grid.n() {
        let x = grid.xi()[k];
        dw[k] += I * x * q[k];
        dq[k] -= I * w[k];
    }
    Ok((dw, dq))
}

pub fn step(s: &WaterState, dt: f64) -> Result<WaterState> {
    step_with(s, dt, DEFAULT_CHORD_ARC_FLOOR)
}

pub fn step_with(s: &WaterState, dt: f64, floor: f64) -> Result<WaterState> {
    let grid = s.grid();
    let (w, q) = lawson_rk4(grid, s.w.coeffs(), s.q.coeffs(), dt, |w, q| nl_wq(grid, w, q, floor))
        .map_err(|e| stamp(e, s.time))?;
    let out = WaterState::from_coeffs(grid, s.time + dt, w, q);
    if out.w.coeffs().iter().chain(out.q.coeffs()).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NaNDetected { time: out.time });
    }
    Ok(out)
}

/// Lawson RK4 step of the differentiated system; its linear part has the same form.
pub fn step_diff(d: &DiffState, dt: f64, floor: f64) -> Result<DiffState> {
    let grid = d.grid().clone();
    let nl = |w: &[C64], r: &[C64]| -> Result<Pair> {
        let (mut dw, mut dr) = rhs_diff_coeffs(&grid, w, r, floor)?;
        for k in 0..grid.n() {
            let x = grid.xi()[k];
            dw[k] += I * x * r[k];
            dr[k] -= I * w[k];
        }
        Ok((dw, dr))
    };
    let (w, r) = lawson_rk4(&grid, d.bw.coeffs(), d.r.coeffs(), dt, nl).map_err(|e| stamp(e, d.time))?;
    Ok(DiffState {
        time: d.time + dt,
        bw: SpectralField::holomorphic_from_coeffs(&grid, w),
        r: SpectralField::holomorphic_from_coeffs(&grid, r),
    })
}

/// Phase-resolution bound 0.5/√ξ_max.
pub fn dt_max(grid: &Grid) -> f64 {
    dt_max_spec(&grid.spec())
}

pub fn dt_max_spec(spec: &crate::spectral::GridSpec) -> f64 {
    0.5 / spec.nyquist().sqrt()
}

/// Advection bound 0.25·Δα/max|b|; infinite when b vanishes.
pub fn cfl_dt(aux: &AuxFields, grid: &Grid) -> f64 {
    let bmax = aux.b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if bmax == 0.0 {
        f64::INFINITY
    } else {
        0.25 * grid.dx() / bmax
    }
}

/// Steps a trajectory with a fixed nominal dt, shortening the last step so
/// requested sample times are hit exactly.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub state: WaterState,
    pub dt: f64,
    pub floor: f64,
    pub steps_taken: u64,
}

impl Stepper {
    pub fn new(state: WaterState, dt: f64, floor: f64) -> Self {
        Stepper { state, dt, floor, steps_taken: 0 }
    }

    pub fn step_once(&mut self) -> Result<()> {
        self.state = step_with(&self.state, self.dt, self.floor)?;
        self.steps_taken += 1;
        Ok(())
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let tol = 1e-9 * self.dt;
        while self.state.time < t - tol {
            let h = self.dt.min(t - self.state.time);
            let mut next = step_with(&self.state, h, self.floor)?;
            if (next.time - t).abs() <= tol {
                next.time = t;
            }
            self.state = next;
            self.steps_taken += 1;
        }
        Ok(())
    }
}

/// Unnormalised Gaussian-in-frequency profile exp(−((ξ+ξ₀)w)²) on ξ < 0,
/// with Q̂ = Ŵ/√|ξ| so the data sits on the rightward-moving branch.
pub fn gaussian_profile(grid: &Arc<Grid>, width: f64, carrier: f64) -> WaterState {
    let n = grid.n();
    let mut wh = vec![ZERO; n];
    let mut qh = vec![ZERO; n];
    for k in 0..n {
        let x = grid.xi()[k];
        if x < 0.0 && grid.keep()[k] {
            let a = (-((x + carrier) * width).powi(2)).exp();
            wh[k] = C64::new(a, 0.0);
            qh[k] = C64::new(a / (-x).sqrt(), 0.0);
        }
    }
    WaterState::from_coeffs(grid, 0.0, wh, qh)
}

pub fn make_localized_data(eps: f64, width: f64, grid: &Arc<Grid>) -> Result<WaterState> {
    make_localized_data_with(eps, width, DEFAULT_CARRIER, grid, DEFAULT_CHORD_ARC_FLOOR)
}

/// Gaussian data scaled so that the weighted-energy size √𝒲ℋ equals `eps`.
pub fn make_localized_data_with(
    eps: f64,
    width: f64,
    carrier: f64,
    grid: &Arc<Grid>,
    floor: f64,
) -> Result<WaterState> {
    if !(eps >= 0.0 && eps.is_finite()) || !(width > 0.0) {
        return Err(Error::InfeasibleData(format!("eps={eps}, width={width}")));
    }
    if eps == 0.0 {
        return Ok(WaterState::zero(grid));
    }
    let base = gaussian_profile(grid, width, carrier);
    let size = |s: f64| -> Result<f64> {
        let st = base.scaled(s);
        st.check(floor).map_err(|e| Error::InfeasibleData(format!("scale {s:.3e}: {e}")))?;
        Ok(diagnostics::weighted_energy_with(&st, floor)
            .map_err(|e| Error::InfeasibleData(e.to_string()))?
            .sqrt())
    };
    let probe = 1e-8;
    let lin = size(probe)? / probe;
    if !(lin > 0.0 && lin.is_finite()) {
        return Err(Error::InfeasibleData("profile has no resolved content".into()));
    }
    let mut s = eps / lin;
    for _ in 0..60 {
        let r = size(s)?;
        if (r / eps - 1.0).abs() < 1e-10 {
            return Ok(base.scaled(s));
        }
        s *= eps / r;
    }
    let r = size(s)?;
    if (r / eps - 1.0).abs() < 1e-3 {
        Ok(base.scaled(s))
    } else {
        Err(Error::InfeasibleData(format!("normalisation stalled at size {r:.4e} for eps {eps:.4e}")))
    }
}

/// Gaussian data scaled to a prescribed peak |W| instead of a weighted-energy size.
///
/// The profile peaks at α = 0 where W equals the coefficient sum, so the scale
/// does not depend on which collocation points happen to be nearest the peak.
pub fn make_peak_data(amplitude: f64, width: f64, carrier: f64, grid: &Arc<Grid>) -> WaterState {
    let base = gaussian_profile(grid, width, carrier);
    let peak = base.w.coeffs().iter().sum::<C64>().norm();
    if peak == 0.0 {
        return base;
    }
    base.scaled(amplitude / peak)
}

//! Energies, Sobolev-type norms, control norms and the weighted energy.
//!
//! Pair norms use `‖(a,b)‖²_{Ḣ₀} = ‖a‖²_{L²} + ‖|D|^{1/2} b‖²_{L²}`, and
//! `Ḣₙ` adds the same quantity for each of the first n derivatives.

use crate::error::Result;
use crate::normalform::NormalFormState;
use crate::spectral::{derivative, frac_deriv, lp_block, lp_range, project_dealias, SpectralField, C64};
use crate::waterwave::{rhs_wq_with, DiffState, WaterState, DEFAULT_CHORD_ARC_FLOOR};

/// Quadratic energy ∫ ½|w|² + (1/4i)(q q̄_α − q̄ q_α) dα.
///
/// This is the quadratic form conserved by w_t + q_α = 0, q_t − iw = 0; the
/// q-part equals ½∫|ξ||q̂|² for holomorphic q.
pub fn energy0(w: &SpectralField, q: &SpectralField) -> f64 {
    let l = w.grid().length();
    let xi = w.grid().xi();
    let ww: f64 = w.coeffs().iter().map(|c| c.norm_sqr()).sum();
    // (1/4i)∫(q q̄_α − q̄ q_α) = −½ L Σ ξ |q̂|²
    let qq: f64 = q.coeffs().iter().zip(xi).map(|(c, &x)| -x * c.norm_sqr()).sum();
    0.5 * l * ww + 0.5 * l * qq
}

/// Cubic correction −¼∫(W̄²W_α + W²W̄_α) dα = −½ Re ∫ W̄² W_α dα.
pub fn energy_cubic(w: &SpectralField) -> f64 {
    let wa = derivative(w);
    let s: f64 = w
        .values()
        .iter()
        .zip(wa.values())
        .map(|(z, za)| (z.conj() * z.conj() * za).re)
        .sum();
    -0.5 * s * w.grid().dx()
}

/// Conserved energy of the full system.
pub fn energy(w: &SpectralField, q: &SpectralField) -> f64 {
    energy0(w, q) + energy_cubic(w)
}

/// Squared Ḣₙ norm of a pair.
pub fn pair_hn_sq(a: &SpectralField, b: &SpectralField, n: usize) -> f64 {
    let l = a.grid().length();
    let xi = a.grid().xi();
    let mut total = 0.0;
    for ((ca, cb), &x) in a.coeffs().iter().zip(b.coeffs()).zip(xi) {
        let ax = x.abs();
        let base = ca.norm_sqr() + ax * cb.norm_sqr();
        let mut w = 1.0;
        let mut acc = 0.0;
        for _ in 0..=n {
            acc += w;
            w *= ax * ax;
        }
        total += base * acc;
    }
    l * total
}

pub fn sobolev_norm(d: &DiffState, n: usize) -> f64 {
    pair_hn_sq(&d.bw, &d.r, n).sqrt()
}

/// Computable proxies for the control norms (A, B). BMO is replaced by the
/// sup over dyadic blocks of L∞, and the Besov piece by the sup over blocks of L².
pub fn control_norms(d: &DiffState) -> (f64, f64) {
    let grid = d.grid();
    let y = SpectralField::from_values(
        grid,
        d.bw.values().iter().map(|w| w / (w + 1.0)).collect(),
    );
    let dr = frac_deriv(&d.r, 0.5);
    let dw = frac_deriv(&d.bw, 0.5);
    let ra = derivative(&d.r);
    let (j0, j1) = lp_range(grid);
    let mut besov = 0.0f64;
    let mut bmo_w = 0.0f64;
    let mut bmo_r = 0.0f64;
    for j in j0..=j1 {
        besov = besov.max(lp_block(&dr, j).l2_norm());
        bmo_w = bmo_w.max(lp_block(&dw, j).max_abs());
        bmo_r = bmo_r.max(lp_block(&ra, j).max_abs());
    }
    let a = d.bw.max_abs() + y.max_abs() + dr.max_abs() + besov;
    (a, bmo_w + bmo_r)
}

/// Pointwise norm ‖W‖∞ + ‖R‖∞ + ‖|D|²W‖∞ + ‖|D|^{3/2}R‖∞.
pub fn x_norm(s: &WaterState) -> Result<f64> {
    let d = s.diff_state()?;
    Ok(x_norm_parts(&s.w, &d.r))
}

pub fn x_norm_parts(w: &SpectralField, r: &SpectralField) -> f64 {
    w.max_abs() + r.max_abs() + frac_deriv(w, 2.0).max_abs() + frac_deriv(r, 1.5).max_abs()
}

/// 2α∂_α f with the centered torus coordinate, re-projected onto holomorphic modes.
pub fn alpha_weighted_deriv(f: &SpectralField) -> SpectralField {
    let fa = derivative(f);
    let alpha = f.grid().alpha();
    let v = fa.values().iter().zip(alpha).map(|(z, &a)| z * (2.0 * a)).collect();
    project_dealias(&SpectralField::from_values(f.grid(), v))
}

/// ((S−2)W, (S−3)Q) with S = t∂_t + 2α∂_α and ∂_t taken from the flow.
pub fn scaling_action(s: &WaterState) -> Result<(SpectralField, SpectralField)> {
    scaling_action_with(s, DEFAULT_CHORD_ARC_FLOOR)
}

pub fn scaling_action_with(s: &WaterState, floor: f64) -> Result<(SpectralField, SpectralField)> {
    let t = C64::new(s.time, 0.0);
    let aw = alpha_weighted_deriv(&s.w);
    let aq = alpha_weighted_deriv(&s.q);
    let (mut sw, mut sq) = (aw.sub(&s.w.scale(C64::new(2.0, 0.0))), aq.sub(&s.q.scale(C64::new(3.0, 0.0))));
    if s.time != 0.0 {
        let (dw, dq) = rhs_wq_with(s, floor)?;
        sw = sw.add(&dw.scale(t));
        sq = sq.add(&dq.scale(t));
    }
    Ok((sw, sq))
}

/// 𝔄(w,q) = (w, q − Rw).
pub fn diagonalize(w: &SpectralField, q: &SpectralField, r: &SpectralField) -> (SpectralField, SpectralField) {
    (w.clone(), q.sub(&project_dealias(&r.mul(w))))
}

/// Inverse of [`diagonalize`]: (w, q + Rw).
pub fn undiagonalize(w: &SpectralField, q: &SpectralField, r: &SpectralField) -> (SpectralField, SpectralField) {
    (w.clone(), q.add(&project_dealias(&r.mul(w))))
}

/// ‖(W,Q)‖²_{Ḣ₀} + ‖(𝐖,R)‖²_{Ḣ₅} + ‖𝔄𝔖(W,Q)‖²_{Ḣ₁}. Its square root is the
/// "size" used to normalise data.
pub fn weighted_energy(s: &WaterState) -> Result<f64> {
    weighted_energy_with(s, DEFAULT_CHORD_ARC_FLOOR)
}

pub fn weighted_energy_with(s: &WaterState, floor: f64) -> Result<f64> {
    let d = s.diff_state()?;
    let (sw, sq) = scaling_action_with(s, floor)?;
    let (aw, aq) = diagonalize(&sw, &sq, &d.r);
    Ok(pair_hn_sq(&s.w, &s.q, 0) + pair_hn_sq(&d.bw, &d.r, 5) + pair_hn_sq(&aw, &aq, 1))
}

/// ‖(2α∂_αW̃ + t∂_αQ̃, 2α∂_αQ̃ − itW̃)‖_{Ḣ₀}.
pub fn tvf_quantity(nf: &NormalFormState) -> f64 {
    let t = nf.time;
    let a = alpha_weighted_deriv(&nf.wt).add(&derivative(&nf.qt).scale(C64::new(t, 0.0)));
    let b = alpha_weighted_deriv(&nf.qt).sub(&nf.wt.scale(C64::new(0.0, t)));
    pair_hn_sq(&a, &b, 0).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub e0: f64,
    pub e: f64,
    pub hn: [f64; 6],
    pub a: f64,
    pub b: f64,
    pub xnorm: f64,
    pub wh: f64,
    pub tvf: f64,
    pub chord_arc_min: f64,
    pub sqrtt_x: f64,
}

impl DiagnosticsRecord {
    pub fn compute(s: &WaterState, floor: f64) -> Result<Self> {
        let d = s.diff_state()?;
        let mut hn = [0.0; 6];
        for (n, h) in hn.iter_mut().enumerate() {
            *h = sobolev_norm(&d, n);
        }
        let (a, b) = control_norms(&d);
        let xnorm = x_norm_parts(&s.w, &d.r);
        let nf = crate::normalform::to_normal_form(s);
        Ok(DiagnosticsRecord {
            time: s.time,
            e0: energy0(&s.w, &s.q),
            e: energy(&s.w, &s.q),
            hn,
            a,
            b,
            xnorm,
            wh: weighted_energy_with(s, floor)?,
            tvf: tvf_quantity(&nf),
            chord_arc_min: s.chord_arc_min(),
            sqrtt_x: s.time.sqrt() * xnorm,
        })
    }

    pub fn csv_header() -> &'static str {
        "time,E0,E,H0,H1,H2,H3,H4,H5,A,B,X,WH,tvf,chord_arc_min,sqrtt_X"
    }

    pub fn fields(&self) -> Vec<f64> {
        let mut v = vec![self.time, self.e0, self.e];
        v.extend_from_slice(&self.hn);
        v.extend_from_slice(&[self.a, self.b, self.xnorm, self.wh, self.tvf, self.chord_arc_min, self.sqrtt_x]);
        v
    }

    pub fn csv_row(&self) -> String {
        self.fields().iter().map(|x| crate::harness::io::fmt_f64(*x)).collect::<Vec<_>>().join(",")
    }
}

//! Normal form variables, the cubic source terms and their
//! resonant / nonresonant / null split, and the flow-based residual check.

use std::sync::Arc;

use crate::diagnostics::pair_hn_sq;
use crate::error::Result;
use crate::spectral::{derivative, project_dealias, Grid, SpectralField, C64, I};
use crate::waterwave::{propagate_coeffs, step_with, WaterState, DEFAULT_CHORD_ARC_FLOOR};

#[derive(Clone, Debug)]
pub struct NormalFormState {
    pub time: f64,
    pub wt: SpectralField,
    pub qt: SpectralField,
}

/// W̃ = W − 2P[Re W · W_α], Q̃ = Q − 2P[Re W · R].
pub fn to_normal_form(s: &WaterState) -> NormalFormState {
    let grid = s.grid();
    let wa = derivative(&s.w);
    let qa = grid.inverse(&grid.deriv_coeffs(s.q.coeffs()));
    let n = grid.n();
    let wv = s.w.values();
    let wav = wa.values();
    // R = Q_α/(1+W_α), projected before it enters the product
    let rv: Vec<C64> = (0..n).map(|k| qa[k] / (wav[k] + 1.0)).collect();
    let rproj = grid.inverse(&grid.project_values(rv));
    let c1: Vec<C64> = (0..n).map(|k| 2.0 * wv[k].re * wav[k]).collect();
    let c2: Vec<C64> = (0..n).map(|k| 2.0 * wv[k].re * rproj[k]).collect();
    let p1 = grid.project_values(c1);
    let p2 = grid.project_values(c2);
    let wt: Vec<C64> = s.w.coeffs().iter().zip(&p1).map(|(a, b)| a - b).collect();
    let qt: Vec<C64> = s.q.coeffs().iter().zip(&p2).map(|(a, b)| a - b).collect();
    NormalFormState {
        time: s.time,
        wt: SpectralField::holomorphic_from_coeffs(grid, wt),
        qt: SpectralField::holomorphic_from_coeffs(grid, qt),
    }
}

#[derive(Clone, Debug)]
pub struct CubicSources {
    pub g3r: SpectralField,
    pub g3nr: SpectralField,
    pub g3null: SpectralField,
    pub k3r: SpectralField,
    pub k3nr: SpectralField,
    pub k3null: SpectralField,
}

impl CubicSources {
    pub fn g_total(&self) -> SpectralField {
        self.g3r.add(&self.g3nr).add(&self.g3null)
    }
    pub fn k_total(&self) -> SpectralField {
        self.k3r.add(&self.k3nr).add(&self.k3null)
    }
}

/// Which variables feed the cubic forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CubicArgs {
    /// (W, R) of the state itself.
    Original,
    /// (W̃, Q̃_α) of its normal form.
    NormalForm,
}

/// Pointwise helpers on collocation values. Inner P and P̄ are exact
/// spectral projections (P̄ = I − P); the outer P also dealiases.
struct Ops<'a> {
    grid: &'a Grid,
}

impl<'a> Ops<'a> {
    fn p(&self, v: &[C64]) -> Vec<C64> {
        let mut c = self.grid.forward(v);
        for (z, &x) in c.iter_mut().zip(self.grid.xi()) {
            if x > 0.0 {
                *z = C64::new(0.0, 0.0);
            }
        }
        self.grid.inverse(&c)
    }
    fn pbar(&self, v: &[C64]) -> Vec<C64> {
        let p = self.p(v);
        v.iter().zip(&p).map(|(a, b)| a - b).collect()
    }
    fn d(&self, v: &[C64]) -> Vec<C64> {
        self.grid.inverse(&self.grid.deriv_coeffs(&self.grid.forward(v)))
    }
    fn outer(&self, grid: &Arc<Grid>, v: Vec<C64>) -> SpectralField {
        SpectralField::holomorphic_from_coeffs(grid, grid.project_values(v))
    }
}

fn zip3(a: &[C64], b: &[C64], c: &[C64], f: impl Fn(C64, C64, C64) -> C64) -> Vec<C64> {
    a.iter().zip(b).zip(c).map(|((&x, &y), &z)| f(x, y, z)).collect()
}

fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn cj(a: &[C64]) -> Vec<C64> {
    a.iter().map(|z| z.conj()).collect()
}

fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// The six split source terms for inputs (W, R); 𝐖 = W_α.
pub fn cubic_sources_from(w: &SpectralField, r: &SpectralField) -> CubicSources {
    let grid = w.grid().clone();
    let ops = Ops { grid: &grid };
    let wv = w.values();
    let bw = derivative(w);
    let b = bw.values();
    let rv = r.values();
    let ra = derivative(r);
    let ra = ra.values();
    let rew: Vec<f64> = wv.iter().map(|z| z.re).collect();
    let n = grid.n();

    let rb: Vec<C64> = mul(rv, b);
    let rb_a = ops.d(&rb);
    // R𝐖̄ − R̄𝐖 and its negative
    let x = sub(&mul(rv, &cj(b)), &mul(&cj(rv), b));
    let px_a = ops.d(&ops.p(&x));
    let neg_x: Vec<C64> = x.iter().map(|z| -z).collect();
    let p_negx = ops.p(&neg_x);

    let g3r = ops.outer(&grid, (0..n).map(|k| rb_a[k] * wv[k].conj() + b[k] * rv[k] * b[k].conj()).collect());
    let g3nr = ops.outer(&grid, (0..n).map(|k| rb_a[k] * wv[k] + b[k] * b[k] * rv[k]).collect());
    let g3null = ops.outer(
        &grid,
        (0..n)
            .map(|k| {
                -2.0 * px_a[k] * rew[k]
                    + b[k].conj() * (b[k] * rv[k].conj() - b[k].conj() * rv[k])
                    + b[k] * p_negx[k]
            })
            .collect(),
    );

    let zero = SpectralField::zeros(&grid);
    let k3nr = ops.outer(&grid, zip3(rv, b, rv, |r1, bb, r2| r1.conj() * bb.conj() * r2));
    // P̄[R̄𝐖 − R𝐖̄] = P̄[−x]
    let pbar_negx = ops.pbar(&neg_x);
    let abs_r2: Vec<C64> = rv.iter().map(|z| C64::new(z.norm_sqr(), 0.0)).collect();
    let p_abs_a = ops.d(&ops.p(&abs_r2));
    let k3null = ops.outer(
        &grid,
        (0..n)
            .map(|k| {
                -rv[k] * pbar_negx[k]
                    + 2.0 * p_abs_a[k] * rew[k]
                    + 2.0 * (rv[k] * ra[k] + I * b[k] * b[k]) * rew[k]
            })
            .collect(),
    );
    CubicSources { g3r, g3nr, g3null, k3r: zero, k3nr, k3null }
}

/// G̃⁽³⁾, K̃⁽³⁾ evaluated directly from their unsplit expressions.
pub fn cubic_total_from(w: &SpectralField, r: &SpectralField) -> (SpectralField, SpectralField) {
    let grid = w.grid().clone();
    let ops = Ops { grid: &grid };
    let n = grid.n();
    let wv = w.values();
    let bw = derivative(w);
    let b = bw.values();
    let rv = r.values();
    let rad = derivative(r);
    let ra = rad.values();
    let rew: Vec<f64> = wv.iter().map(|z| z.re).collect();

    let x = sub(&mul(rv, &cj(b)), &mul(&cj(rv), b));
    let px_a = ops.d(&ops.p(&x));
    let rb_a = ops.d(&mul(rv, b));
    let p_rbw = ops.p(&mul(&cj(rv), b));
    let pb_rbw = ops.pbar(&mul(rv, &cj(b)));
    let g = ops.outer(
        &grid,
        (0..n)
            .map(|k| {
                2.0 * (-px_a[k] * rew[k] + rb_a[k] * rew[k] + b[k] * (b[k] * rv[k]).re)
                    - (b[k].conj() * b[k].conj() * rv[k] - b[k] * (p_rbw[k] + pb_rbw[k]))
            })
            .collect(),
    );

    let rpr: Vec<C64> = (0..n).map(|k| (rv[k] + rv[k].conj()) * ra[k]).collect();
    let p_rpr = ops.p(&rpr);
    let p_rra = ops.p(&(0..n).map(|k| rv[k] * ra[k].conj()).collect::<Vec<_>>());
    let neg_x: Vec<C64> = x.iter().map(|z| -z).collect();
    let pbar_negx = ops.pbar(&neg_x);
    let inner: Vec<C64> = (0..n)
        .map(|k| p_rpr[k] * rew[k] + I * b[k] * b[k] * rew[k] + p_rra[k] * rew[k])
        .collect();
    let p_inner = ops.p(&inner);
    let k = ops.outer(
        &grid,
        (0..n)
            .map(|k| 2.0 * p_inner[k] + rv[k].conj() * b[k].conj() * rv[k] - rv[k] * pbar_negx[k])
            .collect(),
    );
    (g, k)
}

pub fn cubic_sources(s: &WaterState, args: CubicArgs) -> Result<CubicSources> {
    match args {
        CubicArgs::Original => {
            let d = s.diff_state()?;
            Ok(cubic_sources_from(&s.w, &d.r))
        }
        CubicArgs::NormalForm => {
            let nf = to_normal_form(s);
            Ok(cubic_sources_from(&nf.wt, &derivative(&nf.qt)))
        }
    }
}

/// (G̃, K̃) = (∂_tW̃ + ∂_αQ̃, ∂_tQ̃ − iW̃) from the full flow.
///
/// The flow is stepped to t ± h, t ± 2h, the normal form variables are pulled
/// back by the exact linear propagator, and the pulled-back curve is
/// differentiated with the 4th-order centered stencil. Pulling back removes
/// the fast linear oscillation, so the stencil only sees the slow cubic drift.
pub fn nf_residual(s: &WaterState, dt_probe: f64) -> Result<(SpectralField, SpectralField)> {
    nf_residual_with(s, dt_probe, 4, DEFAULT_CHORD_ARC_FLOOR)
}

pub fn nf_residual_with(
    s: &WaterState,
    h: f64,
    substeps: usize,
    floor: f64,
) -> Result<(SpectralField, SpectralField)> {
    let grid = s.grid().clone();
    let sub = h / substeps.max(1) as f64;
    let walk = |dir: f64| -> Result<Vec<(Vec<C64>, Vec<C64>)>> {
        let mut st = s.clone();
        let mut out = Vec::with_capacity(2);
        for m in 1..=2 {
            for _ in 0..substeps.max(1) {
                st = step_with(&st, dir * sub, floor)?;
            }
            let nf = to_normal_form(&st);
            let tau = dir * h * m as f64;
            out.push(propagate_coeffs(&grid, nf.wt.coeffs(), nf.qt.coeffs(), -tau));
        }
        Ok(out)
    };
    let fwd = walk(1.0)?;
    let bwd = walk(-1.0)?;
    let n = grid.n();
    let mut g = vec![C64::new(0.0, 0.0); n];
    let mut kk = vec![C64::new(0.0, 0.0); n];
    let c = 1.0 / (12.0 * h);
    for i in 0..n {
        g[i] = (bwd[1].0[i] - 8.0 * bwd[0].0[i] + 8.0 * fwd[0].0[i] - fwd[1].0[i]) * c;
        kk[i] = (bwd[1].1[i] - 8.0 * bwd[0].1[i] + 8.0 * fwd[0].1[i] - fwd[1].1[i]) * c;
    }
    Ok((
        SpectralField::holomorphic_from_coeffs(&grid, g),
        SpectralField::holomorphic_from_coeffs(&grid, kk),
    ))
}

/// Ḣ₀ size of a (G, K) pair.
pub fn pair_size(g: &SpectralField, k: &SpectralField) -> f64 {
    pair_hn_sq(g, k, 0).sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct NullReport {
    /// sup of each null bilinear over sup of a generic bilinear of equal amplitude.
    pub ratios: [f64; 3],
}

impl NullReport {
    pub fn worst(&self) -> f64 {
        self.ratios.iter().cloned().fold(0.0, f64::max)
    }
}

/// Evaluate W̃_αQ̄̃_α − W̄̃_αQ̃_α, (|Q̃|²)_α and Q̃_αQ̃_αα + iW̃_α² against
/// |W̃_α||Q̃_α|, 2|Q̃||Q̃_α| and |Q̃_αQ̃_αα|.
pub fn null_forms(wt: &SpectralField, qt: &SpectralField) -> NullReport {
    let grid = wt.grid().clone();
    let wa = derivative(wt);
    let qa = derivative(qt);
    let qaa = derivative(&qa);
    let (wa, qa, qaa, q) = (wa.values(), qa.values(), qaa.values(), qt.values());
    let n = grid.n();
    let abs_q2: Vec<C64> = q.iter().map(|z| C64::new(z.norm_sqr(), 0.0)).collect();
    let d_abs = grid.inverse(&grid.deriv_coeffs(&grid.forward(&abs_q2)));
    let mut num = [0.0f64; 3];
    let mut den = [0.0f64; 3];
    for k in 0..n {
        num[0] = num[0].max((wa[k] * qa[k].conj() - wa[k].conj() * qa[k]).norm());
        den[0] = den[0].max(wa[k].norm() * qa[k].norm());
        num[1] = num[1].max(d_abs[k].norm());
        den[1] = den[1].max(2.0 * q[k].norm() * qa[k].norm());
        num[2] = num[2].max((qa[k] * qaa[k] + I * wa[k] * wa[k]).norm());
        den[2] = den[2].max((qa[k] * qaa[k]).norm());
    }
    let mut ratios = [0.0; 3];
    for i in 0..3 {
        ratios[i] = if den[i] == 0.0 { 0.0 } else { num[i] / den[i] };
    }
    NullReport { ratios }
}

/// Worst null-to-generic ratio; 0 for the zero field.
pub fn null_cancellation_check(wt: &SpectralField, qt: &SpectralField) -> f64 {
    null_forms(wt, qt).worst()
}

/// Convenience: the diagonal variables of a normal-form state feed the null check.
pub fn normal_form_dealiased(nf: &NormalFormState) -> NormalFormState {
    NormalFormState { time: nf.time, wt: project_dealias(&nf.wt), qt: project_dealias(&nf.qt) }
}

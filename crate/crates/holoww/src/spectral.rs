//! Periodic grid, Fourier transforms and the Fourier multipliers built on them.
//!
//! Conventions: the forward transform carries the 1/N factor, so coefficients
//! are Fourier-series amplitudes and `‖f‖² = L Σ |f̂(ξ)|²`. Frequencies follow
//! FFT ordering with `ξ_k = 2πk/L`, `k ∈ [-N/2, N/2)`; the Nyquist mode is
//! negative. "Holomorphic" means supported in `ξ ≤ 0`, and the zero mode
//! belongs to the holomorphic projection.

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

pub use rustfft::num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub n_points: usize,
    pub length: f64,
    pub dealias_fraction: f64,
}

impl GridSpec {
    pub fn new(n_points: usize, length: f64, dealias_fraction: f64) -> Result<Self> {
        let spec = GridSpec { n_points, length, dealias_fraction };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 4 || !self.n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 4, got {}",
                self.n_points
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {}", self.length)));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias_fraction must lie in (0,1], got {}",
                self.dealias_fraction
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Largest resolved |ξ| (the Nyquist frequency π/Δα).
    pub fn nyquist(&self) -> f64 {
        PI / self.dx()
    }

    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_fraction * self.nyquist()
    }

    /// Frequency of coefficient slot `k` in FFT ordering.
    pub fn xi(&self, k: usize) -> f64 {
        let n = self.n_points as i64;
        let k = k as i64;
        let m = if k < n / 2 { k } else { k - n };
        2.0 * PI * m as f64 / self.length
    }

    /// Centered coordinate of grid point `j`, in (-L/2, L/2].
    pub fn alpha(&self, j: usize) -> f64 {
        let a = j as f64 * self.dx();
        if j <= self.n_points / 2 {
            a
        } else {
            a - self.length
        }
    }
}

/// A grid with its FFT plans and frequency tables. Shared through `Arc`.
pub struct Grid {
    spec: GridSpec,
    xi: Vec<f64>,
    alpha: Vec<f64>,
    keep: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Grid>> {
        spec.validate()?;
        let n = spec.n_points;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let xi: Vec<f64> = (0..n).map(|k| spec.xi(k)).collect();
        let alpha = (0..n).map(|j| spec.alpha(j)).collect();
        let cut = spec.dealias_cutoff() * (1.0 + 1e-12);
        let keep = xi.iter().map(|x| x.abs() <= cut).collect();
        Ok(Arc::new(Grid { spec, xi, alpha, keep, fwd, inv }))
    }

    pub fn with(n_points: usize, length: f64, dealias_fraction: f64) -> Result<Arc<Grid>> {
        Grid::new(GridSpec::new(n_points, length, dealias_fraction)?)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }
    pub fn n(&self) -> usize {
        self.spec.n_points
    }
    pub fn length(&self) -> f64 {
        self.spec.length
    }
    pub fn dx(&self) -> f64 {
        self.spec.dx()
    }
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
    /// Dealiasing mask: true where |ξ| is at or below the cutoff.
    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.spec == other.spec
    }

    pub fn forward(&self, values: &[C64]) -> Vec<C64> {
        let mut buf = values.to_vec();
        self.forward_in_place(&mut buf);
        buf
    }

    pub fn inverse(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut buf = coeffs.to_vec();
        self.inverse_in_place(&mut buf);
        buf
    }

    pub fn forward_in_place(&self, buf: &mut [C64]) {
        assert_eq!(buf.len(), self.n(), "buffer length does not match grid");
        self.fwd.process(buf);
        let s = 1.0 / self.n() as f64;
        for z in buf.iter_mut() {
            *z *= s;
        }
    }

    pub fn inverse_in_place(&self, buf: &mut [C64]) {
        assert_eq!(buf.len(), self.n(), "buffer length does not match grid");
        self.inv.process(buf);
    }

    /// Apply a real symbol σ(ξ) to coefficients.
    pub fn apply_symbol(&self, coeffs: &[C64], symbol: impl Fn(f64) -> C64) -> Vec<C64> {
        coeffs.iter().zip(&self.xi).map(|(c, &x)| c * symbol(x)).collect()
    }

    /// ∂_α in coefficient space.
    pub fn deriv_coeffs(&self, coeffs: &[C64]) -> Vec<C64> {
        coeffs.iter().zip(&self.xi).map(|(c, &x)| c * C64::new(0.0, x)).collect()
    }

    /// Zero positive frequencies and everything above the dealias cutoff.
    pub fn holo_dealias_in_place(&self, coeffs: &mut [C64]) {
        for ((c, &x), &k) in coeffs.iter_mut().zip(&self.xi).zip(&self.keep) {
            if x > 0.0 || !k {
                *c = C64::new(0.0, 0.0);
            }
        }
    }

    /// Collocation values → dealiased holomorphic coefficients.
    pub fn project_values(&self, values: Vec<C64>) -> Vec<C64> {
        let mut buf = values;
        self.forward_in_place(&mut buf);
        self.holo_dealias_in_place(&mut buf);
        buf
    }

    /// Grid with the same period and `factor` times as many points.
    pub fn refine(&self, factor: usize) -> Result<Arc<Grid>> {
        Grid::new(GridSpec {
            n_points: self.n() * factor,
            ..self.spec
        })
    }

    /// Re-express coefficients on another grid of the same period
    /// (zero-padding or truncation by frequency).
    pub fn transfer_coeffs(&self, coeffs: &[C64], target: &Grid) -> Vec<C64> {
        assert!((self.length() - target.length()).abs() <= 1e-12 * self.length());
        let n = self.n() as i64;
        let m = target.n() as i64;
        let mut out = vec![C64::new(0.0, 0.0); target.n()];
        for (k, c) in coeffs.iter().enumerate() {
            let k = k as i64;
            let freq = if k < n / 2 { k } else { k - n };
            if freq >= -m / 2 && freq < m / 2 {
                let slot = if freq >= 0 { freq } else { freq + m };
                out[slot as usize] = *c;
            }
        }
        out
    }
}

/// A complex field on a grid, stored both as samples and coefficients.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    values: Vec<C64>,
    coeffs: Vec<C64>,
    holomorphic: bool,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        let z = vec![C64::new(0.0, 0.0); grid.n()];
        SpectralField { grid: grid.clone(), values: z.clone(), coeffs: z, holomorphic: true }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<C64>) -> Self {
        assert_eq!(values.len(), grid.n());
        let coeffs = grid.forward(&values);
        SpectralField { grid: grid.clone(), values, coeffs, holomorphic: false }
    }

    pub fn from_real(grid: &Arc<Grid>, values: &[f64]) -> Self {
        Self::from_values(grid, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<C64>) -> Self {
        assert_eq!(coeffs.len(), grid.n());
        let values = grid.inverse(&coeffs);
        SpectralField { grid: grid.clone(), values, coeffs, holomorphic: false }
    }

    /// Coefficients already known to vanish for ξ > 0.
    pub fn holomorphic_from_coeffs(grid: &Arc<Grid>, coeffs: Vec<C64>) -> Self {
        let mut f = Self::from_coeffs(grid, coeffs);
        f.holomorphic = true;
        f
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.alpha().iter().map(|&a| f(a)).collect();
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }
    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }
    pub fn is_holomorphic(&self) -> bool {
        self.holomorphic
    }

    /// Largest |coefficient| at ξ > 0 relative to the largest overall.
    pub fn holomorphy_defect(&self) -> f64 {
        let all = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if all == 0.0 {
            return 0.0;
        }
        let pos = self
            .coeffs
            .iter()
            .zip(self.grid.xi())
            .filter(|(_, &x)| x > 0.0)
            .map(|(c, _)| c.norm())
            .fold(0.0, f64::max);
        pos / all
    }

    pub fn map_coeffs(&self, f: impl Fn(f64, C64) -> C64) -> SpectralField {
        let c = self.coeffs.iter().zip(self.grid.xi()).map(|(&c, &x)| f(x, c)).collect();
        SpectralField::from_coeffs(&self.grid, c)
    }

    pub fn map_values(&self, f: impl Fn(C64) -> C64) -> SpectralField {
        SpectralField::from_values(&self.grid, self.values.iter().map(|&z| f(z)).collect())
    }

    /// Pointwise combination of two fields on the same grid (no dealiasing).
    pub fn zip_values(&self, other: &SpectralField, f: impl Fn(C64, C64) -> C64) -> SpectralField {
        assert!(self.grid.same_as(&other.grid), "grid mismatch");
        let v = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        SpectralField::from_values(&self.grid, v)
    }

    pub fn mul(&self, other: &SpectralField) -> SpectralField {
        self.zip_values(other, |a, b| a * b)
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.linear_combo(other, 1.0, 1.0);
        out.holomorphic = self.holomorphic && other.holomorphic;
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.linear_combo(other, 1.0, -1.0);
        out.holomorphic = self.holomorphic && other.holomorphic;
        out
    }

    fn linear_combo(&self, other: &SpectralField, a: f64, b: f64) -> SpectralField {
        assert!(self.grid.same_as(&other.grid), "grid mismatch");
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x * a + y * b).collect();
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x * a + y * b).collect();
        SpectralField { grid: self.grid.clone(), values, coeffs, holomorphic: false }
    }

    pub fn scale(&self, s: C64) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z * s).collect(),
            coeffs: self.coeffs.iter().map(|z| z * s).collect(),
            holomorphic: self.holomorphic,
        }
    }

    pub fn conj(&self) -> SpectralField {
        SpectralField::from_values(&self.grid, self.values.iter().map(|z| z.conj()).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// L² norm via Parseval.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.length() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// ‖|D|^s f‖_{L²}.
    pub fn hdot_norm(&self, s: f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(self.grid.xi())
            .map(|(c, &x)| if x == 0.0 { 0.0 } else { x.abs().powf(2.0 * s) * c.norm_sqr() })
            .sum();
        (self.grid.length() * sum).sqrt()
    }

    /// ∫ f ḡ dα by Parseval.
    pub fn inner(&self, other: &SpectralField) -> C64 {
        assert!(self.grid.same_as(&other.grid), "grid mismatch");
        let s: C64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum();
        s * self.grid.length()
    }

    pub fn mean(&self) -> C64 {
        self.coeffs[0]
    }

    /// Binary record: n_points (u64), length (f64), time (f64), flags (u64),
    /// then the coefficients as little-endian (re, im) f64 pairs.
    pub fn write_record<W: Write>(&self, out: &mut W, time: f64) -> std::io::Result<()> {
        out.write_all(&(self.grid.n() as u64).to_le_bytes())?;
        out.write_all(&self.grid.length().to_le_bytes())?;
        out.write_all(&time.to_le_bytes())?;
        let flags: u64 = if self.holomorphic { 1 } else { 0 };
        out.write_all(&flags.to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.coeffs.len());
        for c in &self.coeffs {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
        out.write_all(&buf)
    }

    /// Inverse of [`write_record`](Self::write_record). Returns the field and its time stamp.
    /// The grid must match the record header.
    pub fn read_record<R: Read>(input: &mut R, grid: &Arc<Grid>) -> Result<(SpectralField, f64)> {
        let mut word = [0u8; 8];
        let mut next = |input: &mut R| -> Result<[u8; 8]> {
            input
                .read_exact(&mut word)
                .map_err(|e| Error::Checkpoint(format!("truncated header: {e}")))?;
            Ok(word)
        };
        let n = u64::from_le_bytes(next(input)?) as usize;
        let length = f64::from_le_bytes(next(input)?);
        let time = f64::from_le_bytes(next(input)?);
        let flags = u64::from_le_bytes(next(input)?);
        if n != grid.n() || length != grid.length() {
            return Err(Error::Checkpoint(format!(
                "record grid (n={n}, L={length}) does not match ({}, {})",
                grid.n(),
                grid.length()
            )));
        }
        let mut raw = vec![0u8; 16 * n];
        input
            .read_exact(&mut raw)
            .map_err(|e| Error::Checkpoint(format!("truncated coefficients: {e}")))?;
        let coeffs = raw
            .chunks_exact(16)
            .map(|b| {
                let re = f64::from_le_bytes(b[..8].try_into().unwrap());
                let im = f64::from_le_bytes(b[8..].try_into().unwrap());
                C64::new(re, im)
            })
            .collect();
        let mut f = SpectralField::from_coeffs(grid, coeffs);
        f.holomorphic = flags & 1 == 1;
        Ok((f, time))
    }
}

/// P: keep ξ ≤ 0 (zero mode included), drop ξ > 0.
pub fn project_neg(f: &SpectralField) -> SpectralField {
    let mut out = f.map_coeffs(|x, c| if x > 0.0 { C64::new(0.0, 0.0) } else { c });
    out.holomorphic = true;
    out
}

/// P̄ = I − P: keep ξ > 0 only.
pub fn project_pos(f: &SpectralField) -> SpectralField {
    f.map_coeffs(|x, c| if x > 0.0 { c } else { C64::new(0.0, 0.0) })
}

/// Hilbert transform, symbol −i·sgn(ξ).
pub fn hilbert(f: &SpectralField) -> SpectralField {
    f.map_coeffs(|x, c| {
        if x > 0.0 {
            -I * c
        } else if x < 0.0 {
            I * c
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// ½(I − iH) written out through [`hilbert`]. Agrees with [`project_neg`] off the zero mode.
pub fn project_neg_via_hilbert(f: &SpectralField) -> SpectralField {
    let h = hilbert(f);
    f.zip_values(&h, |a, b| 0.5 * (a - I * b))
}

/// |D|^s as the multiplier |ξ|^s; the zero mode is killed for s > 0.
pub fn frac_deriv(f: &SpectralField, s: f64) -> SpectralField {
    assert!(s >= 0.0, "fractional order must be nonnegative");
    if s == 0.0 {
        return f.clone();
    }
    let mut out = f.map_coeffs(|x, c| if x == 0.0 { C64::new(0.0, 0.0) } else { c * x.abs().powf(s) });
    out.holomorphic = f.holomorphic;
    out
}

pub fn derivative(f: &SpectralField) -> SpectralField {
    let mut out = f.map_coeffs(|x, c| c * C64::new(0.0, x));
    out.holomorphic = f.holomorphic;
    out
}

pub fn dealias(f: &SpectralField) -> SpectralField {
    let keep = f.grid().keep().to_vec();
    let c = f.coeffs().iter().zip(&keep).map(|(&c, &k)| if k { c } else { C64::new(0.0, 0.0) }).collect();
    let mut out = SpectralField::from_coeffs(f.grid(), c);
    out.holomorphic = f.holomorphic;
    out
}

/// P followed by dealiasing; the standard way a nonlinear product re-enters the holomorphic class.
pub fn project_dealias(f: &SpectralField) -> SpectralField {
    let mut c = f.coeffs().to_vec();
    f.grid().holo_dealias_in_place(&mut c);
    SpectralField::holomorphic_from_coeffs(f.grid(), c)
}

/// Dyadic block: |ξ| ∈ [2^j, 2^{j+1}).
pub fn lp_block(f: &SpectralField, j: i32) -> SpectralField {
    let lo = 2f64.powi(j);
    let hi = 2.0 * lo;
    let mut out = f.map_coeffs(|x, c| {
        let a = x.abs();
        if a >= lo && a < hi {
            c
        } else {
            C64::new(0.0, 0.0)
        }
    });
    out.holomorphic = f.holomorphic;
    out
}

/// Range of block indices that can be nonzero on this grid.
pub fn lp_range(grid: &Grid) -> (i32, i32) {
    let min = 2.0 * PI / grid.length();
    let max = grid.spec().nyquist();
    (min.log2().floor() as i32, max.log2().floor() as i32)
}

//! Brute-force oracles: O(N²) direct DFT multipliers, two-mode closed forms,
//! and a fine-grid product check. Small N only.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::normalform::to_normal_form;
use crate::spectral::{
    derivative, frac_deriv, hilbert, project_dealias, project_neg, project_neg_via_hilbert, Grid, SpectralField, C64, I,
};
use crate::waterwave::{propagate_coeffs, WaterState};

pub const ORACLE_TOL: f64 = 1e-11;

/// Deliberate corruptions, used to show the suite can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Faults {
    pub flip_hilbert_sign: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub error: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub n_points: usize,
    pub checks: Vec<Check>,
    pub elapsed_s: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Direct DFT with the solver's conventions: ĉ_k = (1/N) Σ_j f_j e^{−iξ_k α_j}.
pub fn direct_dft(grid: &Grid, values: &[C64]) -> Vec<C64> {
    let n = grid.n();
    let (xi, alpha) = (grid.xi(), grid.alpha());
    (0..n)
        .map(|k| values.iter().zip(alpha).map(|(f, &a)| f * (-I * (xi[k] * a)).exp()).sum::<C64>() / n as f64)
        .collect()
}

pub fn direct_idft(grid: &Grid, coeffs: &[C64]) -> Vec<C64> {
    let (xi, alpha) = (grid.xi(), grid.alpha());
    alpha
        .iter()
        .map(|&a| coeffs.iter().zip(xi).map(|(c, &x)| c * (I * (x * a)).exp()).sum())
        .collect()
}

/// Apply a Fourier multiplier by direct summation.
pub fn direct_multiplier(grid: &Grid, values: &[C64], symbol: impl Fn(f64) -> C64) -> Vec<C64> {
    let c = direct_dft(grid, values);
    let c: Vec<C64> = c.iter().zip(grid.xi()).map(|(z, &x)| z * symbol(x)).collect();
    direct_idft(grid, &c)
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Random band-limited field with coefficients in the dealiased band.
pub fn random_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng, holomorphic: bool) -> SpectralField {
    let mut c = vec![C64::new(0.0, 0.0); grid.n()];
    for (k, (&x, &keep)) in grid.xi().iter().zip(grid.keep()).enumerate() {
        if keep && !(holomorphic && x > 0.0) {
            c[k] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    if holomorphic {
        SpectralField::holomorphic_from_coeffs(grid, c)
    } else {
        SpectralField::from_coeffs(grid, c)
    }
}

pub fn run_oracles(n: usize, seed: u64, faults: Faults) -> OracleReport {
    let start = Instant::now();
    let grid = Grid::with(n, 2.0 * PI, 2.0 / 3.0).expect("oracle grid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut push = |name: &str, error: f64, tol: f64| {
        checks.push(Check { name: name.into(), error, tol, pass: error <= tol });
    };
    let hil = |f: &SpectralField| -> SpectralField {
        let h = hilbert(f);
        if faults.flip_hilbert_sign {
            h.scale(C64::new(-1.0, 0.0))
        } else {
            h
        }
    };
    let p_via_h = |f: &SpectralField| f.zip_values(&hil(f), |a, b| 0.5 * (a - I * b));

    // generic random samples, not band-limited
    let vals: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let f = SpectralField::from_values(&grid, vals.clone());

    push("forward transform vs direct DFT", max_diff(f.coeffs(), &direct_dft(&grid, &vals)), ORACLE_TOL);

    let sgn = |x: f64| if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 };
    let h_ref = direct_multiplier(&grid, &vals, |x| -I * sgn(x));
    push("Hilbert transform vs direct multiplier", max_diff(hil(&f).values(), &h_ref), ORACLE_TOL);

    let p_ref = direct_multiplier(&grid, &vals, |x| if x <= 0.0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    push("P vs direct multiplier", max_diff(project_neg(&f).values(), &p_ref), ORACLE_TOL);

    // ½(I − iH) differs from the sharp projection only at ξ = 0 and Nyquist;
    // compare on a field without those modes
    let mut c = f.coeffs().to_vec();
    c[0] = C64::new(0.0, 0.0);
    c[n / 2] = C64::new(0.0, 0.0);
    let f0 = SpectralField::from_coeffs(&grid, c);
    push(
        "P = (I - iH)/2 away from zero and Nyquist",
        max_diff(p_via_h(&f0).values(), project_neg(&f0).values()),
        ORACLE_TOL,
    );

    for s in [0.5, 1.0, 1.5, 2.0] {
        let r = direct_multiplier(&grid, &vals, |x| if x == 0.0 { C64::new(0.0, 0.0) } else { C64::new(x.abs().powf(s), 0.0) });
        push(&format!("|D|^{s} vs direct multiplier"), max_diff(frac_deriv(&f, s).values(), &r), ORACLE_TOL);
    }
    let semigroup = max_diff(frac_deriv(&frac_deriv(&f, 0.5), 1.0).values(), frac_deriv(&f, 1.5).values());
    push("|D|^1/2 |D|^1 = |D|^3/2", semigroup, ORACLE_TOL);

    // two-mode closed forms on the unit-period grid
    let e_m = SpectralField::from_fn(&grid, |a| (-I * a).exp());
    let e_p = SpectralField::from_fn(&grid, |a| (I * a).exp());
    push("P e^{-ia} = e^{-ia} (via H)", max_diff(p_via_h(&e_m).values(), e_m.values()), ORACLE_TOL);
    push("P e^{ia} = 0 (via H)", p_via_h(&e_p).max_abs(), ORACLE_TOL);
    let h_em: Vec<C64> = e_m.values().iter().map(|z| I * z).collect();
    push("H e^{-ia} = i e^{-ia}", max_diff(hil(&e_m).values(), &h_em), ORACLE_TOL);
    let d_em: Vec<C64> = e_m.values().iter().map(|z| -I * z).collect();
    push("d/da e^{-ia} = -i e^{-ia}", max_diff(derivative(&e_m).values(), &d_em), ORACLE_TOL);

    // normal form of W = εe^{−iα}, Q = 0: W̃ = εe^{−iα} + iε²(1 + e^{−2iα})
    let eps = 0.1;
    let w = e_m.scale(C64::new(eps, 0.0));
    let s = WaterState::new(0.0, project_dealias(&w), SpectralField::zeros(&grid)).expect("two-mode state");
    let nf = to_normal_form(&s);
    let expect: Vec<C64> = grid
        .alpha()
        .iter()
        .map(|&a| eps * (-I * a).exp() + I * eps * eps * (1.0 + (-2.0 * I * a).exp()))
        .collect();
    push("normal form of a single mode", max_diff(nf.wt.values(), &expect), ORACLE_TOL);
    push("normal form leaves Q = 0", nf.qt.max_abs(), ORACLE_TOL);

    // single-mode linear flow at ξ = −1: W = cos t, Q = i sin t for (1, 0) data
    let mut worst = 0.0f64;
    let k = grid.n() - 1;
    for t in [0.0, 0.3, 1.7, 10.0, 55.5, 100.0] {
        let mut wh = vec![C64::new(0.0, 0.0); n];
        wh[k] = C64::new(1.0, 0.0);
        let qh = vec![C64::new(0.0, 0.0); n];
        let (w1, q1) = propagate_coeffs(&grid, &wh, &qh, t);
        worst = worst.max((w1[k] - t.cos()).norm()).max((q1[k] - I * t.sin()).norm());
    }
    push("linear propagator, single mode", worst, ORACLE_TOL);

    // dealiased product vs a 4x fine-grid product truncated back
    let a = random_field(&grid, &mut rng, true);
    let b = random_field(&grid, &mut rng, true);
    let fine = grid.refine(4).expect("fine grid");
    let af = fine.inverse(&grid.transfer_coeffs(a.coeffs(), &fine));
    let bf = fine.inverse(&grid.transfer_coeffs(b.coeffs(), &fine));
    let pf: Vec<C64> = af.iter().zip(&bf).map(|(x, y)| x * y).collect();
    let mut pc = fine.transfer_coeffs(&fine.forward(&pf), &grid);
    grid.holo_dealias_in_place(&mut pc);
    let direct = project_dealias(&a.mul(&b));
    push("dealiased product vs fine-grid product", max_diff(direct.coeffs(), &pc), ORACLE_TOL);

    let pass = checks.iter().all(|c| c.pass);
    OracleReport { n_points: n, checks, elapsed_s: start.elapsed().as_secs_f64(), pass }
}

/// Keep the library's own helper honest too.
pub fn hilbert_projection_agrees(f: &SpectralField) -> f64 {
    max_diff(project_neg_via_hilbert(f).values(), project_neg(f).values())
}

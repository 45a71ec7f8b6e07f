//! The `O(1)` correction to the mean of linear statistics and the
//! `log Q_{n,β}` expansion built on it.
//!
//! For a measure on `[-2, 2]` with factor `P` and transform `g`, the raw
//! double integral is
//!
//! ```text
//! I[f] = (2πi)^{-2} ∮_{L_{2d}} f(z)/X^{1/2}(z) ∮_{L_d} g'(ζ)/(P(ζ)(z-ζ)) dζ dz
//! ```
//!
//! with `X^{1/2}` on the branch of [`crate::equilibrium::sqrt_x`] and both
//! contours counterclockwise. With these conventions the Gaussian
//! calibration `E Σλ² - n = 2/β - 1` gives `I[λ²] = -1`, so the reported
//! `integral_value` is `-I[f]` and the predicted shift of
//! `E Σf(λ_i) - n∫fρ` is `(2/β - 1)·integral_value`.

use num_complex::Complex64;
use serde::Serialize;

use crate::contour::{dist_to_cut, Contour};
use crate::equilibrium::{sqrt_x, EquilibriumMeasure};
use crate::error::{Error, Result};
use crate::potential::Polynomial;
use crate::quadrature::gauss_legendre_on;

/// Default node count per contour.
pub const DEFAULT_NODES: usize = 256;
/// Largest node count tried by the doubling loop.
pub const MAX_NODES: usize = 8192;
/// Agreement required between two successive node counts.
pub const DOUBLING_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct CorrectionReport {
    pub beta: f64,
    pub d: f64,
    pub nodes: usize,
    pub integral_value: f64,
    /// Imaginary part of the computed integral (zero up to rounding for real `f`).
    pub integral_imag: f64,
    pub prefactor: f64,
    pub predicted_shift: f64,
    /// Change of `integral_value` at the final doubling.
    pub doubling_change: f64,
}

/// The pieces of a one-cut measure entering the double integral.
pub trait CutData {
    fn factor(&self, z: Complex64) -> Complex64;
    fn g_prime(&self, z: Complex64) -> Complex64;
}

impl CutData for EquilibriumMeasure {
    fn factor(&self, z: Complex64) -> Complex64 {
        self.p_at(z)
    }
    fn g_prime(&self, z: Complex64) -> Complex64 {
        EquilibriumMeasure::g_prime(self, z)
    }
}

/// `P_t = tP + 1 - t` and `g_t = t·g + (1 - t)·g_0` along the Gaussian path.
pub struct Interpolated<'a> {
    pub eq: &'a EquilibriumMeasure,
    pub t: f64,
}

impl CutData for Interpolated<'_> {
    fn factor(&self, z: Complex64) -> Complex64 {
        self.eq.p_at(z) * self.t + (1.0 - self.t)
    }
    fn g_prime(&self, z: Complex64) -> Complex64 {
        let g0_prime = if z.norm() > 4.0 {
            // g_0 = 2/(z + X^{1/2}) avoids cancellation
            let x = sqrt_x(z);
            -2.0 * (1.0 + z / x) / ((z + x) * (z + x))
        } else {
            (1.0 - z / sqrt_x(z)) * 0.5
        };
        self.eq.g_prime(z) * self.t + g0_prime * (1.0 - self.t)
    }
}

/// `-I[f]` with `nodes` points on each contour; returns the complex value.
fn double_integral<C: CutData, F: Fn(Complex64) -> Complex64>(data: &C, f: &F, d: f64, nodes: usize) -> Result<Complex64> {
    let inner = Contour::new(d, nodes, d)?;
    let outer = Contour::new(2.0 * d, nodes, d)?;
    let inner_vals: Vec<Complex64> = inner
        .nodes
        .iter()
        .zip(&inner.weights)
        .map(|(&zeta, &w)| w * data.g_prime(zeta) / data.factor(zeta))
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (&z, &w) in outer.nodes.iter().zip(&outer.weights) {
        let s: Complex64 = inner.nodes.iter().zip(&inner_vals).map(|(&zeta, &h)| h / (z - zeta)).sum();
        total += w * f(z) / sqrt_x(z) * s;
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    Ok(-total / (two_pi_i * two_pi_i))
}

/// Integral with node doubling until two counts agree to [`DOUBLING_TOLERANCE`].
fn converged_integral<C: CutData, F: Fn(Complex64) -> Complex64>(data: &C, f: &F, d: f64, start: usize) -> Result<(Complex64, usize, f64)> {
    let mut n = start.max(16);
    let mut prev = double_integral(data, f, d, n)?;
    loop {
        let next_n = 2 * n;
        let next = double_integral(data, f, d, next_n)?;
        let change = (next - prev).norm();
        if change <= DOUBLING_TOLERANCE * (1.0 + next.norm()) {
            return Ok((next, next_n, change));
        }
        if next_n >= MAX_NODES {
            return Err(Error::Accuracy(format!(
                "contour quadrature not converged at N = {next_n}: last doubling changed the value by {change:.3e}"
            )));
        }
        n = next_n;
        prev = next;
    }
}

/// Checks `d` against the zeros of `P`, the cut and the support of `f`.
fn check_distance(eq: &EquilibriumMeasure, d: f64) -> Result<()> {
    Contour::checked(d, 16, d, eq.d_max).map(|_| ())
}

/// First-order correction for a test function `f` analytic within distance
/// `2d` of the cut (in the standard variable).
pub fn first_order_correction<F: Fn(Complex64) -> Complex64>(eq: &EquilibriumMeasure, f: F, beta: f64, d: f64) -> Result<CorrectionReport> {
    first_order_correction_with(eq, f, beta, d, DEFAULT_NODES)
}

pub fn first_order_correction_with<F: Fn(Complex64) -> Complex64>(
    eq: &EquilibriumMeasure,
    f: F,
    beta: f64,
    d: f64,
    nodes: usize,
) -> Result<CorrectionReport> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("β = {beta} must be positive")));
    }
    check_distance(eq, d)?;
    let (value, used, change) = converged_integral(eq, &f, d, nodes)?;
    let prefactor = 2.0 / beta - 1.0;
    Ok(CorrectionReport {
        beta,
        d,
        nodes: used,
        integral_value: value.re,
        integral_imag: value.im,
        prefactor,
        predicted_shift: prefactor * value.re,
        doubling_change: change,
    })
}

/// Correction for a polynomial test function given in the original variable.
pub fn polynomial_correction(eq: &EquilibriumMeasure, f: &Polynomial, beta: f64, d: f64) -> Result<CorrectionReport> {
    polynomial_correction_with(eq, f, beta, d, DEFAULT_NODES)
}

pub fn polynomial_correction_with(eq: &EquilibriumMeasure, f: &Polynomial, beta: f64, d: f64, nodes: usize) -> Result<CorrectionReport> {
    let fs = f.compose_affine(eq.map.shift, 1.0 / eq.map.scale);
    first_order_correction_with(eq, |z| fs.eval_complex(z), beta, d, nodes)
}

/// `0.4·d_max`, capped at `0.5`: inside the admissible range with margin.
pub fn default_distance(eq: &EquilibriumMeasure) -> f64 {
    if eq.d_max.is_finite() {
        (0.4 * eq.d_max).min(0.5)
    } else {
        0.5
    }
}

/// `log Q^{(0)}_{n,β}` of the Gaussian potential `λ²/2` by Selberg's formula.
pub fn selberg_log_q0(n: usize, beta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("β = {beta} must be positive")));
    }
    let nf = n as f64;
    let log_fact = libm::lgamma(nf + 1.0);
    let gammas: f64 = (1..=n).map(|j| libm::lgamma(beta * j as f64 / 2.0) - libm::lgamma(beta / 2.0)).sum();
    Ok(log_fact - (beta * nf * (nf - 1.0) / 4.0 + nf / 2.0) * (nf * beta / 2.0).ln()
        + nf / 2.0 * (2.0 * std::f64::consts::PI).ln()
        + gammas)
}

/// Itemized `log Q_{n,β}` expansion.
#[derive(Debug, Clone, Serialize)]
pub struct LogQReport {
    pub n: usize,
    pub beta: f64,
    pub d: f64,
    /// `log Q^{(0)}_{n,β}`.
    pub log_q0: f64,
    /// `n²·(β/2)·E_V` in the standard variable.
    pub energy_term: f64,
    /// `n²·(3/8)β`.
    pub gaussian_energy_term: f64,
    /// `n·(1 - β/2)·J`.
    pub correction_term: f64,
    /// t-averaged double integral `J`.
    pub j: f64,
    /// `-(n + βn(n-1)/2)·log(scale)` from mapping the support to `[-2, 2]`.
    pub jacobian_term: f64,
    pub log_q: f64,
}

/// Number of Gauss–Legendre nodes in `t`.
pub const T_NODES: usize = 16;

/// Asymptotic `log Q_{n,β}` for the potential of `eq`.
pub fn logq_expansion(eq: &EquilibriumMeasure, n: usize, beta: f64, d: f64) -> Result<LogQReport> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    check_distance(eq, d)?;
    let w = &eq.potential;
    let f_poly = w.sub(&Polynomial::gaussian());
    let f = |z: Complex64| f_poly.eval_complex(z);
    let nf = n as f64;

    let j = if f_poly.coeffs().iter().all(|&c| c == 0.0) || beta == 2.0 {
        0.0
    } else {
        let (ts, ws) = gauss_legendre_on(0.0, 1.0, T_NODES);
        let mut acc = 0.0;
        for (&t, &wt) in ts.iter().zip(&ws) {
            let data = Interpolated { eq, t };
            path_check(eq, t, d).map_err(|e| Error::Path { t, source: Box::new(e) })?;
            let (value, _, _) = converged_integral(&data, &f, d, DEFAULT_NODES).map_err(|e| Error::Path { t, source: Box::new(e) })?;
            acc += wt * value.re;
        }
        acc
    };

    let log_q0 = selberg_log_q0(n, beta)?;
    let e_standard = eq.energy() + eq.map.scale.ln();
    let energy_term = nf * nf * beta / 2.0 * e_standard;
    let gaussian_energy_term = nf * nf * 3.0 / 8.0 * beta;
    let correction_term = nf * (1.0 - beta / 2.0) * j;
    let jacobian_term = -(nf + beta * nf * (nf - 1.0) / 2.0) * eq.map.scale.ln();
    Ok(LogQReport {
        n,
        beta,
        d,
        log_q0,
        energy_term,
        gaussian_energy_term,
        correction_term,
        j,
        jacobian_term,
        log_q: log_q0 + energy_term + gaussian_energy_term + correction_term + jacobian_term,
    })
}

/// `P_t` positive on the cut with its zeros outside `L_{2d}`.
fn path_check(eq: &EquilibriumMeasure, t: f64, d: f64) -> Result<()> {
    let pt = eq.p.scale(t).add(&Polynomial::new(vec![1.0 - t]).unwrap());
    let inf = (0..=2048).map(|k| pt.eval(-2.0 + 4.0 * k as f64 / 2048.0)).fold(f64::INFINITY, f64::min);
    if inf <= 0.0 {
        return Err(Error::Violation { condition: "C2".into(), detail: format!("inf P_t = {inf:.3e}") });
    }
    if let Some(z) = pt.roots().into_iter().find(|&z| dist_to_cut(z) <= 2.0 * d) {
        return Err(Error::ContourTooWide { d, limit: 0.5 * dist_to_cut(z) });
    }
    Ok(())
}

/// `n·(E N_n[f]/n - ∫fρ)` predicted by the correction, for `f` in the original variable.
pub fn predicted_u(eq: &EquilibriumMeasure, f: &Polynomial, beta: f64, d: f64) -> Result<f64> {
    Ok(polynomial_correction(eq, f, beta, d)?.predicted_shift)
}

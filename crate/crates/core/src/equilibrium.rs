//! One-cut equilibrium measures of polynomial potentials.
//!
//! After the support `[a, b]` is found, everything is expressed in the
//! standard variable where the support is `[-2, 2]` and the density reads
//! `ρ(λ) = P(λ)√(4 - λ²) / 2π` with a polynomial `P` of degree `2m - 2`.
//!
//! Branch convention: `X^{1/2}(z) = √(z - 2)·√(z + 2)` with principal roots,
//! so `X^{1/2}(z) ~ z` at infinity and `X^{1/2}(λ + i0) = i√(4 - λ²)` on the
//! cut. With this branch the Stieltjes transform is
//! `g = (V' - P·X^{1/2}) / 2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::contour::{dist_to_cut, Contour};
use crate::error::{Error, Result};
use crate::potential::{check_growth, rescale_to_standard, AffineMap, Growth, Polynomial};
use crate::quadrature::chebyshev_angles;

/// Default number of Gauss–Chebyshev nodes.
pub const DEFAULT_QUADRATURE: usize = 256;
/// Tolerance on `inf P` below which condition C2 counts as violated.
pub const C2_TOLERANCE: f64 = 1e-8;

/// `X^{1/2}(z)` on the principal branch product.
pub fn sqrt_x(z: Complex64) -> Complex64 {
    (z - 2.0).sqrt() * (z + 2.0).sqrt()
}

/// Endpoint residuals of the one-cut conditions in `(centre, radius)`
/// coordinates, with their Jacobian.
fn endpoint_system(dv: &Polynomial, ddv: &Polynomial, c: f64, r: f64, angles: &[f64]) -> ([f64; 2], [[f64; 2]; 2]) {
    let n = angles.len() as f64;
    let (mut m_v, mut m_cv, mut m_vv, mut m_cvv, mut m_ccvv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &th in angles {
        let ct = th.cos();
        let x = c + r * ct;
        let v1 = dv.eval(x);
        let v2 = ddv.eval(x);
        m_v += v1;
        m_cv += ct * v1;
        m_vv += v2;
        m_cvv += ct * v2;
        m_ccvv += ct * ct * v2;
    }
    m_v /= n;
    m_cv /= n;
    m_vv /= n;
    m_cvv /= n;
    m_ccvv /= n;
    let f = [m_v, r * m_cv - 2.0];
    let jac = [[m_vv, m_cvv], [r * m_cvv, m_cv + r * m_ccvv]];
    (f, jac)
}

/// Support `[a, b]` of the one-cut equilibrium measure of `p`.
///
/// Solves `∫ V'/√((λ-a)(b-λ)) = 0` and `∫ λV'/√((λ-a)(b-λ)) = 2π` by damped
/// Newton in the centre/half-width variables. Fails with
/// [`Error::NotOneCut`] when Newton diverges or when the resulting density
/// is negative somewhere inside the support.
pub fn solve_support(p: &Polynomial) -> Result<(f64, f64)> {
    if let Growth::Fail(dir) = check_growth(p) {
        return Err(Error::Domain(format!("potential fails the growth condition ({dir:?})")));
    }
    let dv = p.derivative();
    let ddv = dv.derivative();
    let angles = chebyshev_angles(p.degree() + 8);

    let turning = dv.real_roots(1e-9);
    let (lo, hi) = (turning.first().copied().unwrap_or(0.0), turning.last().copied().unwrap_or(0.0));
    let m = p.degree() / 2;
    let central = binomial(2 * m, m) / 4f64.powi(m as i32);
    let r_mono = (2.0 / (2.0 * m as f64 * p.leading() * central)).powf(1.0 / (2.0 * m as f64));
    let c0 = 0.5 * (lo + hi);
    let r0 = (0.5 * (hi - lo) * 1.2).max(r_mono);

    let mut last_err = String::new();
    for scale in [1.0, 1.5, 0.75, 2.0, 3.0] {
        match newton_support(&dv, &ddv, c0, r0 * scale, &angles) {
            Ok((c, r)) => {
                let (a, b) = (c - r, c + r);
                let (w, _) = rescale_to_standard(p, a, b)?;
                let pfac = p_coefficients(&w);
                let inf = grid_min(&pfac, 4096);
                if inf < -C2_TOLERANCE {
                    return Err(Error::NotOneCut(format!(
                        "density factor P reaches {inf:.3e} < 0 inside the support [{a:.6}, {b:.6}]"
                    )));
                }
                return Ok((a, b));
            }
            Err(e) => last_err = e,
        }
    }
    Err(Error::NotOneCut(format!("endpoint Newton iteration failed: {last_err}")))
}

fn newton_support(dv: &Polynomial, ddv: &Polynomial, mut c: f64, mut r: f64, angles: &[f64]) -> std::result::Result<(f64, f64), String> {
    let norm = |f: &[f64; 2]| f[0].hypot(f[1]);
    let (mut f, mut jac) = endpoint_system(dv, ddv, c, r, angles);
    for _ in 0..200 {
        if norm(&f) < 1e-13 {
            return Ok((c, r));
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err("singular Jacobian".into());
        }
        let dc = (jac[1][1] * f[0] - jac[0][1] * f[1]) / det;
        let dr = (jac[0][0] * f[1] - jac[1][0] * f[0]) / det;
        let mut step = 1.0;
        let current = norm(&f);
        loop {
            let (nc, nr) = (c - step * dc, r - step * dr);
            if nr > 0.0 {
                let (nf, nj) = endpoint_system(dv, ddv, nc, nr, angles);
                if norm(&nf) < current || step < 1e-10 {
                    c = nc;
                    r = nr;
                    f = nf;
                    jac = nj;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-12 {
                return Err(format!("line search stalled at residual {current:.3e}"));
            }
        }
    }
    if norm(&f) < 1e-10 {
        Ok((c, r))
    } else {
        Err(format!("no convergence after 200 iterations (residual {:.3e})", norm(&f)))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Unnormalized coefficients of `P` for a potential already on `[-2, 2]`:
/// the `θ`-average of the divided difference `(W'(z) - W'(s))/(z - s)`,
/// `s = 2cos θ`, expanded in powers of `z`.
fn p_coefficients(w: &Polynomial) -> Polynomial {
    let dw = w.derivative();
    let d = dw.coeffs();
    if d.len() < 2 {
        return Polynomial::zero();
    }
    let angles = chebyshev_angles(d.len() + 4);
    let moments: Vec<f64> = (0..d.len())
        .map(|k| angles.iter().map(|t| (2.0 * t.cos()).powi(k as i32)).sum::<f64>() / angles.len() as f64)
        .collect();
    let coeffs = (0..d.len() - 1)
        .map(|i| ((i + 1)..d.len()).map(|j| d[j] * moments[j - 1 - i]).sum())
        .collect();
    Polynomial::new(coeffs).unwrap()
}

fn grid_min(p: &Polynomial, points: usize) -> f64 {
    (0..=points)
        .map(|k| p.eval(-2.0 + 4.0 * k as f64 / points as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Equilibrium measure on the standard support `[-2, 2]`.
#[derive(Debug, Clone)]
pub struct EquilibriumMeasure {
    /// Potential as supplied.
    pub original: Polynomial,
    /// Support of the original problem.
    pub support: (f64, f64),
    /// Map from the original variable to the standard one.
    pub map: AffineMap,
    /// Potential in the standard variable.
    pub potential: Polynomial,
    pub rescaled: bool,
    /// Fitted polynomial `P`.
    pub p: Polynomial,
    /// Constant applied to the raw angle-integral of the divided difference
    /// so that `∫ρ = 1` (equal to `1/π` for a consistent solution).
    pub normalization: f64,
    /// Complex zeros of `P`.
    pub p_zeros: Vec<Complex64>,
    /// Largest `d` with all zeros of `P` at distance more than `2d` from the cut.
    pub d_max: f64,
    dv: Polynomial,
    ddv: Polynomial,
    dp: Polynomial,
    quad_nodes: usize,
}

impl EquilibriumMeasure {
    pub fn new(v: &Polynomial) -> Result<Self> {
        let (a, b) = solve_support(v)?;
        Self::with_support(v, a, b)
    }

    /// Builds the measure from a known support (no Newton solve).
    pub fn with_support(v: &Polynomial, a: f64, b: f64) -> Result<Self> {
        let (potential, map) = rescale_to_standard(v, a, b)?;
        let raw = p_coefficients(&potential);
        // mass of (1/2π)·raw·√(4-λ²) with λ = 2cos θ: (2/π²)·Σ raw·sin²θ·(π/N)
        let angles = chebyshev_angles(DEFAULT_QUADRATURE);
        let n = angles.len() as f64;
        let mass_raw: f64 = angles
            .iter()
            .map(|t| raw.eval(2.0 * t.cos()) * t.sin().powi(2))
            .sum::<f64>()
            * (2.0 / PI)
            / n
            * PI;
        if !(mass_raw > 0.0) {
            return Err(Error::Inconsistent(format!("density factor has non-positive mass {mass_raw}")));
        }
        let normalization = 1.0 / (PI * mass_raw);
        if (normalization * PI - 1.0).abs() > 1e-8 {
            return Err(Error::Inconsistent(format!(
                "∫ρ = {:.12} with the 1/π constant; support endpoints inconsistent",
                1.0 / (normalization * PI)
            )));
        }
        let p = raw.scale(normalization * PI);
        let p_zeros = p.roots();
        let d_max = p_zeros
            .iter()
            .map(|&z| 0.5 * dist_to_cut(z))
            .fold(f64::INFINITY, f64::min);
        let dv = potential.derivative();
        let ddv = dv.derivative();
        let dp = p.derivative();
        Ok(EquilibriumMeasure {
            original: v.clone(),
            support: (a, b),
            map,
            potential,
            rescaled: true,
            p,
            normalization,
            p_zeros,
            d_max,
            dv,
            ddv,
            dp,
            quad_nodes: DEFAULT_QUADRATURE,
        })
    }

    pub fn gaussian() -> Self {
        Self::with_support(&Polynomial::gaussian(), -2.0, 2.0).expect("Gaussian measure")
    }

    /// `P(z)` evaluated by the Gauss–Chebyshev quadrature of the defining
    /// angle integral (exact for polynomial potentials).
    pub fn p_quadrature(&self, z: Complex64) -> Complex64 {
        let angles = chebyshev_angles(self.quad_nodes);
        let sum: Complex64 = angles.iter().map(|t| self.dv.divided_difference(z, 2.0 * t.cos())).sum();
        sum * (self.normalization * PI / angles.len() as f64)
    }

    /// `P(z)` from the fitted coefficients.
    pub fn p_at(&self, z: Complex64) -> Complex64 {
        self.p.eval_complex(z)
    }

    pub fn density(&self, lambda: f64) -> Result<f64> {
        if !(-2.0..=2.0).contains(&lambda) {
            return Err(Error::Domain(format!("λ = {lambda} outside the support [-2, 2]")));
        }
        Ok(self.density_unchecked(lambda))
    }

    pub(crate) fn density_unchecked(&self, lambda: f64) -> f64 {
        (self.p.eval(lambda) * (4.0 - lambda * lambda).max(0.0).sqrt() / (2.0 * PI)).max(0.0)
    }

    /// Closed-form Stieltjes transform `g(z) = ∫ρ(λ)/(z-λ) dλ`.
    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 && z.re.abs() <= 2.0 {
            return Err(Error::Domain(format!("z = {z} lies on the cut [-2, 2]")));
        }
        Ok(self.g(z))
    }

    /// Stieltjes transform of the measure in the original variable.
    pub fn stieltjes_original(&self, z: Complex64) -> Result<Complex64> {
        let zs = (z - self.map.shift) * self.map.scale;
        Ok(self.stieltjes(zs)? * self.map.scale)
    }

    /// Density in the original variable.
    pub fn density_original(&self, x: f64) -> f64 {
        let y = self.map.to_standard(x);
        if y.abs() > 2.0 {
            return 0.0;
        }
        self.map.scale * self.density_unchecked(y)
    }

    /// `∫ f ρ` for `f` given in the original variable.
    pub fn integrate_original<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let angles = chebyshev_angles(DEFAULT_QUADRATURE);
        let n = angles.len() as f64;
        angles
            .iter()
            .map(|t| {
                let y = 2.0 * t.cos();
                f(self.map.from_standard(y)) * self.p.eval(y) * t.sin().powi(2)
            })
            .sum::<f64>()
            * 2.0
            / n
    }

    pub(crate) fn g(&self, z: Complex64) -> Complex64 {
        if z.norm() > 4.0 {
            // V' and P·X^{1/2} cancel to O(1/z); the Cauchy integral is cheap and exact here
            return self.cauchy_fixed(z, 64 + 2 * self.p.degree());
        }
        (self.dv.eval_complex(z) - self.p.eval_complex(z) * sqrt_x(z)) * 0.5
    }

    fn cauchy_fixed(&self, z: Complex64, n: usize) -> Complex64 {
        let angles = chebyshev_angles(n);
        let s: Complex64 = angles
            .iter()
            .map(|t| {
                let lam = 2.0 * t.cos();
                self.p.eval(lam) * t.sin().powi(2) / (z - lam)
            })
            .sum();
        s * (2.0 / n as f64)
    }

    /// `g'(z)` in closed form.
    pub fn g_prime(&self, z: Complex64) -> Complex64 {
        if z.norm() > 4.0 {
            let n = 64 + 2 * self.p.degree();
            let s: Complex64 = chebyshev_angles(n)
                .iter()
                .map(|t| {
                    let lam = 2.0 * t.cos();
                    -self.p.eval(lam) * t.sin().powi(2) / ((z - lam) * (z - lam))
                })
                .sum();
            return s * (2.0 / n as f64);
        }
        let x = sqrt_x(z);
        (self.ddv.eval_complex(z) - self.dp.eval_complex(z) * x - self.p.eval_complex(z) * z / x) * 0.5
    }

    /// `g(z)` by direct Gauss–Chebyshev quadrature of `∫ρ/(z-λ)`, doubling
    /// the node count until two orders agree to `1e-13`.
    pub fn stieltjes_quadrature(&self, z: Complex64) -> Complex64 {
        let eval = |n: usize| self.cauchy_fixed(z, n);
        let mut n = 256;
        let mut prev = eval(n);
        while n < 1 << 20 {
            n *= 2;
            let next = eval(n);
            if (next - prev).norm() < 1e-13 * (1.0 + next.norm()) {
                return next;
            }
            prev = next;
        }
        prev
    }

    /// Energy `∫∫ log|λ-μ| ρρ - ∫ Vρ` in the original variable.
    pub fn energy(&self) -> f64 {
        self.energy_with_nodes(DEFAULT_QUADRATURE)
    }

    /// Energy evaluated with `n` Gauss–Chebyshev nodes; the logarithmic term
    /// uses `log|2cosθ - 2cosφ| = -Σ_k (2/k) cos kθ cos kφ`.
    pub fn energy_with_nodes(&self, n: usize) -> f64 {
        let angles = chebyshev_angles(n);
        let weight: Vec<f64> = angles
            .iter()
            .map(|t| self.p.eval(2.0 * t.cos()) * t.sin().powi(2) * 2.0 / n as f64)
            .collect();
        let kmax = n / 2;
        let mut log_term = 0.0;
        for k in 1..=kmax {
            let ck: f64 = angles.iter().zip(&weight).map(|(t, w)| w * (k as f64 * t).cos()).sum();
            log_term -= 2.0 / k as f64 * ck * ck;
        }
        let v_term: f64 = angles
            .iter()
            .zip(&weight)
            .map(|(t, w)| w * self.potential.eval(2.0 * t.cos()))
            .sum();
        // log|λ-μ| = log|λ'-μ'| - log(scale) under λ' = scale·(λ - shift)
        log_term - self.map.scale.ln() - v_term
    }

    /// Checks conditions C1–C3 through `P` and the identity `2g - V' = -P·X^{1/2}`.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        let inf_p = grid_min(&self.p, 2048);
        if inf_p <= C2_TOLERANCE {
            violations.push(Violation {
                condition: "C2".into(),
                detail: format!("inf P on [-2,2] = {inf_p:.3e} is not positive"),
            });
        }

        let outside = self.outside_inequality();
        if let Some(x) = outside {
            violations.push(Violation {
                condition: "C2".into(),
                detail: format!("effective potential reaches its maximum again at λ = {x:.6} outside the support"),
            });
        }

        let d_check = if self.d_max.is_finite() { (0.5 * self.d_max).min(0.5) * 0.8 } else { 0.5 };
        let identity_residual = Contour::sample_points(d_check, 64)
            .into_iter()
            .map(|z| {
                let g = self.stieltjes_quadrature(z);
                (2.0 * g - self.dv.eval_complex(z) + self.p_quadrature(z) * sqrt_x(z)).norm()
            })
            .fold(0.0, f64::max);
        if !(identity_residual < 1e-8) {
            violations.push(Violation {
                condition: "identity 2g - V' = -P X^1/2".into(),
                detail: format!("max residual {identity_residual:.3e} on L_{d_check}"),
            });
        }

        ValidationReport {
            inf_p,
            identity_residual,
            identity_distance: d_check,
            d_max: self.d_max,
            p_zeros: self.p_zeros.iter().map(|z| [z.re, z.im]).collect(),
            passed: violations.is_empty(),
            violations,
        }
    }

    /// First point `λ > 2` (or `< -2`) where `v(λ) ≥ v(2)`, i.e. where
    /// `∫_2^λ P(s)√(s²-4) ds` stops being positive.
    fn outside_inequality(&self) -> Option<f64> {
        let reach = self
            .p
            .real_roots(1e-9)
            .iter()
            .map(|r| r.abs())
            .fold(2.0, f64::max)
            + 1.0;
        for sign in [1.0, -1.0] {
            let steps = 4000;
            let h = (reach - 2.0) / steps as f64;
            let mut acc = 0.0;
            for k in 0..steps {
                let s0 = 2.0 + k as f64 * h;
                // midpoint rule on ∫ P(±s)√(s²-4) ds
                let s = s0 + 0.5 * h;
                acc += self.p.eval(sign * s) * (s * s - 4.0).sqrt() * h;
                if k > 10 && acc <= 0.0 {
                    return Some(sign * (s0 + h));
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Violation {
    pub condition: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub inf_p: f64,
    pub identity_residual: f64,
    pub identity_distance: f64,
    pub d_max: f64,
    pub p_zeros: Vec<[f64; 2]>,
    pub passed: bool,
    pub violations: Vec<Violation>,
}

/// `P(z)` as a free function over a built measure.
pub fn compute_p(eq: &EquilibriumMeasure, z: Complex64) -> Complex64 {
    eq.p_quadrature(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn quartic() -> Polynomial {
        Polynomial::monomial(4, 0.25)
    }

    #[test]
    fn gaussian_support_and_factor() {
        let (a, b) = solve_support(&Polynomial::gaussian()).unwrap();
        assert!((a + 2.0).abs() < 1e-10 && (b - 2.0).abs() < 1e-10);
        let eq = EquilibriumMeasure::new(&Polynomial::gaussian()).unwrap();
        assert_eq!(eq.p.degree(), 0);
        assert!((eq.p.coeffs()[0] - 1.0).abs() < 1e-14);
        assert!((eq.normalization * PI - 1.0).abs() < 1e-12);
        assert!(eq.d_max.is_infinite());
    }

    #[test]
    fn quartic_support_closed_form() {
        let (a, b) = solve_support(&quartic()).unwrap();
        let expected = (16.0f64 / 3.0).powf(0.25);
        assert!((b - expected).abs() < 1e-10, "{b}");
        assert!((a + expected).abs() < 1e-10);
    }

    #[test]
    fn shifted_gaussian_support() {
        let v = Polynomial::new(vec![0.0, 0.1, 0.5]).unwrap();
        let (a, b) = solve_support(&v).unwrap();
        assert!((a + 2.1).abs() < 1e-10 && (b - 1.9).abs() < 1e-10);
    }

    #[test]
    fn quartic_factor_is_positive_quadratic_and_matches_quadrature() {
        let eq = EquilibriumMeasure::new(&quartic()).unwrap();
        // λ⁴/4 on [-b, b] becomes λ⁴/12 on [-2, 2]; P = (z² + 2)/3
        assert_eq!(eq.p.degree(), 2);
        let pc = eq.p.coeffs();
        assert!((pc[0] - 2.0 / 3.0).abs() < 1e-10 && pc[1].abs() < 1e-12 && (pc[2] - 1.0 / 3.0).abs() < 1e-10);
        for z in [c(0.3, 0.7), c(-1.5, 0.2), c(2.5, -1.0)] {
            assert!((eq.p_quadrature(z) - eq.p_at(z)).norm() < 1e-12);
            // even V gives even P
            assert!((eq.p_at(z) - eq.p_at(-z)).norm() < 1e-12);
        }
    }

    #[test]
    fn density_examples() {
        let eq = EquilibriumMeasure::gaussian();
        assert!((eq.density(0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(eq.density(2.0).unwrap(), 0.0);
        assert_eq!(eq.density(-2.0).unwrap(), 0.0);
        assert!(eq.density(2.5).is_err());
    }

    #[test]
    fn stieltjes_examples() {
        let eq = EquilibriumMeasure::gaussian();
        let g3 = eq.stieltjes(c(3.0, 0.0)).unwrap();
        assert!((g3.re - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-14 && g3.im.abs() < 1e-15);
        let big = c(1e6, 0.0);
        assert!((eq.stieltjes(big).unwrap() * big - 1.0).norm() < 1e-6);
        let near = eq.stieltjes(c(0.0, 1e-6)).unwrap();
        assert!((near.im + 1.0).abs() < 1e-5);
        assert!(eq.stieltjes(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn g_prime_matches_finite_difference() {
        let eq = EquilibriumMeasure::new(&quartic()).unwrap();
        let z = c(0.7, 0.4);
        let h = 1e-5;
        for z in [z, c(4.5, 1.0)] {
            let fd = (eq.g(z + h) - eq.g(z - h)) / (2.0 * h);
            assert!((fd - eq.g_prime(z)).norm() < 1e-8);
        }
    }

    #[test]
    fn energy_examples() {
        let eq = EquilibriumMeasure::gaussian();
        assert!((eq.energy() + 0.75).abs() < 1e-13);
        let beta = 1.7;
        assert!((-0.5 * beta * eq.energy() - 3.0 / 8.0 * beta).abs() < 1e-13);
        let q = EquilibriumMeasure::new(&quartic()).unwrap();
        assert!((q.energy_with_nodes(64) - q.energy_with_nodes(512)).abs() < 1e-8);
    }

    #[test]
    fn validation_passes_for_gaussian_and_quartic() {
        let g = EquilibriumMeasure::gaussian().validate();
        assert!(g.passed, "{g:?}");
        assert!(g.d_max.is_infinite());
        let q = EquilibriumMeasure::new(&quartic()).unwrap().validate();
        assert!(q.passed, "{q:?}");
        assert!(q.identity_residual < 1e-8);
    }

    #[test]
    fn double_well_violates_c2() {
        let v = Polynomial::new(vec![0.0, 0.0, -1.0, 0.0, 0.25]).unwrap();
        let report = EquilibriumMeasure::new(&v).unwrap().validate();
        assert!(!report.passed);
        assert!(report.violations.iter().any(|v| v.condition == "C2"));
    }

    #[test]
    fn deep_double_well_is_not_one_cut() {
        let v = Polynomial::new(vec![0.0, 0.0, -2.0, 0.0, 0.25]).unwrap();
        assert!(matches!(solve_support(&v), Err(Error::NotOneCut(_))));
    }

    #[test]
    fn rejects_potentials_without_growth() {
        let v = Polynomial::new(vec![0.0, 0.0, -1.0]).unwrap();
        assert!(matches!(solve_support(&v), Err(Error::Domain(_))));
    }

    #[test]
    fn density_is_normalized_and_nonnegative() {
        let eq = EquilibriumMeasure::new(&quartic()).unwrap();
        let (x, w) = crate::quadrature::gauss_legendre_on(-2.0, 2.0, 400);
        let mass: f64 = x.iter().zip(&w).map(|(x, w)| w * eq.density(*x).unwrap()).sum();
        // √(4-λ²) endpoint behaviour limits plain Gauss–Legendre
        assert!((mass - 1.0).abs() < 1e-5);
        let (angles, n) = (chebyshev_angles(512), 512.0);
        let exact: f64 = angles.iter().map(|t| eq.density(2.0 * t.cos()).unwrap() * 2.0 * t.sin()).sum::<f64>() * PI / n;
        assert!((exact - 1.0).abs() < 1e-10);
        assert!((0..=4096).all(|k| eq.density(-2.0 + 4.0 * k as f64 / 4096.0).unwrap() >= 0.0));
    }

    #[test]
    fn interpolated_measure_is_linear_in_t() {
        let v = Polynomial::monomial(4, 1.0 / 12.0);
        let eq1 = EquilibriumMeasure::new(&v).unwrap();
        let eq0 = EquilibriumMeasure::gaussian();
        let fam = crate::potential::PotentialFamily::gaussian_to(v);
        for t in [0.2, 0.5, 0.9] {
            let eqt = EquilibriumMeasure::new(&fam.interpolate(t).unwrap()).unwrap();
            assert!((eqt.support.0 + 2.0).abs() < 1e-10 && (eqt.support.1 - 2.0).abs() < 1e-10);
            for k in 0..41 {
                let x = -2.0 + 0.1 * k as f64;
                let lin = t * eq1.density(x).unwrap() + (1.0 - t) * eq0.density(x).unwrap();
                assert!((eqt.density(x).unwrap() - lin).abs() < 1e-8);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn support_is_affine_invariant(shift in -1.0f64..1.0, scale in 0.5f64..2.0, c3 in -0.05f64..0.05) {
            let v = Polynomial::new(vec![0.0, 0.0, 0.5, c3, 0.1]).unwrap();
            let v = v.compose_affine(shift, scale);
            if let Ok((a, b)) = solve_support(&v) {
                let (w, _) = rescale_to_standard(&v, a, b).unwrap();
                let (a2, b2) = solve_support(&w).unwrap();
                proptest::prop_assert!((a2 + 2.0).abs() < 1e-10 && (b2 - 2.0).abs() < 1e-10);
            }
        }
    }
}

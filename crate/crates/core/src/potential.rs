//! Polynomial potentials, affine rescaling to the standard support and the
//! Gaussian interpolation family `V_t = t V + (1 - t) λ²/2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported degree.
pub const MAX_DEGREE: usize = 32;

/// Real polynomial stored densely, constant term first.
///
/// Trailing zero coefficients are trimmed on construction so the leading
/// coefficient is nonzero unless the polynomial is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Polynomial {
    type Error = Error;

    fn try_from(coeffs: Vec<f64>) -> Result<Self> {
        Polynomial::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Vec<f64> {
        p.coeffs
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Parse("empty coefficient list".into()));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::Parse(format!("non-finite coefficient {bad}")));
        }
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::Parse(format!(
                "degree {} exceeds the supported maximum {MAX_DEGREE}",
                coeffs.len() - 1
            )));
        }
        Ok(Polynomial { coeffs })
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    /// `λ²/2`, the Gaussian reference potential.
    pub fn gaussian() -> Self {
        Polynomial { coeffs: vec![0.0, 0.0, 0.5] }
    }

    pub fn monomial(degree: usize, coeff: f64) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = coeff;
        Polynomial::new(coeffs).expect("monomial is well formed")
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// True when only even powers carry nonzero coefficients.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|&c| c == 0.0)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::zero();
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, &c)| c * (k + 1) as f64)
            .collect();
        Polynomial::new(coeffs).unwrap()
    }

    pub fn nth_derivative(&self, order: usize) -> Polynomial {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Divided difference `(p(z) - p(x)) / (z - x)`, evaluated without
    /// cancellation through `h_{j+1} = z h_j + x^j`.
    pub fn divided_difference(&self, z: Complex64, x: f64) -> Complex64 {
        let mut h = Complex64::new(0.0, 0.0);
        let mut xj = 1.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().skip(1) {
            h = h * z + xj;
            xj *= x;
            acc += h * c;
        }
        acc
    }

    pub fn scale(&self, factor: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * factor).collect()).unwrap()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(0.0) + other.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        Polynomial::new(coeffs).unwrap()
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    /// The polynomial `y ↦ p(offset + factor·y)`.
    pub fn compose_affine(&self, offset: f64, factor: f64) -> Polynomial {
        // Horner in polynomial arithmetic: acc = acc·(offset + factor y) + c.
        let mut acc = vec![0.0; 1];
        for &c in self.coeffs.iter().rev() {
            let mut next = vec![0.0; acc.len() + 1];
            for (k, &a) in acc.iter().enumerate() {
                next[k] += a * offset;
                next[k + 1] += a * factor;
            }
            next[0] += c;
            acc = next;
        }
        Polynomial::new(acc).unwrap()
    }
}

impl Polynomial {
    /// All complex roots, from the companion matrix and polished by Newton.
    pub fn roots(&self) -> Vec<Complex64> {
        let deg = self.degree();
        if deg == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let mut companion = nalgebra::DMatrix::<f64>::zeros(deg, deg);
        for k in 0..deg {
            companion[(0, k)] = -self.coeffs[deg - 1 - k] / lead;
            if k + 1 < deg {
                companion[(k + 1, k)] = 1.0;
            }
        }
        let dp = self.derivative();
        let initial: Vec<Complex64> = match nalgebra::Schur::try_new(companion, 1e-15, 5000) {
            Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
            // shifted QR cycles on cyclic companion matrices (e.g. z³); use Aberth instead
            None => self.aberth(),
        };
        initial
            .into_iter()
            .map(|z0| {
                let mut z = z0;
                for _ in 0..8 {
                    let d = dp.eval_complex(z);
                    if d.norm() == 0.0 {
                        break;
                    }
                    let step = self.eval_complex(z) / d;
                    z -= step;
                    if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                        break;
                    }
                }
                if z.im.abs() < 1e-12 * (1.0 + z.re.abs()) {
                    z.im = 0.0;
                }
                z
            })
            .collect()
    }

    fn aberth(&self) -> Vec<Complex64> {
        let deg = self.degree();
        let dp = self.derivative();
        let radius = 1.0 + self.coeffs[..deg].iter().map(|c| (c / self.leading()).abs()).fold(0.0, f64::max);
        let mut z: Vec<Complex64> = (0..deg)
            .map(|k| Complex64::from_polar(0.5 * radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64))
            .collect();
        for _ in 0..500 {
            let mut moved = 0.0f64;
            for k in 0..deg {
                let ratio = self.eval_complex(z[k]) / dp.eval_complex(z[k]);
                if !ratio.is_finite() {
                    continue;
                }
                let repulsion: Complex64 = (0..deg).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
                let step = ratio / (1.0 - ratio * repulsion);
                if step.is_finite() {
                    z[k] -= step;
                    moved = moved.max(step.norm());
                }
            }
            if moved < 1e-15 * radius {
                break;
            }
        }
        z
    }

    /// Real roots in ascending order (imaginary part below `tol`).
    pub fn real_roots(&self, tol: f64) -> Vec<f64> {
        let mut r: Vec<f64> = self.roots().into_iter().filter(|z| z.im.abs() <= tol).map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        r
    }
}

/// Evaluates the `order`-th derivative of `p` at a complex point.
pub fn eval_potential(p: &Polynomial, z: Complex64, order: usize) -> Complex64 {
    if order == 0 {
        p.eval_complex(z)
    } else {
        p.nth_derivative(order).eval_complex(z)
    }
}

/// `V_t = t V + (1 - t) V₀` with `V₀ = λ²/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialFamily {
    pub target: Polynomial,
    pub reference: Polynomial,
}

impl PotentialFamily {
    pub fn gaussian_to(target: Polynomial) -> Self {
        PotentialFamily { target, reference: Polynomial::gaussian() }
    }

    pub fn interpolate(&self, t: f64) -> Result<Polynomial> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("interpolation parameter t = {t} outside [0, 1]")));
        }
        Ok(self.target.scale(t).add(&self.reference.scale(1.0 - t)))
    }
}

/// `λ' = scale·(λ - shift)`, mapping `[a, b]` onto `[-2, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub shift: f64,
    pub scale: f64,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap { shift: 0.0, scale: 1.0 }
    }

    pub fn for_support(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Domain(format!("support [{a}, {b}] is empty or reversed")));
        }
        Ok(AffineMap { shift: 0.5 * (a + b), scale: 4.0 / (b - a) })
    }

    pub fn to_standard(&self, x: f64) -> f64 {
        self.scale * (x - self.shift)
    }

    pub fn from_standard(&self, y: f64) -> f64 {
        self.shift + y / self.scale
    }
}

/// Rewrites `p` in the variable that sends `[a, b]` to `[-2, 2]`.
///
/// The logarithmic energy only shifts by a constant under an affine change of
/// variables, so the equilibrium problem for the returned polynomial has the
/// pushed-forward minimizer.
pub fn rescale_to_standard(p: &Polynomial, a: f64, b: f64) -> Result<(Polynomial, AffineMap)> {
    let map = AffineMap::for_support(a, b)?;
    let rescaled = p.compose_affine(map.shift, 1.0 / map.scale);
    Ok((rescaled, map))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthFailure {
    /// Bounded (constant) or decreasing towards both ends.
    BothEnds,
    PositiveInfinity,
    NegativeInfinity,
}

/// Outcome of the growth test `V(λ) ≥ 2(1+ε) log(1+|λ|)` at large `|λ|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Growth {
    Pass,
    Fail(GrowthFailure),
}

impl Growth {
    pub fn passed(&self) -> bool {
        matches!(self, Growth::Pass)
    }
}

pub fn check_growth(p: &Polynomial) -> Growth {
    let deg = p.degree();
    let lead = p.leading();
    if deg == 0 || (deg % 2 == 0 && lead < 0.0) {
        return Growth::Fail(GrowthFailure::BothEnds);
    }
    if deg % 2 == 1 {
        return Growth::Fail(if lead > 0.0 {
            GrowthFailure::NegativeInfinity
        } else {
            GrowthFailure::PositiveInfinity
        });
    }
    Growth::Pass
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let g = Polynomial::gaussian();
        assert_eq!(eval_potential(&g, c(2.0, 0.0), 0), c(2.0, 0.0));
        assert_eq!(eval_potential(&g, c(0.0, 1.0), 0), c(-0.5, 0.0));
        let q = Polynomial::monomial(4, 0.25);
        assert_eq!(eval_potential(&q, c(1.0, 0.0), 1), c(1.0, 0.0));
        assert_eq!(eval_potential(&q, c(1.0, 0.0), 2), c(3.0, 0.0));
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let fam = PotentialFamily::gaussian_to(Polynomial::monomial(4, 0.25));
        assert_eq!(fam.interpolate(0.0).unwrap(), Polynomial::gaussian());
        assert_eq!(fam.interpolate(1.0).unwrap(), Polynomial::monomial(4, 0.25));
        let mid = fam.interpolate(0.5).unwrap();
        assert!((mid.eval(1.0) - 0.375).abs() < 1e-15);
        assert!(matches!(fam.interpolate(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn rescale_examples() {
        let (p, map) = rescale_to_standard(&Polynomial::gaussian(), -2.0, 2.0).unwrap();
        assert_eq!(map, AffineMap::identity());
        assert_eq!(p, Polynomial::gaussian());

        // (λ - 2)²/2 on [0, 4]
        let shifted = Polynomial::new(vec![2.0, -2.0, 0.5]).unwrap();
        let (p, map) = rescale_to_standard(&shifted, 0.0, 4.0).unwrap();
        assert_eq!(map.shift, 2.0);
        assert_eq!(map.scale, 1.0);
        assert_eq!(p, Polynomial::gaussian());

        let (_, map) = rescale_to_standard(&shifted, -4.0, 4.0).unwrap();
        assert_eq!(map.scale, 0.5);
        assert!(rescale_to_standard(&shifted, 1.0, 1.0).is_err());
    }

    #[test]
    fn growth_examples() {
        assert_eq!(check_growth(&Polynomial::gaussian()), Growth::Pass);
        let neg = Polynomial::new(vec![0.0, 0.0, -1.0]).unwrap();
        assert_eq!(check_growth(&neg), Growth::Fail(GrowthFailure::BothEnds));
        let lin = Polynomial::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(check_growth(&lin), Growth::Fail(GrowthFailure::NegativeInfinity));
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(Polynomial::new(vec![]).is_err());
        assert!(Polynomial::new(vec![1.0, f64::NAN]).is_err());
        assert!(Polynomial::new(vec![1.0; 40]).is_err());
        let p: Polynomial = serde_json_like(&[0.0, 0.0, 0.5, 0.0]);
        assert_eq!(p.degree(), 2);
    }

    fn serde_json_like(c: &[f64]) -> Polynomial {
        Polynomial::try_from(c.to_vec()).unwrap()
    }

    #[test]
    fn divided_difference_matches_direct_formula() {
        let p = Polynomial::new(vec![0.3, -1.0, 0.2, 0.7, 0.1]).unwrap();
        let z = c(0.4, 1.3);
        let x = -0.8;
        let direct = (p.eval_complex(z) - p.eval(x)) / (z - x);
        assert!((p.divided_difference(z, x) - direct).norm() < 1e-13);
    }

    #[test]
    fn roots_of_known_polynomials() {
        // (x - 1)(x + 2)(x² + 1)
        let p = Polynomial::new(vec![-2.0, 1.0, -1.0, 1.0, 1.0]).unwrap();
        let mut re = p.real_roots(1e-9);
        re.sort_by(f64::total_cmp);
        assert_eq!(re.len(), 2);
        assert!((re[0] + 2.0).abs() < 1e-12 && (re[1] - 1.0).abs() < 1e-12);
        let complex: Vec<_> = p.roots().into_iter().filter(|z| z.im != 0.0).collect();
        assert_eq!(complex.len(), 2);
        assert!(complex.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    proptest! {
        #[test]
        fn interpolation_is_linear_in_t(t in 0.0f64..=1.0, x in -3.0f64..3.0) {
            let v = Polynomial::new(vec![0.1, -0.2, 0.3, 0.05, 0.2]).unwrap();
            let fam = PotentialFamily::gaussian_to(v.clone());
            let vt = fam.interpolate(t).unwrap();
            let expected = t * v.eval(x) + (1.0 - t) * 0.5 * x * x;
            prop_assert!((vt.eval(x) - expected).abs() <= 1e-14 * (1.0 + expected.abs()));
        }

        #[test]
        fn rescaling_round_trips(a in -5.0f64..0.0, w in 0.5f64..6.0, x in -4.0f64..4.0) {
            let b = a + w;
            let v = Polynomial::new(vec![0.5, -0.3, 0.8, 0.1, 0.25]).unwrap();
            let (r, map) = rescale_to_standard(&v, a, b).unwrap();
            let lam = map.from_standard(map.to_standard(x));
            prop_assert!((lam - x).abs() < 1e-12 * (1.0 + x.abs()));
            let back = r.eval(map.to_standard(x));
            let orig = v.eval(x);
            prop_assert!((back - orig).abs() <= 1e-12 * (1.0 + orig.abs()));
        }
    }
}

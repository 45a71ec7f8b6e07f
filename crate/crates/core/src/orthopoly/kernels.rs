use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::workspace::{KernelWorkspace, SINGULAR_TOLERANCE};

/// Symmetry class of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `β = 1`, `S_{n,1}`.
    Orthogonal,
    /// `β = 2`, the reproducing kernel `K_n`.
    Unitary,
    /// `β = 4`, `S_{n/2,4}` built from `n` functions.
    Symplectic,
}

impl KernelKind {
    pub fn from_beta(beta: u32) -> Result<Self> {
        match beta {
            1 => Ok(KernelKind::Orthogonal),
            2 => Ok(KernelKind::Unitary),
            4 => Ok(KernelKind::Symplectic),
            _ => Err(Error::Domain(format!("β = {beta} is not one of 1, 2, 4"))),
        }
    }

    pub fn beta(self) -> u32 {
        match self {
            KernelKind::Orthogonal => 1,
            KernelKind::Unitary => 2,
            KernelKind::Symplectic => 4,
        }
    }
}

/// The small blocks entering the finite-rank corrections to `K_n`.
#[derive(Debug, Clone)]
pub struct KernelMatrices {
    pub kind: KernelKind,
    d12: DMatrix<f64>,
    d21: DMatrix<f64>,
    /// `Ĝ = D_12 M_22 (1 - D_21 M_12)^{-1} D_21` for β = 1,
    /// `D_21 M_11 D_12 (1 - M_21 D_12)^{-1}` for β = 4.
    g: DMatrix<f64>,
}

fn checked_inverse(a: DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let smallest = a.clone().svd(false, false).singular_values.min();
    if smallest < SINGULAR_TOLERANCE {
        return Err(Error::Singular(format!("{what} has smallest singular value {smallest:.2e}")));
    }
    a.try_inverse().ok_or_else(|| Error::Singular(what.into()))
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn bilinear(x: &[f64], a: &DMatrix<f64>, y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            s += xi * a[(i, j)] * yj;
        }
    }
    s
}

impl KernelMatrices {
    pub fn new(ws: &KernelWorkspace, kind: KernelKind) -> Result<Self> {
        if kind != KernelKind::Unitary && ws.n % 2 == 1 {
            return Err(Error::Domain(format!("β = {} kernels need even n, got {}", kind.beta(), ws.n)));
        }
        let r = 2 * ws.m - 1;
        let id = DMatrix::<f64>::identity(r, r);
        let d12 = ws.d_block(1, 2);
        let d21 = ws.d_block(2, 1);
        let g = match kind {
            KernelKind::Orthogonal => {
                let inv = checked_inverse(&id - &d21 * ws.m_block(1, 2), "1 - D21 M12")?;
                &d12 * ws.m_block(2, 2) * inv * &d21
            }
            KernelKind::Symplectic => {
                let inv = checked_inverse(&id - ws.m_block(2, 1) * &d12, "1 - M21 D12")?;
                &d21 * ws.m_block(1, 1) * &d12 * inv
            }
            KernelKind::Unitary => DMatrix::zeros(r, r),
        };
        Ok(KernelMatrices { kind, d12, d21, g })
    }

    /// Kernel value from the left vector (`Ψ(λ)` or `εΨ(λ)`) and `Ψ(μ)`,
    /// `εΨ(μ)`; replacing `Ψ(λ)` by `εΨ(λ)` gives `εS`.
    pub fn evaluate(&self, ws: &KernelWorkspace, left: &[f64], psi: &[f64], eps: &[f64]) -> f64 {
        let n = ws.n;
        let base = dot(&left[..n], &psi[..n]);
        let (p1, p2) = (ws.phi1(), ws.phi2());
        match self.kind {
            KernelKind::Unitary => base,
            KernelKind::Orthogonal => {
                base - bilinear(&left[p1.clone()], &self.d12, &eps[p2]) - bilinear(&left[p1.clone()], &self.g, &eps[p1])
            }
            KernelKind::Symplectic => {
                base + bilinear(&left[p2.clone()], &self.d21, &eps[p1]) + bilinear(&left[p2.clone()], &self.g, &eps[p2])
            }
        }
    }

    /// `S(λ, μ)`.
    pub fn s(&self, ws: &KernelWorkspace, lambda: f64, mu: f64) -> f64 {
        self.evaluate(ws, &ws.psi(lambda), &ws.psi(mu), &ws.eps_psi(mu))
    }

    /// `(εS)(λ, μ) = ∫ε(λ-t) S(t, μ) dt`.
    pub fn eps_s(&self, ws: &KernelWorkspace, lambda: f64, mu: f64) -> f64 {
        self.evaluate(ws, &ws.eps_psi(lambda), &ws.psi(mu), &ws.eps_psi(mu))
    }
}

impl KernelWorkspace {
    /// `K_n(λ, μ) = Σ_{j<n} ψ_j(λ)ψ_j(μ)`.
    pub fn reproducing_kernel(&self, lambda: f64, mu: f64) -> f64 {
        dot(&self.psi(lambda)[..self.n], &self.psi(mu)[..self.n])
    }

    /// `max |∫K_n(λ,ν)K_n(ν,μ)dν - K_n(λ,μ)|` over the given pairs.
    pub fn reproducing_error(&self, pairs: &[(f64, f64)]) -> f64 {
        let grid = &self.recurrence.grid;
        let mut worst = 0.0f64;
        for &(l, m) in pairs {
            let (pl, pm) = (self.psi(l), self.psi(m));
            let mut acc = 0.0;
            for (&x, &w) in grid.nodes.iter().zip(&grid.weights) {
                let px = self.psi(x);
                acc += w * dot(&pl[..self.n], &px[..self.n]) * dot(&px[..self.n], &pm[..self.n]);
            }
            worst = worst.max((acc - self.reproducing_kernel(l, m)).abs());
        }
        worst
    }

    /// `S_{n,1}(λ,μ) = Ψ(λ)ᵀ M_n^{-1} εΨ(μ)` with `M_n` inverted explicitly.
    pub fn s1_explicit(&self, lambda: f64, mu: f64) -> Result<f64> {
        let inv = checked_inverse(self.m_n(), "M_n")?;
        let n = self.n;
        let left = DVector::from_column_slice(&self.psi(lambda)[..n]);
        let right = DVector::from_column_slice(&self.eps_psi(mu)[..n]);
        Ok(left.dot(&(inv * right)))
    }

    /// `S_{n/2,4}(λ,μ) = -Ψ'(λ)ᵀ D_n^{-1} Ψ(μ)` with `D_n` inverted explicitly.
    pub fn s4_explicit(&self, lambda: f64, mu: f64) -> Result<f64> {
        let inv = checked_inverse(self.d_n(), "D_n")?;
        let n = self.n;
        let (_, dpsi) = self.psi_with_derivative(lambda);
        let left = DVector::from_column_slice(&dpsi[..n]);
        let right = DVector::from_column_slice(&self.psi(mu)[..n]);
        Ok(-left.dot(&(inv * right)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Polynomial;

    const PAIRS: [(f64, f64); 5] = [(0.1, -0.4), (0.0, 0.0), (0.7, 0.65), (-1.2, 0.3), (1.5, -1.5)];

    #[test]
    fn dgkv_forms_match_explicit_inverses() {
        for p in [Polynomial::gaussian(), Polynomial::monomial(4, 1.0 / 12.0)] {
            for n in [4, 6] {
                let ws = KernelWorkspace::new(&p, n).unwrap();
                let s1 = KernelMatrices::new(&ws, KernelKind::Orthogonal).unwrap();
                let s4 = KernelMatrices::new(&ws, KernelKind::Symplectic).unwrap();
                for (l, m) in PAIRS {
                    let (a, b) = (s1.s(&ws, l, m), ws.s1_explicit(l, m).unwrap());
                    assert!((a - b).abs() < 1e-8, "β=1 n={n} ({l},{m}): {a} vs {b}");
                    let (a, b) = (s4.s(&ws, l, m), ws.s4_explicit(l, m).unwrap());
                    assert!((a - b).abs() < 1e-8, "β=4 n={n} ({l},{m}): {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn reproducing_property() {
        for (p, n) in [(Polynomial::gaussian(), 20), (Polynomial::monomial(4, 1.0 / 12.0), 16)] {
            let ws = KernelWorkspace::new(&p, n).unwrap();
            assert!(ws.reproducing_error(&PAIRS) < 1e-8);
        }
    }

    #[test]
    fn corrections_shrink_in_the_bulk() {
        let gap = |n: usize| {
            let ws = KernelWorkspace::new(&Polynomial::gaussian(), n).unwrap();
            let s1 = KernelMatrices::new(&ws, KernelKind::Orthogonal).unwrap();
            let (l, m) = (0.1, 0.1 + 1.0 / n as f64);
            (s1.s(&ws, l, m) - ws.reproducing_kernel(l, m)).abs() / n as f64
        };
        let (g10, g40) = (gap(10), gap(40));
        assert!(g40 < g10, "{g10} {g40}");
    }

    #[test]
    fn eps_s_matches_quadrature_of_s() {
        let ws = KernelWorkspace::new(&Polynomial::gaussian(), 8).unwrap();
        let (a, b) = ws.recurrence.window;
        let (l, m) = (0.35, -0.2);
        let (ln, lw) = crate::quadrature::gauss_legendre_on(a, l, 300);
        let (rn, rw) = crate::quadrature::gauss_legendre_on(l, b, 300);
        for kind in [KernelKind::Orthogonal, KernelKind::Unitary, KernelKind::Symplectic] {
            let k = KernelMatrices::new(&ws, kind).unwrap();
            let left: f64 = ln.iter().zip(&lw).map(|(&t, &w)| w * k.s(&ws, t, m)).sum();
            let right: f64 = rn.iter().zip(&rw).map(|(&t, &w)| w * k.s(&ws, t, m)).sum();
            let direct = 0.5 * (left - right);
            assert!((k.eps_s(&ws, l, m) - direct).abs() < 1e-9, "{kind:?}");
        }
    }

    #[test]
    fn odd_n_rejected_for_pfaffian_kernels() {
        let ws = KernelWorkspace::new(&Polynomial::gaussian(), 5).unwrap();
        assert!(KernelMatrices::new(&ws, KernelKind::Orthogonal).is_err());
        assert!(KernelMatrices::new(&ws, KernelKind::Unitary).is_ok());
        assert!(KernelKind::from_beta(3).is_err());
    }
}

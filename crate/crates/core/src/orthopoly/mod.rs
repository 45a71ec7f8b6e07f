//! Orthonormal functions `ψ_j = p_j e^{-nV/2}` for the varying weight
//! `e^{-nV}` and the Tracy–Widom kernels built from them.

mod kernels;
mod stojanovic;
mod workspace;

pub use kernels::{KernelKind, KernelMatrices};
pub use stojanovic::{stojanovic_identity, StojanovicReport};
pub use workspace::{KernelWorkspace, StructuralReport, TMatrix};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::equilibrium::solve_support;
use crate::error::{Error, Result};
use crate::potential::Polynomial;
use crate::quadrature::CompositeGrid;

/// Gauss–Legendre order of every grid panel.
pub const GRID_ORDER: usize = 16;
/// Tolerated Gram-matrix defect on an independent refined grid.
pub const GRAM_TOLERANCE: f64 = 1e-8;
/// Largest allowed excess of `K` over `n`.
pub const MAX_EXTRA_LEVELS: usize = 64;

const TAIL_LOG_DROP: f64 = 75.0;
const TAIL_VALUE: f64 = 1e-15;

/// Three-term recurrence `λψ_k = a_{k+1}ψ_{k+1} + b_kψ_k + a_kψ_{k-1}`.
#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceTable {
    pub potential: Polynomial,
    pub n_weight: usize,
    /// Number of functions `ψ_0 … ψ_{K-1}` that are available.
    pub levels: usize,
    /// `a[k]` for `k = 0..=K`, with `a[0] = 0`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `ln γ_j` for the leading coefficients of the orthonormal `p_j`.
    pub log_gamma: Vec<f64>,
    pub window: (f64, f64),
    pub gram_error: f64,
    #[serde(skip)]
    pub grid: CompositeGrid,
    v_min: f64,
    /// `ln ∫ e^{-n(V - v_min)}`.
    log_mass: f64,
}

/// Runs the Stieltjes/Lanczos process for `e^{-nV}` and returns `K` levels.
pub fn recurrence(p: &Polynomial, n: usize, levels: usize) -> Result<RecurrenceTable> {
    if n == 0 || levels == 0 {
        return Err(Error::Domain("n and K must be positive".into()));
    }
    if p.degree() < 2 || p.degree() % 2 == 1 || p.leading() <= 0.0 {
        return Err(Error::Domain("V must have even degree and positive leading coefficient".into()));
    }
    if levels > n + MAX_EXTRA_LEVELS {
        return Err(Error::Domain(format!("K = {levels} exceeds n + {MAX_EXTRA_LEVELS}")));
    }
    let (mut lo, mut hi, v_min) = initial_window(p, n, levels)?;
    let mut panels = ((8 * (n + levels)).div_ceil(GRID_ORDER)).max(32);
    let mut last_gram = f64::NAN;
    for _ in 0..6 {
        let table = lanczos(p, n, levels, lo, hi, panels, v_min)?;
        // widen if the top functions are not negligible at the ends
        let ends = [table.psi(lo, levels), table.psi(hi, levels)];
        let tail = ends.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if tail > TAIL_VALUE {
            let half = 0.5 * (hi - lo);
            lo -= 0.25 * half;
            hi += 0.25 * half;
            continue;
        }
        if table.gram_error <= GRAM_TOLERANCE {
            return Ok(table);
        }
        last_gram = table.gram_error;
        panels *= 2;
    }
    Err(Error::Precision(format!(
        "orthogonality lost ({last_gram:.2e}); increase the grid order"
    )))
}

fn initial_window(p: &Polynomial, n: usize, levels: usize) -> Result<(f64, f64, f64)> {
    let (a, b) = solve_support(p)?;
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let steps = 4000;
    let (mut v_min, mut x_min) = (f64::INFINITY, center);
    for i in 0..=steps {
        let x = center + 3.0 * half * (2.0 * i as f64 / steps as f64 - 1.0);
        let v = p.eval(x);
        if v < v_min {
            v_min = v;
            x_min = x;
        }
    }
    let nf = n as f64;
    let growth = |x: f64| 2.0 * levels as f64 * (1.0 + (x - x_min).abs()).ln();
    let reach = |dir: f64| {
        let mut x = if dir < 0.0 { a - 0.5 } else { b + 0.5 };
        while nf * (p.eval(x) - v_min) - growth(x) < TAIL_LOG_DROP {
            x += dir * 0.05 * half;
        }
        x
    };
    Ok((reach(-1.0), reach(1.0), v_min))
}

fn lanczos(p: &Polynomial, n: usize, levels: usize, lo: f64, hi: f64, panels: usize, v_min: f64) -> Result<RecurrenceTable> {
    let grid = CompositeGrid::new(lo, hi, panels, GRID_ORDER);
    let nf = n as f64;
    let w: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&x, &w)| w * (-nf * (p.eval(x) - v_min)).exp())
        .collect();
    let mass: f64 = w.iter().sum();
    let sqrt_w: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let len = grid.len();
    if len <= levels + 1 {
        return Err(Error::Precision("grid smaller than the number of levels".into()));
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(levels + 1);
    basis.push(sqrt_w.iter().map(|v| v / mass.sqrt()).collect());
    let mut a = vec![0.0; levels + 1];
    let mut b = vec![0.0; levels];
    for k in 0..levels {
        let u = &basis[k];
        let mut next: Vec<f64> = u.iter().zip(&grid.nodes).map(|(v, x)| v * x).collect();
        b[k] = dot(u, &next);
        for i in 0..len {
            next[i] -= b[k] * u[i];
            if k > 0 {
                next[i] -= a[k] * basis[k - 1][i];
            }
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &next);
                for (x, y) in next.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let norm = dot(&next, &next).sqrt();
        if !(norm > 0.0) {
            return Err(Error::Precision(format!("Lanczos breakdown at level {k}")));
        }
        a[k + 1] = norm;
        basis.push(next.into_iter().map(|v| v / norm).collect());
    }

    let log_mass = mass.ln();
    let mut log_gamma = Vec::with_capacity(levels);
    // γ_0 = (∫e^{-nV})^{-1/2}
    let mut lg = -0.5 * (log_mass - nf * v_min);
    for k in 0..levels {
        if k > 0 {
            lg -= a[k].ln();
        }
        log_gamma.push(lg);
    }
    let mut table = RecurrenceTable {
        potential: p.clone(),
        n_weight: n,
        levels,
        a,
        b,
        log_gamma,
        window: (lo, hi),
        gram_error: 0.0,
        grid,
        v_min,
        log_mass,
    };
    table.gram_error = table.gram_defect(2 * panels + 1);
    Ok(table)
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

impl RecurrenceTable {
    /// `m` with `deg V = 2m`.
    pub fn m(&self) -> usize {
        self.potential.degree() / 2
    }

    /// `ψ_0(x), …, ψ_{count-1}(x)` by forward recurrence.
    pub fn psi(&self, x: f64, count: usize) -> Vec<f64> {
        let count = count.min(self.levels);
        let mut out = vec![0.0; count];
        let nf = self.n_weight as f64;
        out[0] = (-0.5 * nf * (self.potential.eval(x) - self.v_min) - 0.5 * self.log_mass).exp();
        if count > 1 {
            out[1] = (x - self.b[0]) * out[0] / self.a[1];
        }
        for k in 1..count.saturating_sub(1) {
            out[k + 1] = ((x - self.b[k]) * out[k] - self.a[k] * out[k - 1]) / self.a[k + 1];
        }
        out
    }

    /// `ψ_j(x)` and `ψ_j'(x)` for `j < count`.
    pub fn psi_with_derivative(&self, x: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
        let psi = self.psi(x, count);
        let count = psi.len();
        // φ_j = p_j' e^{-nV/2} obeys the differentiated recurrence
        let mut phi = vec![0.0; count];
        if count > 1 {
            phi[1] = psi[0] / self.a[1];
        }
        for k in 1..count.saturating_sub(1) {
            phi[k + 1] = (psi[k] + (x - self.b[k]) * phi[k] - self.a[k] * phi[k - 1]) / self.a[k + 1];
        }
        let half_dv = 0.5 * self.n_weight as f64 * self.potential.derivative().eval(x);
        let dpsi = phi.iter().zip(&psi).map(|(f, p)| f - half_dv * p).collect();
        (psi, dpsi)
    }

    /// Truncated Jacobi matrix of size `K`.
    pub fn jacobi(&self) -> DMatrix<f64> {
        let k = self.levels;
        let mut j = DMatrix::zeros(k, k);
        for i in 0..k {
            j[(i, i)] = self.b[i];
            if i + 1 < k {
                j[(i, i + 1)] = self.a[i + 1];
                j[(i + 1, i)] = self.a[i + 1];
            }
        }
        j
    }

    /// `ln Γ_n = Σ_{j<n} ln γ_j`.
    pub fn log_gamma_product(&self, n: usize) -> f64 {
        self.log_gamma[..n].iter().sum()
    }

    /// Largest `|∫ψ_jψ_k - δ_jk|` on a grid with `panels` panels over the
    /// same window, sharing no nodes with the construction grid.
    pub fn gram_defect(&self, panels: usize) -> f64 {
        let grid = CompositeGrid::new(self.window.0, self.window.1, panels, GRID_ORDER + 4);
        let k = self.levels;
        let mut gram = DMatrix::<f64>::zeros(k, k);
        for (&x, &w) in grid.nodes.iter().zip(&grid.weights) {
            let psi = nalgebra::DVector::from_vec(self.psi(x, k));
            gram.ger(w, &psi, &psi, 1.0);
        }
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_recurrence_is_rescaled_hermite() {
        for n in [3, 20, 60] {
            let t = recurrence(&Polynomial::gaussian(), n, n + 8).unwrap();
            for k in 1..t.levels {
                assert!((t.a[k] - (k as f64 / n as f64).sqrt()).abs() < 1e-11, "n={n} k={k}");
                assert!(t.b[k].abs() < 1e-12);
            }
            assert!(t.gram_error < 1e-9);
        }
    }

    #[test]
    fn even_potential_has_zero_diagonal() {
        let v = Polynomial::new(vec![0.0, 0.0, 0.3, 0.0, 0.05]).unwrap();
        let t = recurrence(&v, 30, 40).unwrap();
        assert!(t.b.iter().all(|b| b.abs() < 1e-10));
        assert!(t.gram_error < 1e-9);
    }

    #[test]
    fn asymmetric_potential_is_orthonormal() {
        let v = Polynomial::new(vec![0.0, 0.4, 0.5, 0.1, 0.08]).unwrap();
        let t = recurrence(&v, 24, 34).unwrap();
        assert!(t.gram_error < 1e-9, "{}", t.gram_error);
        assert!(t.b.iter().any(|b| b.abs() > 1e-3));
    }

    #[test]
    fn leading_coefficients_match_hermite() {
        // p_j = γ_j x^j + …; for e^{-nx²/2}, γ_j² = n^j / (j! √(2π/n))
        let n = 5;
        let t = recurrence(&Polynomial::gaussian(), n, 10).unwrap();
        let nf = n as f64;
        for j in 0..10 {
            let expect = 0.5 * (j as f64 * nf.ln() - libm::lgamma(j as f64 + 1.0) - 0.5 * (2.0 * std::f64::consts::PI / nf).ln());
            assert!((t.log_gamma[j] - expect).abs() < 1e-10, "j={j}");
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let v = Polynomial::new(vec![0.0, 0.0, 0.0, 0.0, 1.0 / 12.0]).unwrap();
        let t = recurrence(&v, 16, 24).unwrap();
        for x in [-1.7, -0.3, 0.45, 1.2] {
            let (_, d) = t.psi_with_derivative(x, 24);
            let h = 1e-5;
            let (p1, m1) = (t.psi(x + h, 24), t.psi(x - h, 24));
            for j in 0..24 {
                assert!((d[j] - (p1[j] - m1[j]) / (2.0 * h)).abs() < 1e-6 * (1.0 + d[j].abs()));
            }
        }
    }

    #[test]
    fn rejects_odd_degree_and_too_many_levels() {
        let odd = Polynomial::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(recurrence(&odd, 10, 12).is_err());
        assert!(recurrence(&Polynomial::gaussian(), 10, 80).is_err());
    }
}

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::Polynomial;
use crate::quadrature::gauss_legendre_on;

use super::{recurrence, RecurrenceTable, GRID_ORDER};

/// Tolerance on `ε(ψ_j') = ψ_j` at the grid nodes.
pub const CUMULATIVE_TOLERANCE: f64 = 1e-9;
pub const SKEW_TOLERANCE: f64 = 1e-10;
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

/// Matrices `D`, `M` on the levels `0 ..= n+2m-2` together with the data
/// needed to evaluate `εψ_j` anywhere.
#[derive(Debug, Clone)]
pub struct KernelWorkspace {
    pub recurrence: RecurrenceTable,
    pub n: usize,
    pub m: usize,
    /// `(ψ_j', ψ_k)`, banded with half-bandwidth `2m-1`.
    pub d: DMatrix<f64>,
    /// `(εψ_j, ψ_k)`.
    pub m_matrix: DMatrix<f64>,
    /// `∫ψ_j` over the real line.
    pub totals: Vec<f64>,
    pub gamma_log: f64,
    /// `max |ε(ψ_j')(x_i) - ψ_j(x_i)|` at the grid nodes.
    pub cumulative_drift: f64,
    /// `[level][panel]`: `∫_{-∞}^{left edge}ψ_j`.
    panel_start: Vec<Vec<f64>>,
}

/// `T_n` by both constructions.
#[derive(Debug, Clone, Serialize)]
pub struct TMatrix {
    pub corner: Vec<Vec<f64>>,
    pub product: Vec<Vec<f64>>,
    pub difference: f64,
    pub log_abs_det: f64,
    /// `ln|det(1 - D_21 M_12)|`.
    pub log_abs_det_transposed: f64,
}

/// Residuals of the structural identities.
#[derive(Debug, Clone, Serialize)]
pub struct StructuralReport {
    pub n: usize,
    pub gram: f64,
    pub d_skew: f64,
    pub d_band: f64,
    pub m_skew: f64,
    pub dm_identity: f64,
    pub cumulative_drift: f64,
    pub derivative_expansion: f64,
    pub reproducing: f64,
}

impl StructuralReport {
    pub fn passed(&self) -> bool {
        self.gram < 1e-9
            && self.d_skew < SKEW_TOLERANCE
            && self.d_band == 0.0
            && self.m_skew < SKEW_TOLERANCE
            && self.dm_identity < 1e-7
            && self.derivative_expansion < 1e-6
            && self.reproducing < 1e-8
    }
}

impl KernelWorkspace {
    /// Builds the workspace for `e^{-nV}` with `K = n + 4m + 4` levels.
    pub fn new(p: &Polynomial, n: usize) -> Result<Self> {
        let m = p.degree() / 2;
        if m == 0 {
            return Err(Error::Domain("V must have positive even degree".into()));
        }
        if n < 2 * m - 1 {
            return Err(Error::Domain(format!("n = {n} is smaller than 2m - 1 = {}", 2 * m - 1)));
        }
        let table = recurrence(p, n, n + 4 * m + 4)?;
        Self::from_recurrence(table)
    }

    pub fn from_recurrence(table: RecurrenceTable) -> Result<Self> {
        let n = table.n_weight;
        let m = table.m();
        let size = n + 2 * m - 1;
        if table.levels < size + 2 * m {
            return Err(Error::Domain("recurrence needs at least n + 4m - 1 levels".into()));
        }
        let d = differentiation(&table, size)?;

        let grid = &table.grid;
        let nodes = grid.len();
        let mut psi = DMatrix::<f64>::zeros(size, nodes);
        let mut dpsi = DMatrix::<f64>::zeros(size, nodes);
        for (i, &x) in grid.nodes.iter().enumerate() {
            let (p, dp) = table.psi_with_derivative(x, size);
            for j in 0..size {
                psi[(j, i)] = p[j];
                dpsi[(j, i)] = dp[j];
            }
        }
        let mut eps = DMatrix::<f64>::zeros(size, nodes);
        let mut totals = Vec::with_capacity(size);
        let mut panel_start = Vec::with_capacity(size);
        let mut drift = 0.0f64;
        let order = grid.order;
        for j in 0..size {
            let row: Vec<f64> = psi.row(j).iter().copied().collect();
            let cum = grid.cumulative(&row);
            let total = grid.integrate(&row);
            let mut starts = Vec::with_capacity(grid.panels);
            let mut running = 0.0;
            for p in 0..grid.panels {
                starts.push(running);
                running += grid.integrate_panel(&row[p * order..(p + 1) * order], p);
            }
            for i in 0..nodes {
                eps[(j, i)] = cum[i] - 0.5 * total;
            }
            let drow: Vec<f64> = dpsi.row(j).iter().copied().collect();
            let dcum = grid.cumulative(&drow);
            for i in 0..nodes {
                drift = drift.max((dcum[i] - row[i]).abs());
            }
            totals.push(total);
            panel_start.push(starts);
        }
        if drift > CUMULATIVE_TOLERANCE {
            return Err(Error::Precision(format!("cumulative integration drift {drift:.2e}")));
        }
        let weighted = DMatrix::from_fn(size, nodes, |j, i| psi[(j, i)] * grid.weights[i]);
        let m_matrix = &eps * weighted.transpose();
        let gamma_log = table.log_gamma_product(n);
        Ok(KernelWorkspace { recurrence: table, n, m, d, m_matrix, totals, gamma_log, cumulative_drift: drift, panel_start })
    }

    /// Levels `0 ..= n+2m-2`.
    pub fn size(&self) -> usize {
        self.n + 2 * self.m - 1
    }

    /// Indices of `Φ_1 = (ψ_{n-2m+1}, …, ψ_{n-1})`.
    pub fn phi1(&self) -> std::ops::Range<usize> {
        self.n + 1 - 2 * self.m..self.n
    }

    /// Indices of `Φ_2 = (ψ_n, …, ψ_{n+2m-2})`.
    pub fn phi2(&self) -> std::ops::Range<usize> {
        self.n..self.size()
    }

    pub fn psi(&self, x: f64) -> Vec<f64> {
        self.recurrence.psi(x, self.size())
    }

    pub fn psi_with_derivative(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        self.recurrence.psi_with_derivative(x, self.size())
    }

    /// `εψ_j(x)` for every level; constant `±½∫ψ_j` outside the grid.
    pub fn eps_psi(&self, x: f64) -> Vec<f64> {
        let grid = &self.recurrence.grid;
        let size = self.size();
        if x <= grid.a {
            return self.totals.iter().map(|t| -0.5 * t).collect();
        }
        if x >= grid.b {
            return self.totals.iter().map(|t| 0.5 * t).collect();
        }
        let p = grid.panel_of(x);
        let left = grid.panel_left(p);
        let mut out: Vec<f64> = (0..size).map(|j| self.panel_start[j][p] - 0.5 * self.totals[j]).collect();
        if x > left {
            let (nodes, weights) = gauss_legendre_on(left, x, GRID_ORDER);
            for (&t, &w) in nodes.iter().zip(&weights) {
                for (o, v) in out.iter_mut().zip(self.psi(t)) {
                    *o += w * v;
                }
            }
        }
        out
    }

    /// `εψ_j` on a list of points.
    pub fn eps_psi_on(&self, j: usize, xs: &[f64]) -> Result<Vec<f64>> {
        if j >= self.size() {
            return Err(Error::Domain(format!("level {j} beyond n + 2m - 2 = {}", self.size() - 1)));
        }
        Ok(xs.iter().map(|&x| self.eps_psi(x)[j]).collect())
    }

    fn block(mat: &DMatrix<f64>, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> DMatrix<f64> {
        mat.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned()
    }

    pub fn d_block(&self, r: usize, s: usize) -> DMatrix<f64> {
        Self::block(&self.d, self.phi(r), self.phi(s))
    }

    pub fn m_block(&self, r: usize, s: usize) -> DMatrix<f64> {
        Self::block(&self.m_matrix, self.phi(r), self.phi(s))
    }

    fn phi(&self, r: usize) -> std::ops::Range<usize> {
        if r == 1 {
            self.phi1()
        } else {
            self.phi2()
        }
    }

    /// Principal `n×n` blocks `D_n`, `M_n`.
    pub fn d_n(&self) -> DMatrix<f64> {
        Self::block(&self.d, 0..self.n, 0..self.n)
    }

    pub fn m_n(&self) -> DMatrix<f64> {
        Self::block(&self.m_matrix, 0..self.n, 0..self.n)
    }

    /// `T_n` as the corner of `D_n M_n` and as `1 - D_12 M_21`.
    pub fn t_matrix(&self) -> Result<TMatrix> {
        let r = 2 * self.m - 1;
        let dm = self.d_n() * self.m_n();
        let corner = Self::block(&dm, self.n - r..self.n, self.n - r..self.n);
        let product = DMatrix::identity(r, r) - self.d_block(1, 2) * self.m_block(2, 1);
        let transposed = DMatrix::identity(r, r) - self.d_block(2, 1) * self.m_block(1, 2);
        let difference = (&corner - &product).amax();
        if difference > 1e-8 {
            return Err(Error::Structural(format!("corner of D_n M_n differs from 1 - D12 M21 by {difference:.2e}")));
        }
        let log_abs_det = product.clone().lu().determinant().abs().ln();
        let log_abs_det_transposed = transposed.lu().determinant().abs().ln();
        let rows = |m: &DMatrix<f64>| (0..r).map(|i| m.row(i).iter().copied().collect()).collect();
        Ok(TMatrix { corner: rows(&corner), product: rows(&product), difference, log_abs_det, log_abs_det_transposed })
    }

    /// `D M` on rows `j < n`, where the band sum is complete.
    pub fn dm_identity_error(&self) -> f64 {
        let prod = Self::block(&self.d, 0..self.n, 0..self.size()) * &self.m_matrix;
        let mut worst = 0.0f64;
        for j in 0..self.n {
            for l in 0..self.size() {
                let target = if j == l { 1.0 } else { 0.0 };
                worst = worst.max((prod[(j, l)] - target).abs());
            }
        }
        worst
    }

    /// Largest entry of `D_n M_n - 1` outside the bottom `2m-1` rows.
    pub fn dm_upper_rows_error(&self) -> f64 {
        let r = 2 * self.m - 1;
        let prod = self.d_n() * self.m_n() - DMatrix::identity(self.n, self.n);
        Self::block(&prod, 0..self.n - r, 0..self.n).amax()
    }

    /// `max |ψ_j'(x) - Σ_k D_jk ψ_k(x)|` over `xs`, `j < n`.
    pub fn derivative_expansion_error(&self, xs: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for &x in xs {
            let (psi, dpsi) = self.psi_with_derivative(x);
            for j in 0..self.n {
                let s: f64 = (0..self.size()).map(|k| self.d[(j, k)] * psi[k]).sum();
                worst = worst.max((dpsi[j] - s).abs());
            }
        }
        worst
    }

    /// `√n · max_{x∈xs} |εψ_n(x)|`.
    pub fn eps_psi_bound(&self, xs: &[f64]) -> f64 {
        let sup = xs.iter().map(|&x| self.eps_psi(x)[self.n].abs()).fold(0.0, f64::max);
        (self.n as f64).sqrt() * sup
    }

    /// `√n · max |εψ_j(x)|` over `x ∈ xs` and `j ∈ {n-2m+1, …, n+2m-2}`.
    pub fn eps_psi_window_bound(&self, xs: &[f64]) -> f64 {
        let range = self.n + 1 - 2 * self.m..self.size();
        let sup = xs
            .iter()
            .map(|&x| self.eps_psi(x)[range.clone()].iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
            .fold(0.0, f64::max);
        (self.n as f64).sqrt() * sup
    }

    /// `n · max |M_jk|` over `j, k ∈ {n-2m+1, …, n+2m-2}`.
    pub fn corner_m_bound(&self) -> f64 {
        let range = self.n + 1 - 2 * self.m..self.size();
        let block = Self::block(&self.m_matrix, range.clone(), range);
        self.n as f64 * block.amax()
    }

    pub fn structural_report(&self) -> StructuralReport {
        let size = self.size();
        let mut d_skew = 0.0f64;
        let mut d_band = 0.0f64;
        let mut m_skew = 0.0f64;
        for j in 0..size {
            for k in 0..size {
                d_skew = d_skew.max((self.d[(j, k)] + self.d[(k, j)]).abs());
                m_skew = m_skew.max((self.m_matrix[(j, k)] + self.m_matrix[(k, j)]).abs());
                if j.abs_diff(k) >= 2 * self.m {
                    d_band = d_band.max(self.d[(j, k)].abs());
                }
            }
        }
        let (a, b) = self.recurrence.window;
        let c = 0.5 * (a + b);
        let h = 0.25 * (b - a);
        let xs: Vec<f64> = (0..17).map(|i| c + h * (i as f64 / 8.0 - 1.0)).collect();
        StructuralReport {
            n: self.n,
            gram: self.recurrence.gram_error,
            d_skew,
            d_band,
            m_skew,
            dm_identity: self.dm_identity_error(),
            cumulative_drift: self.cumulative_drift,
            derivative_expansion: self.derivative_expansion_error(&xs),
            reproducing: self.reproducing_error(&[(c - 0.3 * h, c + 0.2 * h), (c, c), (c + 0.5 * h, c - 0.7 * h)]),
        }
    }

    /// Structural checks as a hard error.
    pub fn check(&self) -> Result<StructuralReport> {
        let report = self.structural_report();
        if report.d_skew > SKEW_TOLERANCE || report.d_band != 0.0 {
            return Err(Error::Structural(format!("D not banded skew-symmetric: {report:?}")));
        }
        if report.m_skew > SKEW_TOLERANCE || report.dm_identity > 1e-7 {
            return Err(Error::Precision(format!("M inconsistent with D: {report:?}")));
        }
        Ok(report)
    }
}

/// `D_jk = -(n/2) V'(J)_jk` for `j < k`, skew-extended.
fn differentiation(table: &RecurrenceTable, size: usize) -> Result<DMatrix<f64>> {
    let j = table.jacobi();
    let k = table.levels;
    let dv = table.potential.derivative();
    let mut acc = DMatrix::<f64>::zeros(k, k);
    for &c in dv.coeffs().iter().rev() {
        acc = &acc * &j;
        for i in 0..k {
            acc[(i, i)] += c;
        }
    }
    let half_n = 0.5 * table.n_weight as f64;
    let m = table.m();
    let mut d = DMatrix::<f64>::zeros(size, size);
    for r in 0..size {
        for s in 0..size {
            let sym = (acc[(r, s)] - acc[(s, r)]).abs();
            if sym > 1e-9 * (1.0 + acc[(r, s)].abs()) {
                return Err(Error::Structural(format!("V'(J) not symmetric at ({r},{s})")));
            }
            if r.abs_diff(s) >= 2 * m && acc[(r, s)].abs() > 1e-9 {
                return Err(Error::Structural(format!("V'(J) has entry {} outside the band at ({r},{s})", acc[(r, s)])));
            }
            d[(r, s)] = match r.cmp(&s) {
                std::cmp::Ordering::Less => -half_n * acc[(r, s)],
                std::cmp::Ordering::Greater => half_n * acc[(s, r)],
                std::cmp::Ordering::Equal => 0.0,
            };
            if r.abs_diff(s) >= 2 * m {
                d[(r, s)] = 0.0;
            }
        }
    }
    Ok(d)
}

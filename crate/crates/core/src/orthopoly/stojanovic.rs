use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::Polynomial;
use crate::sampler::{exact_partition, EnsembleConfig};

use super::KernelWorkspace;

/// Comparison of `det T_n` with the partition-function ratio, plus the two
/// intermediate determinant relations.
#[derive(Debug, Clone, Serialize)]
pub struct StojanovicReport {
    pub n: usize,
    pub log_q1: f64,
    /// `ln Q_{n/2,4}` with `n/2` variables and weight `e^{-nV}`.
    pub log_q4: f64,
    pub log_q2: f64,
    pub log_gamma: f64,
    pub det_t: f64,
    pub predicted: f64,
    pub relative_error: f64,
    /// `Q_{n,2} Γ_n² / n! - 1`.
    pub q2_gamma_error: f64,
    pub det_m: f64,
    pub det_m_predicted: f64,
    pub det_m_error: f64,
}

/// `det T_n` against `(Q_{n,1} Q_{n/2,4} / (Q_{n,2} (n/2)! 2^n))²` for `n ∈ {2, 4}`.
pub fn stojanovic_identity(p: &Polynomial, n: usize) -> Result<StojanovicReport> {
    if n != 2 && n != 4 {
        return Err(Error::Unsupported(format!("the identity is checked by quadrature for n ∈ {{2, 4}}, got {n}")));
    }
    let ws = KernelWorkspace::new(p, n)?;
    let log_q1 = exact_partition(&EnsembleConfig::new(n, 1.0, p.clone()))?;
    let log_q4 = exact_partition(&EnsembleConfig::new(n / 2, 4.0, p.clone()))?;
    let log_q2 = exact_partition(&EnsembleConfig::new(n, 2.0, p.clone()))?;
    let nf = n as f64;
    let ln2 = std::f64::consts::LN_2;
    let log_fact = |k: f64| libm::lgamma(k + 1.0);

    let t = ws.t_matrix()?;
    let r = t.product.len();
    let det_t = nalgebra::DMatrix::from_fn(r, r, |i, j| t.product[i][j]).determinant();
    let predicted = (2.0 * (log_q1 + log_q4 - log_q2 - log_fact(nf / 2.0) - nf * ln2)).exp();

    let log_gamma = ws.gamma_log;
    let q2_gamma_error = (log_q2 + 2.0 * log_gamma - log_fact(nf)).exp() - 1.0;
    let det_m = ws.m_n().determinant();
    let det_m_predicted = (2.0 * (log_q1 + log_gamma - log_fact(nf) - 0.5 * nf * ln2)).exp();
    Ok(StojanovicReport {
        n,
        log_q1,
        log_q4,
        log_q2,
        log_gamma,
        det_t,
        predicted,
        relative_error: ((det_t - predicted) / predicted).abs(),
        q2_gamma_error,
        det_m,
        det_m_predicted,
        det_m_error: ((det_m - det_m_predicted) / det_m_predicted).abs(),
    })
}

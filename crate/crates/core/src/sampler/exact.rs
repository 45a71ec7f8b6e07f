//! `log Q_{n,β}` for tiny `n` by nested Gauss–Kronrod quadrature.
//!
//! The integrand is symmetric, so the integral is `n!` times the integral
//! over the ordered region `λ_1 < … < λ_n`, where `|Δ|^β` is smooth. Every
//! level integrates over `[λ_{k-1}, hi]` with one Gauss–Legendre rule whose
//! order is doubled until the result is stable.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

use super::EnsembleConfig;

pub const MAX_EXACT_N: usize = 4;

const WINDOW_LOG_DROP: f64 = 50.0;
const REL_TOL: f64 = 1e-10;

/// Interval outside which the integrand is below `e^{-50}` of its peak,
/// allowing for the growth of the Vandermonde factor.
pub fn integration_window(cfg: &EnsembleConfig) -> (f64, f64, f64) {
    let c = 0.5 * cfg.n as f64 * cfg.beta;
    let v = |x: f64| cfg.potential_at(x);
    // coarse scan for the minimiser
    let mut x_min = 0.0;
    let mut v_min = v(0.0);
    let mut x = -20.0;
    while x <= 20.0 {
        if v(x) < v_min {
            v_min = v(x);
            x_min = x;
        }
        x += 0.005;
    }
    let vandermonde = |dist: f64| cfg.beta * (cfg.n as f64 - 1.0) * (1.0 + 2.0 * dist).ln();
    let reach = |dir: f64| {
        let mut d = 0.05;
        while c * (v(x_min + dir * d) - v_min) - vandermonde(d) < WINDOW_LOG_DROP {
            d += 0.05;
        }
        x_min + dir * d
    };
    (reach(-1.0), reach(1.0), v_min)
}

struct Nested<'a> {
    cfg: &'a EnsembleConfig,
    c: f64,
    v_min: f64,
    hi: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    integer_beta: Option<i32>,
}

impl Nested<'_> {
    fn level(&self, prefix: &mut Vec<f64>, lo: f64) -> f64 {
        let k = prefix.len();
        let n = self.cfg.n;
        let half = 0.5 * (self.hi - lo);
        let mut total = 0.0;
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            let x = lo + half * (t + 1.0);
            let mut term = half * w * (-self.c * (self.cfg.potential_at(x) - self.v_min)).exp();
            for &p in prefix.iter() {
                let dx = x - p;
                term *= match self.integer_beta {
                    Some(b) => dx.powi(b),
                    None => dx.powf(self.cfg.beta),
                };
            }
            if term == 0.0 {
                continue;
            }
            if k + 1 < n {
                prefix.push(x);
                term *= self.level(prefix, x);
                prefix.pop();
            }
            total += term;
        }
        total
    }
}

/// `log Q_{n,β}` over the whole real line for `n ≤ 4`.
pub fn exact_partition(cfg: &EnsembleConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.n > MAX_EXACT_N {
        return Err(Error::Unsupported(format!("exact quadrature needs n ≤ {MAX_EXACT_N}, got n = {}", cfg.n)));
    }
    let (lo, hi, v_min) = integration_window(cfg);
    let integer_beta = (cfg.beta.fract() == 0.0 && cfg.beta <= 16.0).then_some(cfg.beta as i32);
    let max_order = match cfg.n {
        1 | 2 => 1024,
        3 => 256,
        _ => 128,
    };
    let (nodes, weights) = gauss_legendre(16);
    let mut nested = Nested { cfg, c: 0.5 * cfg.n as f64 * cfg.beta, v_min, hi, nodes, weights, integer_beta };
    let mut prev = nested.level(&mut Vec::new(), lo);
    loop {
        let (nodes, weights) = gauss_legendre(2 * nested.nodes.len());
        nested.nodes = nodes;
        nested.weights = weights;
        let next = nested.level(&mut Vec::new(), lo);
        if (next - prev).abs() <= REL_TOL * next.abs() {
            let nf = cfg.n as f64;
            let log_fact = libm::lgamma(nf + 1.0);
            return Ok(next.ln() + log_fact - nf * nested.c * v_min);
        }
        if nested.nodes.len() >= max_order {
            return Err(Error::Precision(format!(
                "exact partition not converged with {} nodes per level (relative change {:.2e})",
                nested.nodes.len(),
                (next - prev).abs() / next.abs()
            )));
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::selberg_log_q0;
    use crate::potential::Polynomial;
    use std::f64::consts::PI;

    fn gauss(n: usize, beta: f64) -> EnsembleConfig {
        EnsembleConfig::new(n, beta, Polynomial::gaussian())
    }

    #[test]
    fn closed_forms() {
        assert!((exact_partition(&gauss(2, 2.0)).unwrap() - PI.ln()).abs() < 1e-9);
        assert!((exact_partition(&gauss(2, 1.0)).unwrap() - (4.0 * PI.sqrt()).ln()).abs() < 1e-9);
        for beta in [1.0, 2.5, 4.0] {
            assert!((exact_partition(&gauss(1, beta)).unwrap() - 0.5 * (4.0 * PI / beta).ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_selberg_for_three_eigenvalues() {
        for beta in [1.0, 2.0, 4.0] {
            let exact = exact_partition(&gauss(3, beta)).unwrap();
            let selberg = selberg_log_q0(3, beta).unwrap();
            assert!((exact - selberg).abs() < 1e-6, "β={beta}: {exact} vs {selberg}");
        }
    }

    #[test]
    fn rejects_large_n() {
        assert!(matches!(exact_partition(&gauss(5, 1.0)), Err(Error::Unsupported(_))));
    }
}

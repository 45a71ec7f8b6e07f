//! Metropolis sampling of the eigenvalue density
//! `∝ Π e^{-nβV_h(λ_i)/2} Π_{i<j} |λ_i - λ_j|^β` restricted to
//! `σ_ε = [a - ε, b + ε]^n`, with `V_h = V + h/n`.

mod exact;
mod stats;

pub use exact::{exact_partition, integration_window, MAX_EXACT_N};
pub use stats::{
    connected_kernel, empirical_stieltjes, ks_distance, linear_statistic, loop_residual, semicircle_cdf, batch_means,
    LinStatEstimate, LoopResidual, StieltjesEstimate, BATCHES,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::solve_support;
use crate::error::{Error, Result};
use crate::potential::Polynomial;

/// Default half-width of the truncation margin around the support.
pub const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EnsembleConfig {
    pub n: usize,
    pub beta: f64,
    pub potential: Polynomial,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub h: Option<Polynomial>,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl EnsembleConfig {
    pub fn new(n: usize, beta: f64, potential: Polynomial) -> Self {
        EnsembleConfig { n, beta, potential, epsilon: DEFAULT_EPSILON, h: None }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::Domain(format!("β = {} must be positive", self.beta)));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Domain(format!("ε = {} must be positive", self.epsilon)));
        }
        Ok(())
    }

    /// `σ_ε` for this potential.
    pub fn domain(&self) -> Result<(f64, f64)> {
        let (a, b) = solve_support(&self.potential)?;
        Ok((a - self.epsilon, b + self.epsilon))
    }

    /// `V_h(x)`.
    pub fn potential_at(&self, x: f64) -> f64 {
        let v = self.potential.eval(x);
        match &self.h {
            Some(h) => v + h.eval(x) / self.n as f64,
            None => v,
        }
    }
}

/// Chain-level run parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct RunParams {
    pub chains: usize,
    /// Recorded sweeps per chain (one sweep = `n` single-site proposals).
    pub steps: usize,
    /// Tuning sweeps per chain; defaults to 20% of `steps`.
    #[serde(default)]
    pub burnin: Option<usize>,
    pub seed: u64,
    /// Store every `thin`-th sweep.
    #[serde(default = "default_thin")]
    pub thin: usize,
}

fn default_thin() -> usize {
    1
}

impl RunParams {
    pub fn new(chains: usize, steps: usize, seed: u64) -> Self {
        RunParams { chains, steps, burnin: None, seed, thin: 1 }
    }

    pub fn burnin(&self) -> usize {
        self.burnin.unwrap_or(self.steps / 5)
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ChainSummary {
    pub index: usize,
    pub acceptance_rate: f64,
    pub step_size: f64,
    pub stored: usize,
}

/// Output of [`run_chains`]: the stored configurations of every chain in
/// chain order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub config: EnsembleConfig,
    pub params: RunParams,
    pub domain: (f64, f64),
    /// Flattened configurations, `n` values each.
    pub samples: Vec<f64>,
    pub chains: Vec<ChainSummary>,
    pub acceptance_rate: f64,
}

impl SampleBatch {
    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.config.n
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn configurations(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks_exact(self.config.n)
    }
}

/// Runs independent chains in parallel and merges them in chain order.
pub fn run_chains(cfg: &EnsembleConfig, params: &RunParams) -> Result<SampleBatch> {
    cfg.validate()?;
    if params.chains == 0 || params.steps == 0 || params.thin == 0 {
        return Err(Error::Domain("chains, steps and thin must be positive".into()));
    }
    let domain = cfg.domain()?;
    let results: Vec<(Vec<f64>, ChainSummary)> = (0..params.chains)
        .into_par_iter()
        .map(|index| run_single(cfg, params, domain, index))
        .collect();

    let mut samples = Vec::new();
    let mut chains = Vec::with_capacity(results.len());
    for (s, summary) in results {
        samples.extend_from_slice(&s);
        chains.push(summary);
    }
    let acceptance_rate = chains.iter().map(|c| c.acceptance_rate).sum::<f64>() / chains.len() as f64;
    if let Some(bad) = chains.iter().find(|c| !(0.05..=0.95).contains(&c.acceptance_rate)) {
        return Err(Error::Mixing { rate: bad.acceptance_rate });
    }
    Ok(SampleBatch { config: cfg.clone(), params: *params, domain, samples, chains, acceptance_rate })
}

/// `ln Π_j |(y - λ_j)/(x - λ_j)|` over `j ≠ k`, taking one logarithm per
/// block of eight ratios.
fn log_ratio(lambda: &[f64], k: usize, x: f64, y: f64) -> f64 {
    let mut acc = 0.0;
    let mut prod = 1.0;
    let mut count = 0;
    for (j, &l) in lambda.iter().enumerate() {
        if j == k {
            continue;
        }
        prod *= (y - l) / (x - l);
        count += 1;
        if count == 8 {
            acc += prod.abs().ln();
            prod = 1.0;
            count = 0;
        }
    }
    acc + prod.abs().ln()
}

fn chain_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

fn run_single(cfg: &EnsembleConfig, params: &RunParams, domain: (f64, f64), index: usize) -> (Vec<f64>, ChainSummary) {
    let n = cfg.n;
    let (lo, hi) = domain;
    let mut rng = chain_rng(params.seed, index);
    let (a, b) = (lo + cfg.epsilon, hi - cfg.epsilon);
    // start from Chebyshev points of the support
    let mut lambda: Vec<f64> = (0..n)
        .map(|i| 0.5 * (a + b) - 0.5 * (b - a) * (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos())
        .collect();
    let mut vals: Vec<f64> = lambda.iter().map(|&x| cfg.potential_at(x)).collect();
    let weight = 0.5 * n as f64 * cfg.beta;
    let mut step = 0.5 * (b - a) / n as f64;

    let sweep = |lambda: &mut Vec<f64>, vals: &mut Vec<f64>, step: f64, rng: &mut ChaCha8Rng| -> usize {
        let mut accepted = 0;
        for k in 0..n {
            let x = lambda[k];
            let y = x + step * (2.0 * rng.gen::<f64>() - 1.0);
            let u: f64 = rng.gen();
            if y <= lo || y >= hi {
                continue;
            }
            let vy = cfg.potential_at(y);
            let delta = -weight * (vy - vals[k]) + cfg.beta * log_ratio(lambda, k, x, y);
            if u.ln() < delta {
                lambda[k] = y;
                vals[k] = vy;
                accepted += 1;
            }
        }
        accepted
    };

    let burnin = params.burnin();
    let window = 20;
    let mut acc_window = 0;
    for s in 0..burnin {
        acc_window += sweep(&mut lambda, &mut vals, step, &mut rng);
        if (s + 1) % window == 0 {
            let rate = acc_window as f64 / (window * n) as f64;
            step *= (2.0 * (rate - 0.4)).exp();
            step = step.clamp(1e-6, hi - lo);
            acc_window = 0;
        }
    }

    let mut stored = Vec::with_capacity(params.steps / params.thin * n);
    let mut accepted = 0usize;
    for s in 0..params.steps {
        accepted += sweep(&mut lambda, &mut vals, step, &mut rng);
        if (s + 1) % params.thin == 0 {
            stored.extend_from_slice(&lambda);
        }
    }
    let summary = ChainSummary {
        index,
        acceptance_rate: accepted as f64 / (params.steps * n) as f64,
        step_size: step,
        stored: stored.len() / n,
    };
    (stored, summary)
}

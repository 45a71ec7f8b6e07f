//! Estimators on stored configurations.

use num_complex::Complex64;
use serde::Serialize;

use crate::equilibrium::EquilibriumMeasure;
use crate::error::{Error, Result};

use super::SampleBatch;

/// Number of batches in the batch-means error estimate.
pub const BATCHES: usize = 32;
/// Smallest allowed distance between a spectral parameter and `σ_ε`.
pub const MIN_DISTANCE: f64 = 0.05;

/// Mean and batch-means standard error of a time series.
pub fn batch_means(series: &[f64]) -> (f64, f64) {
    let len = series.len();
    let mean = series.iter().sum::<f64>() / len as f64;
    if len < 2 * BATCHES {
        let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (len.max(2) - 1) as f64;
        return (mean, (var / len as f64).sqrt());
    }
    let size = len / BATCHES;
    let means: Vec<f64> = (0..BATCHES)
        .map(|b| series[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / BATCHES as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    (mean, (var / BATCHES as f64).sqrt())
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct LinStatEstimate {
    pub mean: f64,
    /// Sample variance of `Σf(λ_i)` (normalized by the number of samples).
    pub variance: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn statistic_series<F: Fn(f64) -> f64>(batch: &SampleBatch, f: &F) -> Vec<f64> {
    batch.configurations().map(|c| c.iter().map(|&x| f(x)).sum()).collect()
}

/// Mean, variance and batch-means error of `N_n[f] = Σ f(λ_i)`.
pub fn linear_statistic<F: Fn(f64) -> f64>(batch: &SampleBatch, f: F) -> LinStatEstimate {
    let series = statistic_series(batch, &f);
    let (mean, stderr) = batch_means(&series);
    let variance = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / series.len() as f64;
    LinStatEstimate { mean, variance, stderr, samples: series.len() }
}

/// `∫∫ k_n(λ,μ) f(λ) f(μ)` from the empirical one- and two-point
/// functions: `E Σ_{i≠j} f_i f_j - (E Σ f_i)² + E Σ f_i²`.
pub fn connected_kernel<F: Fn(f64) -> f64>(batch: &SampleBatch, f: F) -> f64 {
    let count = batch.len() as f64;
    let (mut pair, mut single, mut square) = (0.0, 0.0, 0.0);
    for c in batch.configurations() {
        let vals: Vec<f64> = c.iter().map(|&x| f(x)).collect();
        let s: f64 = vals.iter().sum();
        let s2: f64 = vals.iter().map(|v| v * v).sum();
        pair += s * s - s2;
        single += s;
        square += s2;
    }
    let mean = single / count;
    pair / count - mean * mean + square / count
}

/// `g_n(z)` and `u_n(z) = n(g_n(z) - g(z))` with error bars.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct StieltjesEstimate {
    pub z: [f64; 2],
    pub g_n: [f64; 2],
    pub g_n_stderr: [f64; 2],
    pub g: [f64; 2],
    pub u_n: [f64; 2],
    pub u_n_stderr: [f64; 2],
}

fn check_distance(batch: &SampleBatch, z: Complex64) -> Result<()> {
    let (lo, hi) = batch.domain;
    let dx = (lo - z.re).max(z.re - hi).max(0.0);
    let dist = dx.hypot(z.im);
    if dist < MIN_DISTANCE {
        return Err(Error::Domain(format!("z = {z} lies within {MIN_DISTANCE} of σ_ε = [{lo}, {hi}]")));
    }
    Ok(())
}

fn complex_mean(series_re: &[f64], series_im: &[f64]) -> (Complex64, [f64; 2]) {
    let (re, se_re) = batch_means(series_re);
    let (im, se_im) = batch_means(series_im);
    (Complex64::new(re, im), [se_re, se_im])
}

/// Empirical Stieltjes transform of the one-point function against the
/// equilibrium transform (both in the sampled variable).
pub fn empirical_stieltjes(batch: &SampleBatch, eq: &EquilibriumMeasure, zs: &[Complex64]) -> Result<Vec<StieltjesEstimate>> {
    let n = batch.n() as f64;
    zs.iter()
        .map(|&z| {
            check_distance(batch, z)?;
            let (re, im): (Vec<f64>, Vec<f64>) = batch
                .configurations()
                .map(|c| {
                    let s: Complex64 = c.iter().map(|&x| 1.0 / (z - x)).sum::<Complex64>() / n;
                    (s.re, s.im)
                })
                .unzip();
            let (g_n, se) = complex_mean(&re, &im);
            let g = eq.stieltjes_original(z)?;
            let u = (g_n - g) * n;
            Ok(StieltjesEstimate {
                z: [z.re, z.im],
                g_n: [g_n.re, g_n.im],
                g_n_stderr: se,
                g: [g.re, g.im],
                u_n: [u.re, u.im],
                u_n_stderr: [n * se[0], n * se[1]],
            })
        })
        .collect()
}

impl StieltjesEstimate {
    /// Largest component of `u_n` in units of its standard error.
    pub fn u_z_score(&self) -> f64 {
        z_score(self.u_n, self.u_n_stderr)
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct LoopResidual {
    pub z: [f64; 2],
    pub residual: [f64; 2],
    pub stderr: [f64; 2],
    pub magnitude: f64,
}

impl LoopResidual {
    /// Largest of the two components in units of their standard errors.
    pub fn z_score(&self) -> f64 {
        z_score(self.residual, self.stderr)
    }
}

fn z_score(value: [f64; 2], stderr: [f64; 2]) -> f64 {
    let part = |v: f64, s: f64| if v == 0.0 { 0.0 } else { (v / s).abs() };
    part(value[0], stderr[0]).max(part(value[1], stderr[1]))
}

/// Smallest number of stored configurations for pair statistics.
pub const MIN_PAIR_SAMPLES: usize = 4 * BATCHES;

/// Residual of the first loop equation
/// `g_n² - V'g_n + ∫V(z,λ)p₁ - n⁻¹∫h'p₁/(z-λ) + n⁻¹(2/β-1)∫p₁/(z-λ)² + δ_n/n²`,
/// `V(z,λ) = (V'(z) - V'(λ))/(z - λ)`.
///
/// Writing `G = Σ 1/(z - λ_i)` and `G₂ = Σ 1/(z - λ_i)²`, the one- and
/// two-point integrals combine into the mean of the per-configuration
/// quantity `G²/n² - V'(z)G/n + n⁻¹ΣV(z,λ_i) - n⁻²Σh'(λ_i)/(z-λ_i) + (2/β-1)G₂/n²`,
/// whose expectation vanishes up to boundary terms from the truncation.
pub fn loop_residual(batch: &SampleBatch, zs: &[Complex64]) -> Result<Vec<LoopResidual>> {
    if batch.len() < MIN_PAIR_SAMPLES {
        return Err(Error::Precision(format!(
            "{} stored configurations; pair statistics need at least {MIN_PAIR_SAMPLES}",
            batch.len()
        )));
    }
    let cfg = &batch.config;
    let n = cfg.n as f64;
    let dv = cfg.potential.derivative();
    let dh = cfg.h.as_ref().map(|h| h.derivative());
    let kappa = 2.0 / cfg.beta - 1.0;
    zs.iter()
        .map(|&z| {
            check_distance(batch, z)?;
            let dvz = dv.eval_complex(z);
            let (re, im): (Vec<f64>, Vec<f64>) = batch
                .configurations()
                .map(|c| {
                    let mut g = Complex64::new(0.0, 0.0);
                    let mut g2 = Complex64::new(0.0, 0.0);
                    let mut kern = Complex64::new(0.0, 0.0);
                    let mut hterm = Complex64::new(0.0, 0.0);
                    for &x in c {
                        let r = 1.0 / (z - x);
                        g += r;
                        g2 += r * r;
                        kern += dv.divided_difference(z, x);
                        if let Some(dh) = &dh {
                            hterm += r * dh.eval(x);
                        }
                    }
                    let v = g * g / (n * n) - dvz * g / n + kern / n - hterm / (n * n) + g2 * (kappa / (n * n));
                    (v.re, v.im)
                })
                .unzip();
            let (mean, se) = complex_mean(&re, &im);
            Ok(LoopResidual { z: [z.re, z.im], residual: [mean.re, mean.im], stderr: se, magnitude: mean.norm() })
        })
        .collect()
}

/// Distribution function of the semicircle law on `[-2, 2]`.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    0.5 + x * (4.0 - x * x).sqrt() / (4.0 * std::f64::consts::PI) + (x / 2.0).asin() / std::f64::consts::PI
}

/// Kolmogorov–Smirnov distance between the pooled eigenvalues and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(batch: &SampleBatch, cdf: F) -> f64 {
    let mut all = batch.samples.clone();
    all.sort_by(f64::total_cmp);
    let m = all.len() as f64;
    all.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).abs().max((f - (i + 1) as f64 / m).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::super::{run_chains, EnsembleConfig, RunParams};
    use super::*;
    use crate::potential::Polynomial;

    fn gaussian_batch(n: usize, beta: f64, steps: usize, seed: u64) -> SampleBatch {
        let cfg = EnsembleConfig::new(n, beta, Polynomial::gaussian()).with_epsilon(1.0);
        run_chains(&cfg, &RunParams { chains: 4, steps, burnin: Some(steps / 5), seed, thin: 1 }).unwrap()
    }

    #[test]
    fn batch_means_of_iid_noise() {
        let series: Vec<f64> = (0..6400).map(|i| ((i * 7919) % 1000) as f64 / 1000.0).collect();
        let (m, se) = batch_means(&series);
        assert!((m - 0.4995).abs() < 1e-3);
        assert!(se > 0.0 && se < 0.01);
    }

    #[test]
    fn constant_and_odd_statistics() {
        let batch = gaussian_batch(8, 2.0, 4000, 1);
        let one = linear_statistic(&batch, |_| 1.0);
        assert_eq!(one.mean, 8.0);
        assert_eq!(one.variance, 0.0);
        assert!(connected_kernel(&batch, |_| 1.0).abs() < 1e-9);
        let odd = linear_statistic(&batch, |x| x);
        assert!(odd.stderr > 0.0);
        assert!(odd.mean.abs() < 3.0 * odd.stderr, "{odd:?}");
    }

    #[test]
    fn connected_kernel_is_the_variance() {
        let batch = gaussian_batch(10, 1.0, 2000, 3);
        let f = |x: f64| (0.7 * x).sin() + x * x;
        let k = connected_kernel(&batch, f);
        let v = linear_statistic(&batch, f).variance;
        assert!((k - v).abs() < 1e-9 * v.abs().max(1.0), "{k} {v}");
    }

    #[test]
    fn second_moment_matches_scaling_identity() {
        // E Σλ² = n - 1 + 2/β for λ²/2
        let batch = gaussian_batch(2, 2.0, 40_000, 11);
        let est = linear_statistic(&batch, |x| x * x);
        assert!((est.mean - 2.0).abs() < 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn loop_equation_holds_at_beta_two() {
        let batch = gaussian_batch(16, 2.0, 20_000, 5);
        let zs = [Complex64::new(0.5, 1.0), Complex64::new(-3.5, 0.5), Complex64::new(3.6, 0.0)];
        for r in loop_residual(&batch, &zs).unwrap() {
            assert!(r.z_score() < 3.5, "{r:?}");
        }
        let eq = EquilibriumMeasure::gaussian();
        for s in empirical_stieltjes(&batch, &eq, &zs).unwrap() {
            assert!(s.u_z_score() < 3.5, "{s:?}");
        }
        assert!(empirical_stieltjes(&batch, &eq, &[Complex64::new(0.0, 0.01)]).is_err());
    }

    #[test]
    fn loop_residual_needs_enough_samples() {
        let batch = gaussian_batch(4, 1.0, 20, 2);
        assert!(matches!(loop_residual(&batch, &[Complex64::new(0.0, 1.0)]), Err(Error::Precision(_))));
    }

    #[test]
    fn semicircle_cdf_endpoints() {
        assert_eq!(semicircle_cdf(-3.0), 0.0);
        assert!((semicircle_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((semicircle_cdf(2.0) - 1.0).abs() < 1e-15);
    }
}

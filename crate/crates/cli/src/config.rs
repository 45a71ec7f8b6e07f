//! Run configuration: JSON file, then command-line overrides.

use std::path::{Path, PathBuf};

use betalab::Polynomial;
use serde::{Deserialize, Serialize};

use crate::report::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    /// Potential coefficients, constant term first.
    pub coeffs: Vec<f64>,
    pub n: usize,
    pub beta: f64,
    /// Contour distance; chosen from the zeros of `P` when absent.
    pub d: Option<f64>,
    pub epsilon: f64,
    pub seed: u64,
    /// Test function for corrections and linear statistics.
    pub f: Vec<f64>,
    pub chains: usize,
    pub steps: usize,
    pub burnin: Option<usize>,
    pub thin: usize,
    /// Initial node count of the contour quadrature.
    pub nodes: Option<usize>,
    /// Rows of the density table.
    pub table_points: usize,
    /// Points `[re, im]` for Stieltjes and loop-equation estimates.
    pub z_points: Vec<[f64; 2]>,
    pub save_samples: bool,
    pub lambda0: f64,
    pub grid_size: usize,
    pub grid_half_width: f64,
    /// CSV of `(λ, μ)` pairs for `kernel`.
    pub points: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            coeffs: vec![0.0, 0.0, 0.5],
            n: 16,
            beta: 2.0,
            d: None,
            epsilon: 0.5,
            seed: 0,
            f: vec![0.0, 0.0, 1.0],
            chains: 4,
            steps: 2000,
            burnin: None,
            thin: 1,
            nodes: None,
            table_points: 201,
            z_points: vec![[0.5, 1.0], [-1.0, 1.5], [0.0, 3.0]],
            save_samples: false,
            lambda0: 0.0,
            grid_size: 21,
            grid_half_width: 2.0,
            points: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))
            }
        }
    }

    pub fn potential(&self) -> Result<Polynomial, CliError> {
        Ok(Polynomial::new(self.coeffs.clone())?)
    }

    pub fn test_function(&self) -> Result<Polynomial, CliError> {
        Ok(Polynomial::new(self.f.clone())?)
    }

    /// `β` as one of the symmetry classes 1, 2, 4.
    pub fn integer_beta(&self) -> Result<u32, CliError> {
        match self.beta {
            b if b == 1.0 => Ok(1),
            b if b == 2.0 => Ok(2),
            b if b == 4.0 => Ok(4),
            b => Err(CliError::Core(betalab::Error::Domain(format!("kernels need β ∈ {{1, 2, 4}}, got {b}")))),
        }
    }
}

/// Accepts `0,0,0.5`, `[0, 0, 0.5]` or whitespace-separated values.
pub fn parse_coeffs(text: &str) -> Result<Vec<f64>, CliError> {
    let trimmed = text.trim().trim_start_matches('[').trim_end_matches(']');
    let values: Result<Vec<f64>, _> = trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>())
        .collect();
    match values {
        Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v),
        Ok(_) => Err(CliError::Parse(format!("no finite coefficients in {text:?}"))),
        Err(e) => Err(CliError::Parse(format!("malformed coefficients {text:?}: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_formats() {
        assert_eq!(parse_coeffs("0,0,0.5").unwrap(), vec![0.0, 0.0, 0.5]);
        assert_eq!(parse_coeffs("[0, 0, 0.5]").unwrap(), vec![0.0, 0.0, 0.5]);
        assert_eq!(parse_coeffs("1 2").unwrap(), vec![1.0, 2.0]);
        assert!(parse_coeffs("0,x,1").is_err());
        assert!(parse_coeffs("").is_err());
        assert!(parse_coeffs("nan").is_err());
    }

    #[test]
    fn config_round_trip_and_unknown_keys() {
        let cfg = RunConfig { n: 7, seed: 99, ..RunConfig::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert!(serde_json::from_str::<RunConfig>(r#"{"coefs": [1]}"#).is_err());
        let partial: RunConfig = serde_json::from_str(r#"{"n": 3}"#).unwrap();
        assert_eq!(partial.n, 3);
        assert_eq!(partial.coeffs, vec![0.0, 0.0, 0.5]);
    }
}

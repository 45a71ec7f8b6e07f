use thiserror::Error;

/// Failure modes shared by every module.
///
/// The variants are grouped by how a caller should react: domain and
/// validation errors mean the input is outside what the theory covers,
/// precision and mixing errors mean the numerics need a bigger budget.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not one-cut: {0}")]
    NotOneCut(String),
    #[error("{condition} violated: {detail}")]
    Violation { condition: String, detail: String },
    #[error("normalization inconsistency: {0}")]
    Inconsistent(String),
    #[error("P-zero inside contour: d = {d} but zeros of P require d < {limit}")]
    ContourTooWide { d: f64, limit: f64 },
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("mixing error: acceptance rate {rate:.3} outside [0.05, 0.95]")]
    Mixing { rate: f64 },
    #[error("unsupported size: {0}")]
    Unsupported(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("matrix not invertible: {0}")]
    Singular(String),
    #[error("path error at t = {t}: {source}")]
    Path { t: f64, source: Box<Error> },
}

impl Error {
    /// Numerical budget problems (exit code 2) as opposed to bad input (exit code 1).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Accuracy(_) | Error::Precision(_) | Error::Mixing { .. } => true,
            Error::Path { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

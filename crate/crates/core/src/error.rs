//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("chart mismatch: {0} vs {1}")]
    ChartMismatch(String, String),
    #[error("coordinate index {index} out of range for chart of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("expected degree {expected}, got {got}")]
    WrongDegree { expected: i64, got: i64 },
    #[error("form of degree {degree} applied to {args} vector fields")]
    ArityMismatch { degree: i64, args: usize },
    #[error("phi is not idempotent")]
    NotIdempotent,
    #[error("trace of phi is not a constant integer")]
    NonConstantTrace,
    #[error("rank {rank} out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },
    #[error("argument is not h-equivariant")]
    NotEquivariant,
    #[error("operator is not a derivation over h*: {0}")]
    DerivationCheckFailed(String),
    #[error("decomposition does not reproduce the operator: {0}")]
    ExtractionInconsistent(String),
    #[error("operator does not commute with h*: {0}")]
    NotInDerH(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("form uses fiber coordinate `{0}` where only base coordinates are allowed")]
    FiberCoordPresent(String),
    #[error("invalid chart: {0}")]
    BadChart(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-parsable tag, one per error kind.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::ChartMismatch(..) => "chart-mismatch",
            Error::IndexOutOfRange { .. } => "index-range",
            Error::WrongDegree { .. } => "degree",
            Error::ArityMismatch { .. } => "arity",
            Error::NotIdempotent => "not-idempotent",
            Error::NonConstantTrace => "non-constant-trace",
            Error::RankOutOfRange { .. } => "rank-range",
            Error::NotEquivariant => "not-equivariant",
            Error::DerivationCheckFailed(_) => "derivation-check",
            Error::ExtractionInconsistent(_) => "extraction",
            Error::NotInDerH(_) => "not-in-der-h",
            Error::UnknownSuite(_) => "unknown-suite",
            Error::Parse(_) => "parse",
            Error::FiberCoordPresent(_) => "fiber-coord",
            Error::BadChart(_) => "bad-chart",
            Error::Invalid(_) => "invalid",
        }
    }
}

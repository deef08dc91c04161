//! Error type shared by every module.

use thiserror::Error;

/// Failures reported by the solvers and evaluators.
#[derive(Debug, Error)]
pub enum Error {
    /// A point lies outside the region where a model is valid.
    #[error("domain error: {0}")]
    Domain(String),
    /// A well (or an interior sample) has a degenerate Hessian or a zero of W.
    #[error("degeneracy error: {0}")]
    Degenerate(String),
    /// A curve with no extent was supplied or would be produced.
    #[error("empty curve: {0}")]
    EmptyCurve(String),
    /// An operation's precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A linear system is numerically singular.
    #[error("numerical singularity: {0}")]
    Singular(String),
    /// A calibration built from a truncated series does not certify the curve.
    #[error("certificate invalid: {0}")]
    CertificateInvalid(String),
    /// The sampling grid cannot support the requested discretization.
    #[error("grid error: {0}")]
    Grid(String),
    /// A configuration document is malformed.
    #[error("config error: {0}")]
    Config(String),
    /// An iterative method failed to meet its tolerance.
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag used in diagnostic reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Degenerate(_) => "degenerate",
            Error::EmptyCurve(_) => "empty-curve",
            Error::Precondition(_) => "precondition",
            Error::Singular(_) => "singular",
            Error::CertificateInvalid(_) => "certificate-invalid",
            Error::Grid(_) => "grid",
            Error::Config(_) => "config",
            Error::NotConverged(_) => "not-converged",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

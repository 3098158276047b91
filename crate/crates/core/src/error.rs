use thiserror::Error;

/// Every failure the library can report. Each variant carries a stable
/// machine-readable name (see [`Error::name`]) used by the CLI manifest and
/// the C interface.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("adiabatic exponent {gamma} is not admissible: need 1 < gamma < 2 with 1/(gamma-1) an integer")]
    GammaNotAdmissible { gamma: f64 },

    #[error("causality violated: dP/drho = {ratio} c^2 at rho = {rho}")]
    CausalityViolated { rho: f64, ratio: f64 },

    #[error("correction series evaluated at s = {s} outside its declared validity radius {radius}")]
    DomainExceeded { s: f64, radius: f64 },

    #[error("root finder did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pressure stops decreasing at r = {r} (Q <= 0): no monotone-short solution")]
    NotMonotoneShort { r: f64 },

    #[error("metric factor kappa <= 0 at r = {r}: no static star")]
    HorizonApproached { r: f64 },

    #[error("no vacuum boundary reached before radius cap {r_cap}")]
    NoBoundary { r_cap: f64 },

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailed(String),

    #[error("grid mismatch: expected {expected} values, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("eigen-solve did not converge for mode {mode}: residual {residual:e}")]
    NotConverged { mode: usize, residual: f64 },

    #[error("mode {mode} looks spurious: {fraction:.3} of its norm sits in the endpoint cells")]
    SpuriousMode { mode: usize, fraction: f64 },

    #[error("eigenvalue {lambda} of mode {mode} is not positive")]
    NonpositiveEigenvalue { mode: usize, lambda: f64 },

    #[error("unstable time step: {0}")]
    UnstableStep(String),

    #[error("initial data not small: {0}")]
    DataNotSmall(String),

    #[error("degenerate factor {factor} <= 0 in boundary matching")]
    DegenerateFactor { factor: f64 },

    #[error("continuity system is singular (determinant {det:e})")]
    SingularMatching { det: f64 },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::GammaNotAdmissible { .. } => "GammaNotAdmissible",
            Error::CausalityViolated { .. } => "CausalityViolated",
            Error::DomainExceeded { .. } => "DomainExceeded",
            Error::NoConvergence(_) => "NoConvergence",
            Error::InvalidInput(_) => "InvalidInput",
            Error::NotMonotoneShort { .. } => "NotMonotoneShort",
            Error::HorizonApproached { .. } => "HorizonApproached",
            Error::NoBoundary { .. } => "NoBoundary",
            Error::InsufficientResolution(_) => "InsufficientResolution",
            Error::QuadratureFailed(_) => "QuadratureFailed",
            Error::GridMismatch { .. } => "GridMismatch",
            Error::NotConverged { .. } => "NotConverged",
            Error::SpuriousMode { .. } => "SpuriousMode",
            Error::NonpositiveEigenvalue { .. } => "NonpositiveEigenvalue",
            Error::UnstableStep(_) => "UnstableStep",
            Error::DataNotSmall(_) => "DataNotSmall",
            Error::DegenerateFactor { .. } => "DegenerateFactor",
            Error::SingularMatching { .. } => "SingularMatching",
            Error::ConfigInvalid(_) => "ConfigInvalid",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

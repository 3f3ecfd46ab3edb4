use thiserror::Error;

/// Errors raised anywhere in the homogenization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("mesh too coarse: n = {n}, need at least {min}")]
    MeshTooCoarse { n: usize, min: usize },
    #[error("mesh does not cover the unit cell [0,1]^2")]
    NonUnitCell,
    #[error("coefficient is not symmetric positive definite: {0}")]
    NonSpdCoefficient(String),
    #[error("elastic tensor is not elliptic: {0}")]
    NonEllipticTensor(String),
    #[error("inconsistent constraints: {0}")]
    InconsistentConstraints(String),
    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("factorization broke down at pivot {pivot} (value {value:e})")]
    SingularSystem { pivot: usize, value: f64 },
    #[error("ill-conditioned fine-scale system (inclusion contrast {contrast:e}): factorization broke down at pivot {pivot}")]
    IllConditioned { contrast: f64, pivot: usize },
    #[error("scalar correctors chi are required but missing")]
    MissingChi,
    #[error("missing correctors: {0}")]
    MissingCorrectors(&'static str),
    #[error("inclusion phase is empty")]
    EmptyInclusion,
    #[error("bound check failed: {0}")]
    BoundsViolation(String),
    #[error("R^hom is not positive definite on symmetric matrices (smallest Voigt eigenvalue {min_eigenvalue:e})")]
    DegenerateRHom { min_eigenvalue: f64 },
    #[error("fields live on incompatible meshes")]
    MeshMismatch,
    #[error("cell resolution too coarse: m = {m}, need at least 4")]
    ResolutionTooCoarse { m: usize },
    #[error("epsilon ladder does not tile the domain: {0}")]
    LadderMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration key `{key}`: {message}")]
    Validation { key: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { key: key.into(), message: message.into() }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_) => "InvalidGeometry",
            Error::MeshTooCoarse { .. } => "MeshTooCoarse",
            Error::NonUnitCell => "NonUnitCell",
            Error::NonSpdCoefficient(_) => "NonSpdCoefficient",
            Error::NonEllipticTensor(_) => "NonEllipticTensor",
            Error::InconsistentConstraints(_) => "InconsistentConstraints",
            Error::SolverDiverged { .. } => "SolverDiverged",
            Error::SingularSystem { .. } => "SingularSystem",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::MissingChi => "MissingChi",
            Error::MissingCorrectors(_) => "MissingCorrectors",
            Error::EmptyInclusion => "EmptyInclusion",
            Error::BoundsViolation(_) => "BoundsViolation",
            Error::DegenerateRHom { .. } => "DegenerateRHom",
            Error::MeshMismatch => "MeshMismatch",
            Error::ResolutionTooCoarse { .. } => "ResolutionTooCoarse",
            Error::LadderMismatch(_) => "LadderMismatch",
            Error::Parse(_) => "ParseError",
            Error::Validation { .. } => "ValidationError",
            Error::Io(_) => "IoError",
        }
    }

    /// Process exit code: 1 for invalid input, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SolverDiverged { .. }
            | Error::SingularSystem { .. }
            | Error::IllConditioned { .. }
            | Error::DegenerateRHom { .. }
            | Error::BoundsViolation(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

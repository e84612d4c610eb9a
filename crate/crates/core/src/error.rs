use thiserror::Error;

/// Failures of the dense linear-algebra layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has zero dimension")]
    Empty,
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("Schur iteration did not converge (ill-conditioned input)")]
    NoConvergence,
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("leading cubic coefficient is zero")]
    ZeroLeadingCoefficient,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("{0} is not an eigenvalue within tolerance")]
    NotAnEigenvalue(num_complex::Complex64),
}

/// Failures of model construction and the nonlinear eigenvalue solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("block-stack shifts must be nonempty and strictly increasing")]
    InvalidShifts,
    #[error("fixed-point iteration left the basin (|omega| = {0:.3e})")]
    LeftBasin(f64),
    #[error("fixed-point iteration did not converge in {0} iterations")]
    NotConverged(usize),
    #[error("converged value {0} is not a root of the characteristic cubic")]
    NotACubicRoot(num_complex::Complex64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Failures of degeneracy analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("no degeneracy at the requested point (smallest gap {gap:.3e} > tolerance {tol:.3e})")]
    NotDegenerate { gap: f64, tol: f64 },
    #[error("degeneracy has multiplicity {0}, expected 2")]
    WrongMultiplicity(usize),
    #[error("need at least {needed} radii, got {got}")]
    TooFewRadii { needed: usize, got: usize },
    #[error("invalid analysis input: {0}")]
    InvalidInput(String),
    #[error("families have different dimensions: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("free-space comparison requires tau = 1, got {0}")]
    TauNotOne(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

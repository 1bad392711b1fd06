//! Error types shared across the toolkit.

use thiserror::Error;

/// Errors produced by operator construction, spectral calculus, ensemble
/// computations, and the stochastic estimators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("matrix is not Hermitian: max |A[i][j] - conj(A[j][i])| = {deviation:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("eigensolver did not converge for dim {dim} within {iterations} iterations")]
    EigenFailure { dim: usize, iterations: usize },

    #[error("function value is not finite at eigenvalue {eigenvalue}")]
    NonFiniteFunctionValue { eigenvalue: f64 },

    #[error("imaginary residue {residue:.3e} exceeds 1e-10 in trace of a Hermitian product")]
    ImaginaryResidue { residue: f64 },

    #[error("inverse temperature must be positive and finite, got {beta}")]
    InvalidBeta { beta: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("trace must equal 1 within {tolerance:.1e}, got {trace}")]
    NotUnitTrace { trace: f64, tolerance: f64 },

    #[error("state is rank deficient: min weight {min_weight:.3e} below support tolerance {support_tol:.1e}")]
    RankDeficient { min_weight: f64, support_tol: f64 },

    #[error("relative entropy diverges: {context}")]
    InfiniteRelativeEntropy { context: String },

    #[error("invalid site layout: {reason}")]
    InvalidLayout { reason: String },

    #[error("site index {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("sites must be distinct, site {site} repeated")]
    RepeatedSite { site: usize },

    #[error("H0 term on sites {sites:?} crosses block boundaries")]
    BlockCrossingTerm { sites: Vec<usize> },

    #[error("invalid model spec: {reason}")]
    InvalidModelSpec { reason: String },

    #[error("dense dimension {dim} exceeds the limit {max}; use the matrix-free stochastic estimators instead")]
    DimensionOverflow { dim: usize, max: usize },

    #[error("observable family must not be empty")]
    EmptyFamily,

    #[error("optimization budget must be at least 1")]
    ZeroBudget,

    #[error("no terms available to assemble a matrix-free oracle")]
    NoTerms,

    #[error("matrix-vector oracle failed its Hermiticity check: deviation {deviation:.3e}")]
    OracleNotHermitian { deviation: f64 },

    #[error("need at least 2 probes, got {probes}")]
    TooFewProbes { probes: usize },

    #[error("Chebyshev degree cap {cap} insufficient: remainder bound {remainder:.3e} exceeds {target:.1e}")]
    DegreeInsufficient { cap: usize, remainder: f64, target: f64 },

    #[error("denominator estimate {value:.3e} lies within 3 standard errors ({stderr:.3e}) of zero")]
    IllConditionedRatio { value: f64, stderr: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

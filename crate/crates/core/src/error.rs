use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("trade-off parameter must lie in [0, 1], got {0}")]
    LambdaOutOfRange(f64),

    #[error("{name} is not symmetric (max |a_ij - a_ji| = {asymmetry:e})")]
    NotSymmetric { name: &'static str, asymmetry: f64 },

    #[error("{name} is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite {
        name: &'static str,
        min_eigenvalue: f64,
    },

    #[error("{name} is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite {
        name: &'static str,
        min_eigenvalue: f64,
    },

    #[error("invalid portfolio: {0}")]
    InvalidPortfolio(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient observations: need at least {required}, got {actual}")]
    InsufficientObservations { required: usize, actual: usize },

    #[error("asset `{label}` has zero variance over the window")]
    ZeroVariance { label: String },

    #[error("singular regressor cross-product (collinear assets?)")]
    SingularRegressors,

    #[error("VAR coefficient matrix is not stationary (spectral radius {spectral_radius:.6})")]
    NonStationary { spectral_radius: f64 },

    #[error("shock covariance has a non-positive diagonal entry at index {index}")]
    ZeroShockVariance { index: usize },

    #[error("active-set iteration cap of {limit} exceeded")]
    IterationLimit { limit: usize },

    #[error("equality-constrained subproblem is not positive definite on the free set")]
    IndefiniteSubproblem,

    #[error("return target {target} is infeasible (max attainable return {max_return})")]
    InfeasibleTarget { target: f64, max_return: f64 },

    #[error("risk matrices do not commute (relative residual {residual:e})")]
    NotCommuting { residual: f64 },

    #[error("non-positive eigenvalue {0:e} in the common eigenbasis")]
    NonPositiveEigenvalue(f64),

    #[error("corner funds are affinely dependent")]
    AffinelyDependentFunds,

    #[error("finite-difference stencil lambda={lambda} +/- h={h} leaves (0, 1)")]
    StencilOutOfRange { lambda: f64, h: f64 },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("at lambda={lambda}: {source}")]
    AtLambda {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("at cell mu0={mu0}, lambda={lambda}: {source}")]
    AtCell {
        mu0: f64,
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("window ending {window_end}: {source}")]
    InWindow {
        window_end: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at_lambda(self, lambda: f64) -> Self {
        Error::AtLambda {
            lambda,
            source: Box::new(self),
        }
    }

    /// Strips the context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLambda { source, .. } | Error::AtCell { source, .. } | Error::InWindow { source, .. } => {
                source.root()
            }
            other => other,
        }
    }
}

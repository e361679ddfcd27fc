use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid correlation matrix: {0}")]
    InvalidMatrix(String),

    #[error("local transform is not symplectic (det s_a = {det_a}, det s_b = {det_b})")]
    NotSymplectic { det_a: f64, det_b: f64 },

    #[error("standard-form equations admit no real (k_x, k_p) pair (discriminant {discriminant:e})")]
    NoRealSolution { discriminant: f64 },

    #[error("correlation matrix is not physical (margin {margin:e}): {violated}")]
    NotPhysical { margin: f64, violated: String },

    #[error("matrix is singular within tolerance")]
    Singular,

    #[error("parameters are not symmetric: n_a = {n_a}, n_b = {n_b}")]
    NotSymmetric { n_a: f64, n_b: f64 },

    #[error("degenerate determinant {det:e} in reduction functional")]
    Degenerate { det: f64 },

    #[error("rejection sampling exhausted after {attempts} attempts; parameter box is infeasible")]
    ExhaustedRetries { attempts: usize },

    #[error("symmetrization angle argument is negative ({value:e})")]
    NegativeAngleArgument { value: f64 },

    #[error("quadrature did not converge (successive orders differ by {difference:e})")]
    QuadratureNotConverged { difference: f64 },

    #[error("outcome has zero probability ({probability:e})")]
    ZeroProbability { probability: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("two-pair dimension {dimension} exceeds memory guard {cap}")]
    MemoryGuard { dimension: usize, cap: usize },

    #[error("Fock cutoff too small: truncated trace {trace:.6} < 0.5")]
    CutoffTooSmall { trace: f64 },

    #[error("displacement must be removed before Fock conversion")]
    NonZeroDisplacement,

    #[error("not distillable: inseparability margin = {margin}")]
    NotDistillableInput { margin: f64 },

    #[error("fidelity decreased in round {round}: {before} -> {after}")]
    StalledFidelity { round: usize, before: f64, after: f64 },

    #[error("projected fidelity {fidelity} does not exceed 1/{dim}; use a larger dimension (smallest working: {suggestion:?})")]
    BelowThreshold { dim: usize, fidelity: f64, suggestion: Option<usize> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Format(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

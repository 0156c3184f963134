use thiserror::Error;

/// Errors shared by all numerical modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("grid axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("operation requires dimension {expected}, field has dimension {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("field contains a non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("map alpha -> alpha + u(alpha) is not strictly increasing (min slope {min_slope:.3e})")]
    NonMonotone { min_slope: f64 },

    #[error("field has non-zero mean {mean:.3e} (limit {limit:.3e}); not in the operator range")]
    NonZeroMean { mean: f64, limit: f64 },

    #[error("fixed-point iteration did not converge: residual {residual:.3e} after {iterations} iterations (try smaller relax)")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("linear solver stalled: relative residual {residual:.3e} after {iterations} iterations")]
    SolverStalled { residual: f64, iterations: usize },

    #[error("unknown inequality name `{0}`")]
    UnknownInequality(String),

    #[error("search returned ratio {ratio} > {limit} for `{name}`; this exceeds a proven bound and indicates a solver defect")]
    AnomalousRatio { name: String, ratio: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, CoreError>;

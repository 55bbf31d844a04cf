use thiserror::Error;

/// Errors raised by the pencil library.
///
/// Every variant has a stable machine-readable code (see [`PencilError::code`])
/// which the command-line front end forwards in its error JSON.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PencilError {
    #[error("requested degree {requested} exceeds the degree budget {budget}")]
    DegreeBudgetExceeded { requested: usize, budget: usize },

    #[error("measure is degenerate: {0}")]
    MeasureDegenerate(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("gamma_{index} = {value} is not positive")]
    GammaNotPositive { index: usize, value: f64 },

    #[error("band data exhausted: index {index} requested from `{band}` with {available} stored entries and no tail rule")]
    TruncationExceeded {
        band: &'static str,
        index: usize,
        available: usize,
    },

    #[error("invalid pencil: {0}")]
    InvalidPencil(String),

    #[error("measure does not match the Jacobi matrix: {0}")]
    MeasureMismatch(String),

    #[error("reconstructed matrix is not five-diagonal: g[{row}][{col}] = {value}")]
    NotFiveDiagonal { row: usize, col: usize, value: f64 },

    #[error("operator is not admissible: {0}")]
    NotAdmissible(String),

    #[error("moment bound |s_k| <= c^k violated at k = {k}: |s_k| = {moment}, c = {c}")]
    SupportBoundViolated { k: usize, moment: f64, c: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series diverges: |z - b| = {distance} <= a = {a}")]
    SeriesDivergent { distance: f64, a: f64 },

    #[error("resolvent pole: |a + d s(z)| = {0} is too small")]
    ResolventPole(f64),

    #[error("contour integral did not converge after {nodes} nodes (last delta {delta})")]
    ContourNotConverged { nodes: usize, delta: f64 },

    #[error("invalid input at {pointer}: {message}")]
    InvalidInput { pointer: String, message: String },
}

impl PencilError {
    /// Stable error code used in machine-readable output.
    pub fn code(&self) -> &'static str {
        match self {
            PencilError::DegreeBudgetExceeded { .. } => "DEGREE_BUDGET_EXCEEDED",
            PencilError::MeasureDegenerate(_) => "MEASURE_DEGENERATE",
            PencilError::NumericalFailure(_) => "NUMERICAL_FAILURE",
            PencilError::GammaNotPositive { .. } => "GAMMA_NOT_POSITIVE",
            PencilError::TruncationExceeded { .. } => "TRUNCATION_EXCEEDED",
            PencilError::InvalidPencil(_) => "INVALID_PENCIL",
            PencilError::MeasureMismatch(_) => "MEASURE_MISMATCH",
            PencilError::NotFiveDiagonal { .. } => "NOT_FIVE_DIAGONAL",
            PencilError::NotAdmissible(_) => "NOT_ADMISSIBLE",
            PencilError::SupportBoundViolated { .. } => "SUPPORT_BOUND_VIOLATED",
            PencilError::InvalidParameter(_) => "INVALID_PARAMETER",
            PencilError::SeriesDivergent { .. } => "SERIES_DIVERGENT",
            PencilError::ResolventPole(_) => "RESOLVENT_POLE",
            PencilError::ContourNotConverged { .. } => "CONTOUR_NOT_CONVERGED",
            PencilError::InvalidInput { .. } => "INVALID_INPUT",
        }
    }

    /// True for errors caused by numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            PencilError::NumericalFailure(_)
                | PencilError::MeasureDegenerate(_)
                | PencilError::NotFiveDiagonal { .. }
                | PencilError::SeriesDivergent { .. }
                | PencilError::ResolventPole(_)
                | PencilError::ContourNotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, PencilError>;

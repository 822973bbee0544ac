use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A pivot collapsed below `eps * max|A|`; the iterate sits on (or very
    /// near) the set where the Jacobian is not invertible.
    #[error("singular matrix: pivot {pivot:e} in column {column} below threshold {threshold:e}")]
    SingularMatrix { column: usize, pivot: f64, threshold: f64 },

    /// Two consecutive Newton steps coincide, so the mixing coefficient is
    /// undefined.
    #[error("degenerate steps: |w_next - w_prev| = {diff_norm:e}")]
    DegenerateSteps { diff_norm: f64 },

    #[error("residual became non-finite at iterate {k}")]
    NonFiniteResidual { k: usize },

    #[error("zero Newton step: optimization gain is undefined")]
    ZeroStep,

    #[error("problem `{problem}` has no known root and null-space basis")]
    MissingGroundTruth { problem: String },

    #[error("need at least {needed} positive finite entries for a rate estimate, got {got}")]
    InsufficientTail { needed: usize, got: usize },

    #[error("value {value} outside admissible range {range}")]
    OutOfRange { value: f64, range: &'static str },

    #[error("problem `{name}` is unavailable: {reason}")]
    ProblemUnavailable { name: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

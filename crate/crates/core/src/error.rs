use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KnError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("invalid surface configuration: {0}")]
    Config(String),
    #[error("degree {degree} is not admissible for weight {weight}")]
    DegreeMismatch { weight: String, degree: String },
    #[error("weight mismatch: expected {expected}, found {found}")]
    WeightMismatch { expected: String, found: String },
    #[error("point index {0} is out of range")]
    PointIndex(usize),
    #[error("form has poles outside the marked points")]
    NotAHolomorphic,
    #[error("the zero form has no filtration degree")]
    ZeroForm,
    #[error("structure table is empty")]
    EmptyTable,
    #[error("the Schwarzian derivative of a constant is undefined")]
    ConstantFunction,
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("operation {op} does not accept weights ({lambda}, {nu})")]
    InvalidOp { op: String, lambda: String, nu: String },
    #[error("cycle has {found} coefficients but the configuration has {expected} in-points")]
    CycleLength { expected: usize, found: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, KnError>;

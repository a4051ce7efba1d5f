//! Error type shared by every module in the crate.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library surface.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A row that must be normalizable has norm at or below 1e-12.
    ZeroRow { row: usize, norm: f64 },
    /// A softmax temperature (or derived temperature) is not strictly positive.
    InvalidTemperature { tau: f64 },
    /// Matrix or vector shapes do not line up for the requested operation.
    DimensionMismatch { context: String },
    /// A function handed to a numerical routine returned NaN or infinity.
    NonFiniteEvaluation { context: String },
    /// A generation or learning config violates its invariants.
    ConfigInvalid { field: String, message: String },
    /// A vector that must be unit-norm deviates from norm 1 by more than 1e-6.
    NotUnit { norm: f64 },
    /// A prototype that must lie inside the vision span has a residual
    /// orthogonal component above tolerance.
    SpanViolation { residual: f64 },
    /// A prototype column exceeds the declared norm bound.
    NormBoundViolated { norm: f64, eta: f64 },
    /// A mask entry indexes past the number of classes in play.
    LabelOutOfRange { label: usize, limit: usize },
    /// A pseudo-mask threshold outside (0, 1).
    InvalidThreshold { phi: f64 },
    /// Masked pooling received weights summing to (numerically) zero.
    EmptyMask,
    /// An activation-map request named a class id with no prototype.
    UnknownClass { class_id: usize },
    /// The optimizer loss exceeded 10x its initial value for 10 consecutive
    /// iterations; the step size is too large for the objective.
    DivergenceDetected { iteration: usize, loss: f64, initial: f64 },
    /// Backtracking exhausted its halvings without an Armijo decrease.
    NoDescentDirection,
    /// A statistic was requested from too few samples or classes.
    InsufficientData { message: String },
    /// A serialized matrix file is malformed; `offset` is the byte position
    /// where decoding failed.
    Format { offset: u64, message: String },
    /// A JSON config failed to parse or validate.
    ConfigParse { message: String },
    /// Filesystem failure; the path is embedded in the message.
    Io { path: String, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroRow { row, norm } => {
                write!(f, "row {row} has norm {norm:e}, below the 1e-12 floor")
            }
            Error::InvalidTemperature { tau } => {
                write!(f, "temperature must be > 0, got {tau}")
            }
            Error::DimensionMismatch { context } => write!(f, "dimension mismatch: {context}"),
            Error::NonFiniteEvaluation { context } => {
                write!(f, "non-finite evaluation: {context}")
            }
            Error::ConfigInvalid { field, message } => {
                write!(f, "invalid config field `{field}`: {message}")
            }
            Error::NotUnit { norm } => {
                write!(f, "vector must be unit norm, got {norm}")
            }
            Error::SpanViolation { residual } => {
                write!(f, "prototype leaves the vision span (orthogonal residual {residual:e})")
            }
            Error::NormBoundViolated { norm, eta } => {
                write!(f, "prototype norm {norm} exceeds bound {eta}")
            }
            Error::LabelOutOfRange { label, limit } => {
                write!(f, "label {label} out of range (limit {limit})")
            }
            Error::InvalidThreshold { phi } => {
                write!(f, "threshold must be in (0, 1), got {phi}")
            }
            Error::EmptyMask => write!(f, "mask weights sum to zero"),
            Error::UnknownClass { class_id } => {
                write!(f, "class id {class_id} has no prototype")
            }
            Error::DivergenceDetected { iteration, loss, initial } => write!(
                f,
                "divergence detected at iteration {iteration}: loss {loss:e} vs initial {initial:e} (step size too large)"
            ),
            Error::NoDescentDirection => {
                write!(f, "backtracking found no Armijo decrease after 40 halvings")
            }
            Error::InsufficientData { message } => write!(f, "insufficient data: {message}"),
            Error::Format { offset, message } => {
                write!(f, "format error at byte {offset}: {message}")
            }
            Error::ConfigParse { message } => write!(f, "config parse error: {message}"),
            Error::Io { path, message } => write!(f, "io error on {path}: {message}"),
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}

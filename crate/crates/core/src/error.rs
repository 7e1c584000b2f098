//! Error types for the series kernel and the jet pipeline.

use thiserror::Error;

/// Errors raised by series construction and arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("exponent vector has length {got}, space has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operands live in different variable spaces")]
    SpaceMismatch,
    #[error("operands have different truncation orders ({left} vs {right})")]
    OrderMismatch { left: u32, right: u32 },
    #[error("operands mix exact and float coefficient modes")]
    ModeMismatch,
    #[error("truncation order {order} exceeds the supported maximum of 255")]
    OrderTooLarge { order: u32 },
    #[error("multi-index degree {degree} exceeds the supported maximum of 255")]
    DegreeTooLarge { degree: u32 },
    #[error("binding for `{var}` has a nonzero constant term")]
    NonzeroConstantInBinding { var: String },
    #[error("bindings disagree on output space, order, or mode")]
    InconsistentBindingTarget,
    #[error("variable `{name}` is unbound and absent from the output space")]
    UnboundVariable { name: String },
    #[error("variable `{name}` has no conjugation partner")]
    UnpairedVariable { name: String },
    #[error("variable `{name}` does not follow the z/w naming convention")]
    UnsupportedVariableName { name: String },
    #[error("output space is missing variable `{name}`")]
    MissingVariable { name: String },
    #[error("weight must be positive")]
    NonPositiveWeight,
    #[error("series has a coefficient with nonzero imaginary part")]
    NonRealCoefficient,
    #[error("invalid variable space: {0}")]
    InvalidSpace(String),
}

/// Errors raised by model validation, normalization, pullback, and iteration.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("model is not conjugation-symmetric (not real-valued)")]
    NonRealModel,
    #[error("model has constant or linear terms")]
    HasLowOrderTerms,
    #[error("model degree {found} exceeds the declared maximum {max}")]
    DegreeExceeded { found: u32, max: u32 },
    #[error("model series order {order} is below the declared degree bound {nu}")]
    ModelOrderBelowDegreeBound { order: u32, nu: u32 },
    #[error("map components must vanish at the origin")]
    NonzeroConstantTerm,
    #[error("linear-in-w part of g is singular")]
    SingularLinearPart,
    #[error("linear-in-w part of g has entries with nonzero imaginary part")]
    ComplexLinearPart,
    #[error("g has a nonzero linear part in z")]
    NonzeroZLinearPart,
    #[error("map is not in normalized form (g = w + O(2))")]
    NotNormalized,
    #[error("defining series lacks the unit v-term of graph shape")]
    NotInGraphShape,
    #[error("iteration did not stabilize after {iterations} steps")]
    NoStabilization { iterations: u32 },
    #[error("operands have mismatched signatures")]
    SignatureMismatch,
    #[error("operation requires exact coefficient mode")]
    ExactModeRequired,
    #[error("result that must be real has a nonzero imaginary part")]
    InternalRealityFailure,
    #[error("germ has terms outside degrees 2..=k")]
    GermOutOfRange,
}

/// Errors raised by the randomized experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("truncation stability violated at seed {seed}, trial {trial} ({failures} failing trials)")]
    StabilityViolation { seed: u64, trial: u32, failures: u32 },
    #[error("pullback failed at a probe point (column {column}): {source}")]
    DegenerateEvaluation { column: usize, source: JetError },
}

impl From<SeriesError> for ExperimentError {
    fn from(e: SeriesError) -> Self {
        ExperimentError::Jet(JetError::Series(e))
    }
}

/// Errors raised while reading or validating jet documents.
#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version `{found}` (expected \"1\")")]
    SchemaVersion { found: String },
    #[error("invalid document: {0}")]
    Validation(String),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Errors raised by the polynomial expression parser.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at byte {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("exponent at byte {pos} must be a non-negative integer literal")]
    BadExponent { pos: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

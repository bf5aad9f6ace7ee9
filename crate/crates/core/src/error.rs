use thiserror::Error;

/// Everything that can go wrong while building or solving a decision problem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability masses sum to {total}, expected 1 (context: {context})")]
    MassSum { context: String, total: f64 },

    #[error("negative probability {value} for `{label}`")]
    NegativeProbability { label: String, value: f64 },

    #[error("duplicate identifier `{0}`")]
    DuplicateLabel(String),

    #[error("empty outcome set ({0})")]
    Empty(String),

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value for {0}")]
    NonFinite(String),

    #[error("zero inverse temperature ({0}); use the limit query instead")]
    ZeroTemperature(String),

    #[error("policy puts mass on `{label}` which has zero prior probability")]
    SupportViolation { label: String },

    #[error("policy labels do not match the prior's outcome labels")]
    LabelMismatch,

    #[error("target {target} violates the bound: {detail}")]
    TargetBound { target: f64, detail: String },

    #[error("coarse utility of `{label}` is {declared}, but its refinement implies {implied}")]
    CoarseUtility {
        label: String,
        declared: f64,
        implied: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid tree at node {path}: {reason}")]
    Tree { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

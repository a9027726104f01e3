use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point has non-positive depth z = {0}")]
    NonPositiveDepth(f64),

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("degenerate box: {0}")]
    DegenerateBox(String),

    #[error("invalid value for {field}: {reason}")]
    InvalidValue { field: &'static str, reason: String },

    #[error("decoded value overflowed ({0})")]
    Overflow(&'static str),

    #[error("{0} out of range [0, 1]: {1}")]
    OutOfRange(&'static str, f64),

    #[error("matching inputs span more than one frame or class")]
    MixedFrames,

    #[error("class `{0}` has no ground truth")]
    NoGroundTruth(String),

    #[error("ground truth set is empty")]
    EmptyGroundTruth,

    #[error("valid-pixel mask is empty")]
    EmptyMask,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),

    #[error("line {line}: parse error: {reason}")]
    Parse { line: usize, reason: String },

    #[error("line {line}: unsupported schema version `{version}`")]
    SchemaVersion { line: usize, version: String },

    #[error("line {line}: invariant violated for `{field}`: {reason}")]
    InvariantViolation { line: usize, field: String, reason: String },

    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidValue {
            field,
            reason: reason.into(),
        }
    }
}

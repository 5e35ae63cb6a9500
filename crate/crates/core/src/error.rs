use thiserror::Error;

/// Crate-wide error type. Variants correspond to the distinct failure
/// classes surfaced by the CLI as separate exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A file or string could not be parsed or resolved against the model.
    #[error("parse error: {0}")]
    Parse(String),

    /// The model (or a universe inside it) is structurally unusable.
    #[error("invalid model: {0}")]
    Invalid(String),

    /// A configuration ordinal or variable id fell outside the model's
    /// frames; signals a corrupted configuration.
    #[error("index error: {0}")]
    Index(String),

    /// Dempster combination is undefined: all focal intersections are empty.
    #[error("total conflict: the combined evidence is fully contradictory")]
    TotalConflict,

    /// An enumeration or materialization would exceed its capacity guard.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The search space holds no (further) configuration with positive score.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// Caller-supplied parameters are out of range.
    #[error("invalid parameters: {0}")]
    Params(String),
}

pub type Result<T> = std::result::Result<T, Error>;

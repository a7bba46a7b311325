use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SldgError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Nonpositive density or temperature at a spatial node.
    #[error("degenerate moments at cell {cell}, node {node}: rho = {rho}, T = {temperature}")]
    DegenerateMoments {
        cell: usize,
        node: usize,
        rho: f64,
        temperature: f64,
    },

    #[error("singular tableau: {0}")]
    SingularTableau(String),

    /// Stage indices are 1-based to match the usual tableau numbering.
    #[error("step failed at stage {stage}: {reason}")]
    StepFailure { stage: usize, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, SldgError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SldgError::InvalidArgument(msg.into()))
}

use sldg_core::SldgError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("config error at line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    #[error(transparent)]
    Core(#[from] SldgError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("step {step} (t = {t:.6e}) failed: {source}")]
    Step {
        step: usize,
        t: f64,
        #[source]
        source: SldgError,
    },

    #[error("{0}")]
    Incomplete(String),
}

impl HarnessError {
    /// 2 for a failed time step or an unfinished study, 3 for a bad configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Step { .. } | HarnessError::Incomplete(_) => 2,
            HarnessError::Config(_) | HarnessError::ConfigLine { .. } => 3,
            HarnessError::Core(SldgError::InvalidArgument(_) | SldgError::Parse { .. }) => 3,
            HarnessError::Core(_) | HarnessError::Io(_) => 1,
        }
    }
}

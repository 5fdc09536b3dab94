use thiserror::Error;

pub type Result<T> = std::result::Result<T, ArgiError>;

#[derive(Error, Debug)]
pub enum ArgiError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("simulation failed on day {day}, step {step}: {message}")]
    Simulation {
        day: usize,
        step: usize,
        message: String,
    },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ArgiError {
    /// CLI exit code: 1 for validation problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ArgiError::InvalidParameter(_)
            | ArgiError::Domain(_)
            | ArgiError::InsufficientData(_)
            | ArgiError::Parse { .. }
            | ArgiError::Config(_) => 1,
            _ => 2,
        }
    }
}

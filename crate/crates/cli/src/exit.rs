use memdecay_core::Error;

pub const VERIFICATION_FAILED: u8 = 1;
pub const USAGE: u8 = 2;
pub const IO: u8 = 10;
pub const PARSE: u8 = 11;
pub const SHAPE: u8 = 12;
pub const SINGULAR: u8 = 13;
pub const EMPTY_DOMAIN: u8 = 14;
pub const NO_CONVERGENT_SCALE: u8 = 15;
pub const NON_CONVERGENCE: u8 = 16;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Core(e) => core_code(e),
            CliError::Read { .. } => IO,
            CliError::Json { .. } => PARSE,
            CliError::Usage(_) => USAGE,
        }
    }
}

pub fn core_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => IO,
        Error::Parse { .. } => PARSE,
        Error::ShapeMismatch { .. } | Error::DimensionMismatch { .. } => SHAPE,
        Error::Singular { .. } => SINGULAR,
        Error::EmptyDomain { .. } => EMPTY_DOMAIN,
        Error::NoConvergentScale { .. } => NO_CONVERGENT_SCALE,
        Error::NonConvergence { .. } => NON_CONVERGENCE,
        _ => USAGE,
    }
}

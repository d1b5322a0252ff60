use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("not coercive: {0}")]
    NotCoercive(String),

    #[error("ill-posed configuration: {0}")]
    IllPosed(String),

    #[error("numeric blowup at step {step}")]
    Blowup { step: usize },

    #[error("unsupported scheme: {0}")]
    UnsupportedScheme(String),

    #[error("invalid probe: {0}")]
    InvalidProbe(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("config error at [{section}] {key} (line {line}): {message}")]
    Config {
        section: String,
        key: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(expected: usize, found: usize) -> Self {
        Error::Dimension { expected, found }
    }
}

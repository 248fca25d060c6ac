use thiserror::Error;

/// Error type shared by all phasekit operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Image or pyramid dimensions do not permit the requested operation.
    #[error("size error: {0}")]
    Size(String),

    /// Input samples are malformed (non-finite values and the like).
    #[error("data error: {0}")]
    Data(String),

    /// Two structures that must agree (specs, dimensions, band layout) do not.
    #[error("structure error: {0}")]
    Structure(String),

    /// A file or byte stream does not match the expected format.
    #[error("format error: {0}")]
    Format(String),

    /// The operation was invoked in a way that can never succeed.
    #[error("usage error: {0}")]
    Usage(String),

    /// A config file failed to parse or a field failed its range check.
    #[error("config error: {0}")]
    Config(String),

    /// The optimizer produced a non-finite loss.
    #[error("divergence at iteration {iteration}: loss became non-finite")]
    Divergence { iteration: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the supported range.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    /// The factorization could not find a usable pivot.
    #[error("singular system: no usable pivot at row {row}")]
    Singular { row: usize },
    #[error("solver error: {0}")]
    Solver(String),
    /// Configuration text was rejected; the message names the key.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

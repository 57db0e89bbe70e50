use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("payload of {got} bits is smaller than the {need} dominant-row bits")]
    PayloadTooSmall { got: usize, need: usize },
    #[error("demapping failed: {0}")]
    DemapFailure(String),
    #[error("solver failed: {0}")]
    SolverFailure(String),
    #[error("canonicalization failed: {0}")]
    CanonicalizationFailure(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

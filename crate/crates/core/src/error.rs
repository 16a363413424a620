use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tree with branching {branching} and depth {depth} exceeds the node cap of {cap}")]
    Resource {
        branching: usize,
        depth: usize,
        cap: usize,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid instance at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

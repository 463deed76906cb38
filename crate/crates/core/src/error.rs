use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point outside the unit disk: |z| = {0}")]
    OutsideDisk(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

pub type Result<T> = core::result::Result<T, Error>;

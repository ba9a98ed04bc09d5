use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole of order {order} at {at}")]
    Pole { order: u32, at: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("cancellation failure: {0}")]
    Cancellation(String),
    #[error("calibration error: non-rational residue {0}")]
    Calibration(String),
    #[error("interpolation degree insufficient: {0}")]
    Degree(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

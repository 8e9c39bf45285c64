use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index {index} out of range (valid 1..={len})")]
    IndexOutOfRange { index: u64, len: u64 },
    #[error("weight sum overflowed at n = {0}")]
    Overflow(u64),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("tail not certifiable: {0}")]
    TailNotCertified(String),
    #[error("derivative of order {order} unavailable for {what}")]
    DerivativeUnavailable { order: usize, what: String },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("{what} = {n} exceeds the limit {cap}")]
    TooLarge { what: &'static str, n: u64, cap: u64 },
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("calibration violated: {0}")]
    Calibration(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

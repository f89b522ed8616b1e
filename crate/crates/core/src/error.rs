use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the domain of the routine.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A construction whose internal consistency check failed.
    #[error("construction failed: {0}")]
    Construction(String),
    /// An integrator whose quality monitor tripped.
    #[error("integration quality lost: {0}")]
    Integration(String),
    /// Non-finite values appeared during time stepping.
    #[error("blow-up at step {step} (t = {t:e})")]
    BlowUp { step: u64, t: f64 },
    /// A post-processing step could not identify the expected structure.
    #[error("analysis failed: {0}")]
    Analysis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

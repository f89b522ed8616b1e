use filament_core::Error;
use serde_json::{json, Value};

/// Every way a run can end early, with its exit status.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{message}")]
    Numerical { message: String, diagnostic: Value },
    #[error("{0}")]
    Interrupted(String),
    #[error("{0}")]
    Checkpoint(String),
    #[error("{0}")]
    Runtime(String),
}

impl Failure {
    pub fn status(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical { .. } => 3,
            Failure::Interrupted(_) => 4,
            Failure::Checkpoint(_) => 5,
            Failure::Runtime(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match &e {
            Error::InvalidArgument(m) => Failure::Usage(m.clone()),
            Error::BlowUp { step, t } => Failure::Numerical {
                message: e.to_string(),
                diagnostic: json!({ "kind": "blow-up", "step": step, "t": t, "message": e.to_string() }),
            },
            Error::Integration(m) => Failure::Numerical {
                message: e.to_string(),
                diagnostic: json!({ "kind": "integration", "message": m }),
            },
            Error::Construction(_) | Error::Analysis(_) => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(format!("json error: {e}"))
    }
}

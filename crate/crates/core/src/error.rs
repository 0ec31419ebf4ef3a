use thiserror::Error;

/// Errors produced by the simulation, training and diagnostic pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("propagation failed at step {step}: {reason}")]
    Propagation { step: usize, reason: String },

    #[error("target Q-factor {target_db:.2} dB is unreachable (cap {cap_db:.2} dB)")]
    UnreachableTarget { target_db: f64, cap_db: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-primitive feedback polynomial for order {order}: cycle length {cycle} != {expected}")]
    NonPrimitive { order: u32, cycle: u64, expected: u64 },

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },

    #[error("singular covariance for constellation point {0}")]
    Singular(usize),

    #[error("constellation point {0} never transmitted")]
    MissingPoint(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

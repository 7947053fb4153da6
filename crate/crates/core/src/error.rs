use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum DickeError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("non-finite state encountered: {0}")]
    NonFinite(String),

    #[error("integration blew up after t = {last_valid_time} us")]
    BlowUp { last_valid_time: f64 },

    #[error("adaptive step size underflow at t = {time} us (h = {step:e})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("trajectory too short: {0}")]
    TrajectoryTooShort(String),

    #[error("not a fixed point: residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotFixedPoint { residual: f64, tolerance: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DickeError>;

//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by model evaluation, simulation, estimation, and fitting.
#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("pair creation probability is zero; cross-correlation undefined")]
    NoPairs,

    #[error("noise probability is zero; SNR is unbounded")]
    InfiniteSnr,

    #[error("filter chain is empty")]
    EmptyFilterChain,

    #[error(
        "near-band attenuation ({near} dB/km) does not exceed telecom attenuation \
         ({telecom} dB/km); no crossover distance exists"
    )]
    NoCrossover { near: f64, telecom: f64 },

    #[error("no counts in {0}; estimate undefined")]
    NoCounts(&'static str),

    #[error("sigma must be positive")]
    ZeroSigma,

    #[error("singular normal equations: {0}")]
    SingularFit(String),

    #[error("fit requires at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("simulation setup failed: {0}")]
    Setup(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ModelError::NonPositive { name, value })
    }
}

pub(crate) fn require_in_range(
    name: &'static str,
    value: f64,
    min: f64,
    max: f64,
) -> Result<f64> {
    if value.is_finite() && value >= min && value <= max {
        Ok(value)
    } else {
        Err(ModelError::OutOfRange {
            name,
            value,
            min,
            max,
        })
    }
}

//! Desk-scale model and analysis toolkit for a DLCZ-type atomic quantum
//! memory whose heralding photon is frequency-converted to the telecom
//! C band.
//!
//! The crate covers the full statistical chain of such an experiment:
//!
//! * [`params`] — calibrated efficiencies and probabilities of the combined
//!   memory-conversion setup;
//! * [`dlcz`] — pair statistics, motional spin-wave dephasing, detection
//!   probabilities versus storage time, and a Monte Carlo dephasing oracle;
//! * [`qfc`] — conversion-device efficiency and noise curves, the noise
//!   composition rule for cross-correlations, and fiber link budgets;
//! * [`sim`] — a reproducible trial-level click simulator;
//! * [`stats`] — correlation figures of merit with counting uncertainties,
//!   including the Cauchy-Schwarz nonclassicality parameter;
//! * [`fit`] — weighted least-squares fits for the decay, saturation, and
//!   SNR curves;
//! * [`config`] — TOML run configuration with calibrated defaults.

pub mod config;
pub mod constants;
pub mod dlcz;
pub mod error;
pub mod fit;
pub mod fixtures;
pub mod params;
pub mod qfc;
pub mod sim;
pub mod stats;

pub use config::{Config, Resolved};
pub use constants::PhysicalConstants;
pub use dlcz::{DephasingModel, DetectionProbabilities, McEstimate};
pub use error::{ModelError, Result};
pub use fit::{DataPoint, FitParameter, FitResult};
pub use fixtures::Measured;
pub use params::{reference_params, ExperimentParams, ValidationReport};
pub use qfc::{ChainSummary, ConversionDevice, FilterChain, FilterStage, NoiseProbability};
pub use sim::{
    CalibrationCounts, EmpiricalProbabilities, SimulationConfig, TrialCounts,
};
pub use stats::{CorrelationEstimate, EstimateLabel, MaxVisibility};

//! Calibrated parameters of the combined memory-conversion chain.
//!
//! `ExperimentParams` is the single source of truth every other module reads
//! from. All values are SI; probabilities are per trial or per gate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::fixtures;

/// Full solid angle (sr).
pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    /// Probability per trial to create a spin-wave together with a write
    /// photon in the coupled spatial mode.
    pub p: f64,
    /// Total write-arm detection efficiency, conversion chain included.
    pub eta_cw: f64,
    /// Total read-arm detection efficiency (filter cavity and detector).
    pub eta_r: f64,
    /// Intrinsic retrieval efficiency at zero storage time.
    pub eta_ret_intrinsic: f64,
    /// Branching ratio of the read transition into the relevant ground state.
    pub xi_g: f64,
    /// Write mode solid angle (sr).
    pub solid_angle_w: f64,
    /// Read mode solid angle (sr).
    pub solid_angle_r: f64,
    /// Write-arm noise detection probability per gate.
    pub p_noise_w: f64,
    /// Read-arm noise detection probability per gate.
    pub p_noise_r: f64,
    /// Linear map from write pulse power to `p` (1/W).
    pub p_per_write_watt: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        reference_params()
    }
}

/// Parameter set calibrated to the published experiment.
pub fn reference_params() -> ExperimentParams {
    let solid_angle = fixtures::MODE_SOLID_ANGLE_FRACTION * FOUR_PI;
    ExperimentParams {
        p: fixtures::PAIR_PROBABILITY_DEFAULT,
        eta_cw: fixtures::ETA_CW_DEFAULT,
        eta_r: fixtures::ETA_R_DEFAULT,
        eta_ret_intrinsic: fixtures::ETA_RET_INTRINSIC_DEFAULT,
        xi_g: fixtures::BRANCHING_RATIO,
        solid_angle_w: solid_angle,
        solid_angle_r: solid_angle,
        p_noise_w: fixtures::NOISE_PROB_WRITE,
        p_noise_r: fixtures::NOISE_PROB_READ,
        p_per_write_watt: fixtures::PAIR_PROBABILITY_DEFAULT
            / fixtures::PAIR_CAL_WRITE_POWER_W,
    }
}

/// One violated invariant found by [`ExperimentParams::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Report-style validation result: empty iff the parameters are valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn check_probability(&mut self, field: &'static str, value: f64) {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            self.violations.push(Violation {
                field,
                message: format!("{value} is not a probability in [0, 1]"),
            });
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", lines.join("; "))
    }
}

impl ExperimentParams {
    /// Lists every violated invariant; an empty report means the set is
    /// accepted by all downstream operations.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        report.check_probability("p", self.p);
        report.check_probability("eta_cw", self.eta_cw);
        report.check_probability("eta_r", self.eta_r);
        report.check_probability("eta_ret_intrinsic", self.eta_ret_intrinsic);
        report.check_probability("xi_g", self.xi_g);
        report.check_probability("p_noise_w", self.p_noise_w);
        report.check_probability("p_noise_r", self.p_noise_r);
        for (field, angle) in [
            ("solid_angle_w", self.solid_angle_w),
            ("solid_angle_r", self.solid_angle_r),
        ] {
            if !angle.is_finite() || angle <= 0.0 || angle > FOUR_PI {
                report.violations.push(Violation {
                    field,
                    message: format!(
                        "{angle} sr is outside (0, 4pi]; the stored population p*4pi/solid_angle_w \
                         would be undefined"
                    ),
                });
            }
        }
        if !self.p_per_write_watt.is_finite() || self.p_per_write_watt < 0.0 {
            report.violations.push(Violation {
                field: "p_per_write_watt",
                message: format!("{} must be finite and >= 0", self.p_per_write_watt),
            });
        }
        if report.is_valid() {
            // The derived random-emission branch N_s (dOmega_r/4pi) xi_g must
            // itself be a probability, or the linearized detection model
            // leaves its validity domain.
            let random_emission = self.p * self.xi_g * self.mode_ratio();
            if !random_emission.is_finite() || random_emission > 1.0 {
                report.violations.push(Violation {
                    field: "solid_angle_r",
                    message: format!(
                        "derived random-emission probability p*xi_g*(solid_angle_r/solid_angle_w) \
                         = {random_emission} exceeds 1"
                    ),
                });
            }
        }
        report
    }

    /// Returns `self` if valid, otherwise an `InvalidParams` error carrying
    /// the report.
    pub fn validated(&self) -> Result<&Self> {
        let report = self.validate();
        if report.is_valid() {
            Ok(self)
        } else {
            Err(ModelError::InvalidParams(report.to_string()))
        }
    }

    /// Mean number of atoms transferred to the storage state per trial,
    /// `p * 4pi / solid_angle_w`.
    pub fn stored_population(&self) -> f64 {
        self.p * FOUR_PI / self.solid_angle_w
    }

    /// Ratio of read to write mode solid angles (1 for the default geometry).
    pub fn mode_ratio(&self) -> f64 {
        self.solid_angle_r / self.solid_angle_w
    }

    /// Branching ratio weighted by the mode ratio. This is the coefficient
    /// that enters the closed-form decay expressions.
    pub fn xi_effective(&self) -> f64 {
        self.xi_g * self.mode_ratio()
    }

    /// Pair creation probability at a given write pulse power (W).
    pub fn p_from_write_power(&self, write_power_w: f64) -> f64 {
        self.p_per_write_watt * write_power_w
    }

    /// Copy with a different pair creation probability.
    pub fn with_p(&self, p: f64) -> Self {
        Self { p, ..*self }
    }

    /// Copy with `p` set from a write pulse power (W).
    pub fn with_write_power(&self, write_power_w: f64) -> Self {
        self.with_p(self.p_from_write_power(write_power_w))
    }

    /// Copy with `p` chosen so that the zero-storage-time cross-correlation
    /// of the closed-form model equals `target_g2`.
    pub fn tuned_for_g2_zero(&self, target_g2: f64) -> Result<Self> {
        if !target_g2.is_finite() || target_g2 <= 1.0 {
            return Err(ModelError::OutOfRange {
                name: "target_g2",
                value: target_g2,
                min: 1.0,
                max: f64::INFINITY,
            });
        }
        let eta0 = self.eta_ret_intrinsic;
        if eta0 <= 0.0 {
            return Err(ModelError::NonPositive {
                name: "eta_ret_intrinsic",
                value: eta0,
            });
        }
        let xi = self.xi_effective();
        let bracket = eta0 * (1.0 - xi) + xi;
        let p = eta0 / ((target_g2 - 1.0) * bracket + eta0);
        Ok(self.with_p(p))
    }
}

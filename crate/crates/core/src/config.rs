//! Structured-text run configuration.
//!
//! One TOML file with a flat key = value section per module. Every field is
//! optional and falls back to the calibrated defaults; unknown keys are hard
//! errors. Values are SI unless the key name carries an explicit unit suffix.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::constants::{PhysicalConstants, RB87_MASS};
use crate::dlcz::{delta_k_from_geometry, DephasingModel};
use crate::error::ModelError;
use crate::fixtures;
use crate::params::{reference_params, ExperimentParams};
use crate::qfc::{calibrate_noise_coeff, reference_device, ConversionDevice, FilterChain, FilterStage};
use crate::sim::SimulationConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config value error: {0}")]
    Value(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub params: ParamsSection,
    pub constants: ConstantsSection,
    pub device: DeviceSection,
    pub filter_chain: Vec<FilterStageSection>,
    pub dephasing: DephasingSection,
    pub sim: SimSection,
    pub sweeps: SweepsSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub p: Option<f64>,
    pub eta_cw: Option<f64>,
    pub eta_r: Option<f64>,
    pub eta_ret_intrinsic: Option<f64>,
    pub xi_g: Option<f64>,
    pub solid_angle_w: Option<f64>,
    pub solid_angle_r: Option<f64>,
    pub p_noise_w: Option<f64>,
    pub p_noise_r: Option<f64>,
    pub p_per_write_watt: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSection {
    pub boltzmann_k: Option<f64>,
    pub rb87_mass: Option<f64>,
    pub speed_of_light: Option<f64>,
    pub fiber_group_velocity: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSection {
    pub eta_n: Option<f64>,
    pub length_cm: Option<f64>,
    pub eta_int_max: Option<f64>,
    pub eta_loss: Option<f64>,
    pub eta_coupling: Option<f64>,
    pub eta_filter: Option<f64>,
    pub eta_surfaces: Option<f64>,
    pub eta_fiber: Option<f64>,
    /// Pump-induced noise rate per watt; calibrated against the published
    /// maximum SNR when omitted.
    pub noise_coeff: Option<f64>,
    pub dark_rate: Option<f64>,
    pub detector_eff: Option<f64>,
    pub gate: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterStageSection {
    pub name: String,
    pub extinction_db: f64,
    pub transmission: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DephasingSection {
    pub pulse_wavelength: Option<f64>,
    pub photon_wavelength: Option<f64>,
    pub angle_deg: Option<f64>,
    /// Spin-wave coherence time (s); mutually exclusive with `temperature`.
    pub tau: Option<f64>,
    /// Atomic temperature (K); mutually exclusive with `tau`.
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub n_trials: Option<u64>,
    pub seed: Option<u64>,
    pub storage_time: Option<f64>,
    pub pump_power: Option<f64>,
    pub converted: Option<bool>,
    pub mu_in: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepsSection {
    pub pump_power: GridSection,
    pub mu_in: GridSection,
    pub write_power: GridSection,
    pub storage_time: GridSection,
    /// Retunes `p` so the zero-time cross-correlation of the decay sweep hits
    /// this value; an explicit `[params] p` takes precedence.
    pub tune_g2_zero: Option<f64>,
}

/// Either an explicit value list or a uniform start/stop/points grid.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    pub values: Option<Vec<f64>>,
}

impl GridSection {
    fn resolve(&self, name: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        if let Some(values) = &self.values {
            if values.is_empty() {
                return Err(ConfigError::Value(format!("{name}: empty value list")));
            }
            return Ok(values.clone());
        }
        match (self.start, self.stop, self.points) {
            (None, None, None) => Ok(default.to_vec()),
            (Some(start), Some(stop), Some(points)) => {
                if points < 1 {
                    return Err(ConfigError::Value(format!("{name}: points must be >= 1")));
                }
                if points == 1 {
                    return Ok(vec![start]);
                }
                let step = (stop - start) / (points - 1) as f64;
                Ok((0..points).map(|i| start + step * i as f64).collect())
            }
            _ => Err(ConfigError::Value(format!(
                "{name}: give either values or all of start/stop/points"
            ))),
        }
    }
}

/// Fully resolved run inputs with defaults applied and invariants checked.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: ExperimentParams,
    /// True when `[params] p` was given explicitly in the file.
    pub p_explicit: bool,
    pub constants: PhysicalConstants,
    pub device: ConversionDevice,
    pub filter_chain: FilterChain,
    pub dephasing: DephasingModel,
    pub n_trials: u64,
    pub seed: u64,
    pub storage_time: f64,
    pub pump_power: f64,
    pub converted: bool,
    pub mu_in: f64,
    pub pump_power_grid: Vec<f64>,
    pub mu_in_grid: Vec<f64>,
    pub write_power_grid: Vec<f64>,
    pub storage_time_grid: Vec<f64>,
    pub tune_g2_zero: Option<f64>,
}

impl std::str::FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        text.parse()
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let defaults = reference_params();
        let params = ExperimentParams {
            p: self.params.p.unwrap_or(defaults.p),
            eta_cw: self.params.eta_cw.unwrap_or(defaults.eta_cw),
            eta_r: self.params.eta_r.unwrap_or(defaults.eta_r),
            eta_ret_intrinsic: self
                .params
                .eta_ret_intrinsic
                .unwrap_or(defaults.eta_ret_intrinsic),
            xi_g: self.params.xi_g.unwrap_or(defaults.xi_g),
            solid_angle_w: self.params.solid_angle_w.unwrap_or(defaults.solid_angle_w),
            solid_angle_r: self.params.solid_angle_r.unwrap_or(defaults.solid_angle_r),
            p_noise_w: self.params.p_noise_w.unwrap_or(defaults.p_noise_w),
            p_noise_r: self.params.p_noise_r.unwrap_or(defaults.p_noise_r),
            p_per_write_watt: self
                .params
                .p_per_write_watt
                .unwrap_or(defaults.p_per_write_watt),
        };
        let report = params.validate();
        if !report.is_valid() {
            return Err(ConfigError::Value(format!("[params] {report}")));
        }

        let constants = PhysicalConstants::new(
            self.constants.boltzmann_k.unwrap_or(crate::constants::BOLTZMANN),
            self.constants.rb87_mass.unwrap_or(RB87_MASS),
            self.constants
                .speed_of_light
                .unwrap_or(crate::constants::SPEED_OF_LIGHT),
            self.constants
                .fiber_group_velocity
                .unwrap_or(crate::constants::FIBER_GROUP_VELOCITY),
        )?;

        let device = self.resolve_device()?;
        device.validate()?;

        let filter_chain = if self.filter_chain.is_empty() {
            FilterChain::reference_chain()
        } else {
            FilterChain {
                stages: self
                    .filter_chain
                    .iter()
                    .map(|s| FilterStage {
                        name: s.name.clone(),
                        extinction_db: s.extinction_db,
                        transmission: s.transmission,
                    })
                    .collect(),
            }
        };
        filter_chain.validate()?;

        let dephasing = self.resolve_dephasing(&constants)?;

        let pump_power = self
            .sim
            .pump_power
            .unwrap_or(fixtures::OPERATING_PUMP_W);
        let device_p_opt = device.optimal_pump_power();
        let mut pump_default: Vec<f64> = (0..61).map(|i| 0.01 * i as f64).collect();
        if !pump_default.iter().any(|&p| (p - device_p_opt).abs() < 1e-12) {
            pump_default.push(device_p_opt);
            pump_default.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
        }
        let mu_default: Vec<f64> = (0..26).map(|i| 0.04 * i as f64).collect();
        let write_default = vec![
            1e-5, 2e-5, 5e-5, 1e-4, 1.7e-4, 3e-4, 6.5e-4, 1e-3, 1.5e-3, 2.39e-3,
        ];
        let storage_default: Vec<f64> = (0..15).map(|i| 4e-6 * i as f64).collect();

        Ok(Resolved {
            params,
            p_explicit: self.params.p.is_some(),
            constants,
            device,
            filter_chain,
            dephasing,
            n_trials: self.sim.n_trials.unwrap_or(1_000_000),
            seed: self.sim.seed.unwrap_or(1),
            storage_time: self.sim.storage_time.unwrap_or(0.0),
            pump_power,
            converted: self.sim.converted.unwrap_or(true),
            mu_in: self.sim.mu_in.unwrap_or(fixtures::CHARACTERIZATION_MU_IN),
            pump_power_grid: self.sweeps.pump_power.resolve("sweeps.pump_power", &pump_default)?,
            mu_in_grid: self.sweeps.mu_in.resolve("sweeps.mu_in", &mu_default)?,
            write_power_grid: self
                .sweeps
                .write_power
                .resolve("sweeps.write_power", &write_default)?,
            storage_time_grid: self
                .sweeps
                .storage_time
                .resolve("sweeps.storage_time", &storage_default)?,
            tune_g2_zero: self.sweeps.tune_g2_zero.or(Some(20.0)),
        })
    }

    fn resolve_device(&self) -> Result<ConversionDevice, ConfigError> {
        let defaults = reference_device();
        let eta_coupling = self.device.eta_coupling.unwrap_or(defaults.eta_coupling);
        let eta_filter = self.device.eta_filter.unwrap_or(defaults.eta_filter);
        let eta_surfaces = self.device.eta_surfaces.unwrap_or(defaults.eta_surfaces);
        let eta_fiber = self.device.eta_fiber.unwrap_or(defaults.eta_fiber);
        let eta_loss = self
            .device
            .eta_loss
            .unwrap_or(eta_coupling * eta_filter * eta_surfaces * eta_fiber);
        let mut device = ConversionDevice {
            eta_n: self.device.eta_n.unwrap_or(defaults.eta_n),
            length_cm: self.device.length_cm.unwrap_or(defaults.length_cm),
            eta_int_max: self.device.eta_int_max.unwrap_or(defaults.eta_int_max),
            eta_loss,
            eta_coupling,
            eta_filter,
            eta_surfaces,
            eta_fiber,
            noise_coeff: 0.0,
            dark_rate: self.device.dark_rate.unwrap_or(defaults.dark_rate),
            detector_eff: self.device.detector_eff.unwrap_or(defaults.detector_eff),
            gate: self.device.gate.unwrap_or(defaults.gate),
        };
        device.noise_coeff = match self.device.noise_coeff {
            Some(coeff) => coeff,
            None => calibrate_noise_coeff(
                &device,
                fixtures::SNR_MAX_SINGLE_PHOTON,
                fixtures::SNR_CAL_MU_IN,
                fixtures::SNR_CAL_PUMP_W,
            )?,
        };
        Ok(device)
    }

    fn resolve_dephasing(
        &self,
        constants: &PhysicalConstants,
    ) -> Result<DephasingModel, ConfigError> {
        let section = &self.dephasing;
        let lambda_pulse = section
            .pulse_wavelength
            .unwrap_or(fixtures::WRITE_WAVELENGTH_M);
        let lambda_photon = section
            .photon_wavelength
            .unwrap_or(fixtures::WRITE_WAVELENGTH_M);
        let angle = section
            .angle_deg
            .unwrap_or(fixtures::COLLECTION_ANGLE_DEG)
            .to_radians();
        let delta_k = delta_k_from_geometry(lambda_pulse, lambda_photon, angle)?;
        match (section.tau, section.temperature) {
            (Some(_), Some(_)) => Err(ConfigError::Value(
                "[dephasing] give tau or temperature, not both".into(),
            )),
            (Some(tau), None) => {
                Ok(DephasingModel::from_tau(constants.rb87_mass, tau, delta_k)?)
            }
            (None, Some(temperature)) => Ok(DephasingModel::from_temperature(
                constants.rb87_mass,
                temperature,
                delta_k,
            )?),
            (None, None) => Ok(DephasingModel::from_tau(
                constants.rb87_mass,
                fixtures::STORAGE_TAU_S,
                delta_k,
            )?),
        }
    }
}

impl Resolved {
    /// Simulation description at a given storage time, with every other
    /// setting taken from the resolved configuration.
    pub fn simulation_at(&self, storage_time: f64, n_trials: u64) -> SimulationConfig {
        SimulationConfig {
            params: self.params,
            device: self.device,
            dephasing: self.dephasing,
            storage_time,
            pump_power: self.pump_power,
            n_trials,
            seed: self.seed,
            converted: self.converted,
        }
    }
}

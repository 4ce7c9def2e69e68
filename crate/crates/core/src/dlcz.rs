//! Analytic model of the spin-wave source: motional dephasing, detection
//! probabilities versus storage time, the closed forms used for decay fits,
//! and a brute-force Monte Carlo oracle for the dephasing envelope.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::constants::BOLTZMANN;
use crate::error::{require_positive, ModelError, Result};
use crate::params::ExperimentParams;

/// Motional dephasing of the stored spin-wave: atomic mass, temperature, and
/// wave-vector mismatch determine the coherence time
/// `tau = sqrt(m / (k_B T dk^2))`.
///
/// The four stored fields satisfy that relation exactly; construct through
/// [`DephasingModel::from_temperature`] or [`DephasingModel::from_tau`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingModel {
    atomic_mass: f64,
    temperature: f64,
    delta_k: f64,
    tau: f64,
}

impl DephasingModel {
    /// Builds the model from the atomic temperature (K).
    pub fn from_temperature(atomic_mass: f64, temperature: f64, delta_k: f64) -> Result<Self> {
        let tau = coherence_time(atomic_mass, temperature, delta_k)?;
        Ok(Self {
            atomic_mass,
            temperature,
            delta_k,
            tau,
        })
    }

    /// Builds the model from a measured coherence time (s), inferring the
    /// temperature.
    pub fn from_tau(atomic_mass: f64, tau: f64, delta_k: f64) -> Result<Self> {
        let temperature = temperature_from_tau(atomic_mass, tau, delta_k)?;
        Ok(Self {
            atomic_mass,
            temperature,
            delta_k,
            tau,
        })
    }

    /// kg
    pub fn atomic_mass(&self) -> f64 {
        self.atomic_mass
    }

    /// K
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// 1/m
    pub fn delta_k(&self) -> f64 {
        self.delta_k
    }

    /// s
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Coherence envelope `exp(-t^2 / tau^2)`.
    pub fn envelope(&self, t: f64) -> f64 {
        let x = t / self.tau;
        (-x * x).exp()
    }
}

/// Magnitude of the wave-vector difference between write pulse and write
/// photon, `|k_W - k_w| = sqrt(k_W^2 + k_w^2 - 2 k_W k_w cos(angle))` with
/// `k = 2 pi / lambda`.
pub fn delta_k_from_geometry(lambda_pulse: f64, lambda_photon: f64, angle: f64) -> Result<f64> {
    require_positive("lambda_pulse", lambda_pulse)?;
    require_positive("lambda_photon", lambda_photon)?;
    if !angle.is_finite() || !(0.0..=std::f64::consts::PI).contains(&angle) {
        return Err(ModelError::OutOfRange {
            name: "angle",
            value: angle,
            min: 0.0,
            max: std::f64::consts::PI,
        });
    }
    let k_pulse = 2.0 * std::f64::consts::PI / lambda_pulse;
    let k_photon = 2.0 * std::f64::consts::PI / lambda_photon;
    let squared =
        k_pulse * k_pulse + k_photon * k_photon - 2.0 * k_pulse * k_photon * angle.cos();
    // Rounding can push the co-propagating case slightly negative.
    Ok(squared.max(0.0).sqrt())
}

/// Coherence time of the stored spin-wave under thermal motion,
/// `tau = sqrt(m / (k_B T dk^2))`.
pub fn coherence_time(atomic_mass: f64, temperature: f64, delta_k: f64) -> Result<f64> {
    require_positive("atomic_mass", atomic_mass)?;
    require_positive("temperature", temperature)?;
    require_positive("delta_k", delta_k)?;
    Ok((atomic_mass / (BOLTZMANN * temperature)).sqrt() / delta_k)
}

/// Inverse of [`coherence_time`]: the temperature that produces a given
/// coherence time.
pub fn temperature_from_tau(atomic_mass: f64, tau: f64, delta_k: f64) -> Result<f64> {
    require_positive("atomic_mass", atomic_mass)?;
    require_positive("tau", tau)?;
    require_positive("delta_k", delta_k)?;
    Ok(atomic_mass / (BOLTZMANN * tau * tau * delta_k * delta_k))
}

/// Time-dependent intrinsic retrieval efficiency
/// `eta0 * exp(-t^2 / tau^2)`.
pub fn intrinsic_retrieval(t: f64, eta0: f64, tau: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta0) || !eta0.is_finite() {
        return Err(ModelError::OutOfRange {
            name: "eta0",
            value: eta0,
            min: 0.0,
            max: 1.0,
        });
    }
    require_positive("tau", tau)?;
    require_nonnegative_time(t)?;
    let x = t / tau;
    Ok(eta0 * (-x * x).exp())
}

fn require_nonnegative_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::OutOfRange {
            name: "t",
            value: t,
            min: 0.0,
            max: f64::INFINITY,
        })
    }
}

/// Per-trial detection probabilities of the noise-free source model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionProbabilities {
    /// Converted write photon detection probability.
    pub p_cw: f64,
    /// Read photon detection probability.
    pub p_r: f64,
    /// Write-read coincidence probability.
    pub p_cwr: f64,
}

/// Detection probabilities at storage time `t`:
///
/// ```text
/// p_cw     = p eta_cw
/// p_r(t)   = p etaI(t) eta_r + N_s [1 - etaI(t)] (dOmega_r / 4pi) xi_g eta_r
/// p_cwr(t) = p etaI(t) eta_cw eta_r
///            + p eta_cw N_s [1 - etaI(t)] (dOmega_r / 4pi) xi_g eta_r
/// ```
///
/// with `etaI(t)` the intrinsic retrieval efficiency and
/// `N_s = p 4pi / dOmega_w`. Detector noise is not part of this model.
pub fn detection_probabilities(
    t: f64,
    params: &ExperimentParams,
    deph: &DephasingModel,
) -> Result<DetectionProbabilities> {
    params.validated()?;
    require_nonnegative_time(t)?;
    let eta_i = intrinsic_retrieval(t, params.eta_ret_intrinsic, deph.tau())?;
    // N_s (dOmega_r / 4pi) = p * (dOmega_r / dOmega_w)
    let random_branch = params.stored_population()
        * (1.0 - eta_i)
        * (params.solid_angle_r / crate::params::FOUR_PI)
        * params.xi_g
        * params.eta_r;
    let p_cw = params.p * params.eta_cw;
    let p_r = params.p * eta_i * params.eta_r + random_branch;
    let p_cwr = params.p * eta_i * params.eta_cw * params.eta_r + p_cw * random_branch;
    Ok(DetectionProbabilities { p_cw, p_r, p_cwr })
}

/// Closed-form retrieval efficiency
/// `eta_r [ eta0 e^{-t^2/tau^2} (1 - p xi) + p xi ]` with
/// `xi = xi_g (dOmega_r / dOmega_w)`.
///
/// Equals `p_cwr / p_cw` from [`detection_probabilities`] identically.
pub fn retrieval_efficiency_closed(
    t: f64,
    params: &ExperimentParams,
    deph: &DephasingModel,
) -> Result<f64> {
    params.validated()?;
    require_nonnegative_time(t)?;
    let eta_i = intrinsic_retrieval(t, params.eta_ret_intrinsic, deph.tau())?;
    let xi = params.xi_effective();
    Ok(params.eta_r * (eta_i * (1.0 - params.p * xi) + params.p * xi))
}

/// Closed-form cross-correlation
/// `1 + eta0 e^{-t^2/tau^2} (1 - p) / (p [ eta0 e^{-t^2/tau^2} (1 - xi) + xi ])`.
///
/// Equals `p_cwr / (p_cw p_r)` from [`detection_probabilities`] identically.
pub fn g2_cross_closed(t: f64, params: &ExperimentParams, deph: &DephasingModel) -> Result<f64> {
    params.validated()?;
    require_nonnegative_time(t)?;
    if params.p <= 0.0 {
        return Err(ModelError::NoPairs);
    }
    let eta_i = intrinsic_retrieval(t, params.eta_ret_intrinsic, deph.tau())?;
    let xi = params.xi_effective();
    Ok(1.0 + eta_i * (1.0 - params.p) / (params.p * (eta_i * (1.0 - xi) + xi)))
}

/// Storage time at which the closed-form cross-correlation drops to the
/// classical bound of 2. `None` when the model starts at or below the bound.
pub fn nonclassical_cutoff_time(params: &ExperimentParams, deph: &DephasingModel) -> Option<f64> {
    let g2_zero = g2_cross_closed(0.0, params, deph).ok()?;
    if g2_zero <= 2.0 {
        return None;
    }
    let xi = params.xi_effective();
    let denom = 1.0 - params.p * (2.0 - xi);
    if denom <= 0.0 {
        return None;
    }
    // Solve eta0 e^{-t^2/tau^2} = p xi / denom for t.
    let threshold = params.p * xi / denom;
    let ratio = params.eta_ret_intrinsic / threshold;
    if ratio <= 1.0 {
        return None;
    }
    Some(deph.tau() * ratio.ln().sqrt())
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub realizations: usize,
}

/// Brute-force oracle for the dephasing envelope: samples one velocity
/// component per atom from the thermal distribution, accumulates the phases
/// `dk * v * t`, and averages `|sum_j e^{i phi_j} / N|^2` over realizations.
///
/// The finite-ensemble expectation is `(1 - 1/N) e^{-t^2/tau^2} + 1/N`.
/// Deterministic for a fixed seed, independent of worker count.
pub fn dephasing_overlap_mc(
    n_atoms: usize,
    deph: &DephasingModel,
    t: f64,
    realizations: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_atoms < 2 {
        return Err(ModelError::OutOfRange {
            name: "n_atoms",
            value: n_atoms as f64,
            min: 2.0,
            max: f64::INFINITY,
        });
    }
    if realizations < 1 {
        return Err(ModelError::OutOfRange {
            name: "realizations",
            value: realizations as f64,
            min: 1.0,
            max: f64::INFINITY,
        });
    }
    require_nonnegative_time(t)?;
    let velocity_std = (BOLTZMANN * deph.temperature() / deph.atomic_mass()).sqrt();
    let normal = Normal::new(0.0, velocity_std).expect("positive std");
    let phase_scale = deph.delta_k() * t;
    let n = n_atoms as f64;

    // Ordered collect keeps the final mean independent of the worker count.
    let overlaps: Vec<f64> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = realization_rng(seed, r as u64);
            let mut sum_re = 0.0;
            let mut sum_im = 0.0;
            for _ in 0..n_atoms {
                let v: f64 = normal.sample(&mut rng);
                let (s, c) = (phase_scale * v).sin_cos();
                sum_re += c;
                sum_im += s;
            }
            let re = sum_re / n;
            let im = sum_im / n;
            re * re + im * im
        })
        .collect();

    let mean = overlaps.iter().sum::<f64>() / realizations as f64;
    let std_err = if realizations > 1 {
        let var = overlaps
            .iter()
            .map(|x| {
                let d = x - mean;
                d * d
            })
            .sum::<f64>()
            / ((realizations - 1) as f64);
        (var / realizations as f64).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        value: mean,
        std_err,
        realizations,
    })
}

fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    // Domain tag keeps these streams disjoint from the event simulator's.
    key[16..24].copy_from_slice(&u64::from_le_bytes(*b"dephase\0").to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

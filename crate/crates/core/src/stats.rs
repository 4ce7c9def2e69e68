//! Correlation figures of merit with Poisson counting uncertainties.
//!
//! Estimators accept simulated [`TrialCounts`] or externally supplied
//! measured values, so published correlation tables can be re-analyzed
//! directly. All ratios are computed from raw counts, never from pre-rounded
//! probabilities.

use crate::error::{ModelError, Result};
pub use crate::fixtures::Measured;
use crate::sim::TrialCounts;

/// Which figure of merit a [`CorrelationEstimate`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateLabel {
    G2Cross,
    G2AutoW,
    G2AutoR,
    Snr,
    CauchySchwarzR,
    MaxVisibility,
    HeraldingEfficiency,
}

/// A figure of merit with its one-standard-deviation uncertainty.
///
/// `flagged` marks estimates outside their normal range: a zero-coincidence
/// value with a one-sided error, or an SNR below the noise floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub sigma: f64,
    pub n_trials: u64,
    pub label: EstimateLabel,
    pub flagged: bool,
}

fn relative_sigma_from_counts(counts: &[u64]) -> f64 {
    counts
        .iter()
        .map(|&c| 1.0 / c as f64)
        .sum::<f64>()
        .sqrt()
}

/// Normalized cross-correlation `p_cwr / (p_cw p_r)` from counts, with the
/// relative Poisson errors of the three counts added in quadrature.
///
/// Zero coincidences produce a zero value flagged with a one-sided error at
/// the single-count scale.
pub fn g2_cross(counts: &TrialCounts) -> Result<CorrelationEstimate> {
    if counts.clicks_w == 0 || counts.clicks_r == 0 {
        return Err(ModelError::NoCounts("singles"));
    }
    let n = counts.n_trials as f64;
    let one_count_scale = n / (counts.clicks_w as f64 * counts.clicks_r as f64);
    if counts.coincidences_wr == 0 {
        return Ok(CorrelationEstimate {
            value: 0.0,
            sigma: one_count_scale,
            n_trials: counts.n_trials,
            label: EstimateLabel::G2Cross,
            flagged: true,
        });
    }
    let value = counts.coincidences_wr as f64 * one_count_scale;
    let rel = relative_sigma_from_counts(&[
        counts.coincidences_wr,
        counts.clicks_w,
        counts.clicks_r,
    ]);
    Ok(CorrelationEstimate {
        value,
        sigma: value * rel,
        n_trials: counts.n_trials,
        label: EstimateLabel::G2Cross,
        flagged: false,
    })
}

fn g2_auto(
    singles_a: u64,
    singles_b: u64,
    coinc: u64,
    n_trials: u64,
    label: EstimateLabel,
) -> Result<CorrelationEstimate> {
    if singles_a == 0 || singles_b == 0 {
        return Err(ModelError::NoCounts("split-arm singles"));
    }
    let n = n_trials as f64;
    let one_count_scale = n / (singles_a as f64 * singles_b as f64);
    if coinc == 0 {
        return Ok(CorrelationEstimate {
            value: 0.0,
            sigma: one_count_scale,
            n_trials,
            label,
            flagged: true,
        });
    }
    let value = coinc as f64 * one_count_scale;
    let rel = relative_sigma_from_counts(&[coinc, singles_a, singles_b]);
    Ok(CorrelationEstimate {
        value,
        sigma: value * rel,
        n_trials,
        label,
        flagged: false,
    })
}

/// Unheralded autocorrelation of the write arm from its splitter tallies.
pub fn g2_auto_write(counts: &TrialCounts) -> Result<CorrelationEstimate> {
    g2_auto(
        counts.clicks_w_split_a,
        counts.clicks_w_split_b,
        counts.coinc_w_ab,
        counts.n_trials,
        EstimateLabel::G2AutoW,
    )
}

/// Unheralded autocorrelation of the read arm from its splitter tallies.
pub fn g2_auto_read(counts: &TrialCounts) -> Result<CorrelationEstimate> {
    g2_auto(
        counts.clicks_r_split_a,
        counts.clicks_r_split_b,
        counts.coinc_r_ab,
        counts.n_trials,
        EstimateLabel::G2AutoR,
    )
}

/// Cauchy-Schwarz parameter `R = g2_cross^2 / (g2_auto_w g2_auto_r)` from
/// measured correlations, with first-order propagation in quadrature:
/// `(sigma_R / R)^2 = (2 sigma_x / x)^2 + (sigma_a / a)^2 + (sigma_b / b)^2`.
///
/// Classical field pairs obey `R <= 1`.
pub fn cauchy_schwarz_r(
    cross: Measured,
    auto_w: Measured,
    auto_r: Measured,
) -> Result<CorrelationEstimate> {
    if auto_w.value <= 0.0 || auto_r.value <= 0.0 {
        return Err(ModelError::NoCounts("autocorrelation"));
    }
    // A vanishing cross-correlation estimate leaves the relative error of
    // R^(1/2) undefined.
    if cross.value <= 0.0 {
        return Err(ModelError::NoCounts("cross-correlation"));
    }
    let value = cross.value * cross.value / (auto_w.value * auto_r.value);
    let rel_sq = {
        let x = 2.0 * cross.sigma / cross.value;
        let a = auto_w.sigma / auto_w.value;
        let b = auto_r.sigma / auto_r.value;
        x * x + a * a + b * b
    };
    Ok(CorrelationEstimate {
        value,
        sigma: value * rel_sq.sqrt(),
        n_trials: 0,
        label: EstimateLabel::CauchySchwarzR,
        flagged: false,
    })
}

/// [`cauchy_schwarz_r`] fed from simulated counts.
pub fn cauchy_schwarz_r_from_counts(counts: &TrialCounts) -> Result<CorrelationEstimate> {
    let cross = g2_cross(counts)?;
    let auto_w = g2_auto_write(counts)?;
    let auto_r = g2_auto_read(counts)?;
    let mut estimate = cauchy_schwarz_r(
        Measured::new(cross.value, cross.sigma),
        Measured::new(auto_w.value, auto_w.sigma),
        Measured::new(auto_r.value, auto_r.sigma),
    )?;
    estimate.n_trials = counts.n_trials;
    Ok(estimate)
}

/// Number of standard deviations by which `R` exceeds the classical bound:
/// `(R - 1) / sigma_R`. Negative for classical values.
pub fn violation_significance(r: &CorrelationEstimate) -> Result<f64> {
    if !r.sigma.is_finite() || r.sigma <= 0.0 {
        return Err(ModelError::ZeroSigma);
    }
    Ok((r.value - 1.0) / r.sigma)
}

/// Signal-to-noise ratio `(p_cw - p_N) / p_N` from detection probabilities
/// measured over `n_trials` each, with Poisson errors from both measurements.
///
/// A signal below the noise floor is reported negative and flagged. Zero
/// measured noise is signaled as [`ModelError::InfiniteSnr`].
pub fn snr_from_counts(p_cw: f64, p_noise: f64, n_trials: u64) -> Result<CorrelationEstimate> {
    if n_trials == 0 {
        return Err(ModelError::NoCounts("trials"));
    }
    for (name, value) in [("p_cw", p_cw), ("p_noise", p_noise)] {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(ModelError::OutOfRange {
                name,
                value,
                min: 0.0,
                max: 1.0,
            });
        }
    }
    if p_noise == 0.0 {
        return Err(ModelError::InfiniteSnr);
    }
    let n = n_trials as f64;
    let value = (p_cw - p_noise) / p_noise;
    let sigma_cw_sq = p_cw / n;
    let sigma_n_sq = p_noise / n;
    let sigma = (sigma_cw_sq / (p_noise * p_noise)
        + sigma_n_sq * (p_cw * p_cw) / p_noise.powi(4))
    .sqrt();
    Ok(CorrelationEstimate {
        value,
        sigma,
        n_trials,
        label: EstimateLabel::Snr,
        flagged: value < 0.0,
    })
}

/// Maximal two-photon interference visibility inferred from a
/// cross-correlation value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxVisibility {
    pub value: f64,
    /// Set when the visibility exceeds 1/sqrt(2), the threshold for a CHSH
    /// Bell-inequality violation.
    pub bell_violation_possible: bool,
}

/// `V_max = (g2 - 1) / (g2 + 1)` for `g2 >= 1`.
pub fn max_visibility(g2: f64) -> Result<MaxVisibility> {
    if !g2.is_finite() || g2 < 1.0 {
        return Err(ModelError::OutOfRange {
            name: "g2",
            value: g2,
            min: 1.0,
            max: f64::INFINITY,
        });
    }
    let value = (g2 - 1.0) / (g2 + 1.0);
    Ok(MaxVisibility {
        value,
        bell_violation_possible: value > std::f64::consts::FRAC_1_SQRT_2,
    })
}

/// Maximal heralding efficiency `SNR / (SNR + 1)`, in [0, 1].
///
/// An unbounded SNR (`f64::INFINITY`) maps to exactly 1.
pub fn max_heralding_efficiency(snr: f64) -> Result<f64> {
    if snr.is_nan() || snr < 0.0 {
        return Err(ModelError::NonPositive {
            name: "snr",
            value: snr,
        });
    }
    if snr.is_infinite() {
        return Ok(1.0);
    }
    Ok(snr / (snr + 1.0))
}

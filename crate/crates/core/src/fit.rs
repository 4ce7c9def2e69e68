//! Weighted least-squares engine: closed-form line through the origin,
//! damped Gauss-Newton for the nonlinear decay and saturation models, and
//! full-model fits of the storage-time observables.

use nalgebra::{DMatrix, DVector};

use crate::dlcz::DephasingModel;
use crate::error::{ModelError, Result};
use crate::params::ExperimentParams;
use crate::qfc::ConversionDevice;

/// One data point `(x, y, sigma_y)` with `sigma_y > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
}

impl DataPoint {
    pub fn new(x: f64, y: f64, sigma: f64) -> Self {
        Self { x, y, sigma }
    }
}

/// Parses `(x, y, sigma)` points from comma-separated text. A non-numeric
/// first line is treated as a header and skipped; blank lines are ignored.
pub fn points_from_csv(text: &str) -> Result<Vec<DataPoint>> {
    let mut points = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(ModelError::InvalidParams(format!(
                "line {}: expected 3 comma-separated columns, got {}",
                index + 1,
                fields.len()
            )));
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) => points.push(DataPoint::new(values[0], values[1], values[2])),
            Err(e) if index == 0 => {
                let _ = e; // header row
            }
            Err(e) => {
                return Err(ModelError::InvalidParams(format!(
                    "line {}: {e}",
                    index + 1
                )))
            }
        }
    }
    Ok(points)
}

/// A fitted parameter with its one-standard-deviation uncertainty.
#[derive(Debug, Clone, PartialEq)]
pub struct FitParameter {
    pub name: &'static str,
    pub value: f64,
    pub sigma: f64,
}

/// Outcome of a weighted least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub parameters: Vec<FitParameter>,
    pub chi2: f64,
    pub dof: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn parameter(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

impl std::fmt::Display for FitResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for p in &self.parameters {
            writeln!(f, "{} = {:.9e} +- {:.9e}", p.name, p.value, p.sigma)?;
        }
        writeln!(
            f,
            "chi2 = {:.9e} (dof = {}), converged = {} after {} iterations",
            self.chi2, self.dof, self.converged, self.iterations
        )
    }
}

/// Relative step below which the iteration is declared converged.
pub const STEP_TOLERANCE: f64 = 1e-8;
/// Iteration cap of the damped Gauss-Newton loop.
pub const MAX_ITERATIONS: usize = 200;

fn check_points(points: &[DataPoint], needed: usize) -> Result<()> {
    if points.len() < needed {
        return Err(ModelError::TooFewPoints {
            needed,
            got: points.len(),
        });
    }
    for point in points {
        if !point.sigma.is_finite() || point.sigma <= 0.0 {
            return Err(ModelError::ZeroSigma);
        }
        if !point.x.is_finite() || !point.y.is_finite() {
            return Err(ModelError::InvalidParams(format!(
                "non-finite data point ({}, {})",
                point.x, point.y
            )));
        }
    }
    Ok(())
}

fn sorted_points(points: &[DataPoint]) -> Vec<DataPoint> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        a.x.total_cmp(&b.x)
            .then(a.y.total_cmp(&b.y))
            .then(a.sigma.total_cmp(&b.sigma))
    });
    sorted
}

/// Closed-form weighted fit of `y = slope * x` with analytic slope error.
pub fn fit_linear_origin(points: &[DataPoint]) -> Result<FitResult> {
    check_points(points, 2)?;
    let points = sorted_points(points);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for point in &points {
        let w = 1.0 / (point.sigma * point.sigma);
        sxx += w * point.x * point.x;
        sxy += w * point.x * point.y;
    }
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(ModelError::SingularFit(
            "all abscissas are zero; slope is unidentifiable".into(),
        ));
    }
    let slope = sxy / sxx;
    let chi2 = points
        .iter()
        .map(|p| {
            let r = (p.y - slope * p.x) / p.sigma;
            r * r
        })
        .sum();
    Ok(FitResult {
        parameters: vec![FitParameter {
            name: "slope",
            value: slope,
            sigma: (1.0 / sxx).sqrt(),
        }],
        chi2,
        dof: points.len() - 1,
        converged: true,
        iterations: 0,
    })
}

fn chi2_of(points: &[DataPoint], model: &dyn Fn(f64, &[f64]) -> f64, theta: &[f64]) -> f64 {
    points
        .iter()
        .map(|p| {
            let r = (p.y - model(p.x, theta)) / p.sigma;
            r * r
        })
        .sum()
}

fn jacobian(
    points: &[DataPoint],
    model: &dyn Fn(f64, &[f64]) -> f64,
    theta: &[f64],
    scales: &[f64],
) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(points.len(), theta.len());
    let mut probe = theta.to_vec();
    for k in 0..theta.len() {
        let h = 1e-6 * scales[k];
        probe[k] = theta[k] + h;
        let plus: Vec<f64> = points.iter().map(|p| model(p.x, &probe)).collect();
        probe[k] = theta[k] - h;
        let minus: Vec<f64> = points.iter().map(|p| model(p.x, &probe)).collect();
        probe[k] = theta[k];
        for (i, point) in points.iter().enumerate() {
            j[(i, k)] = (plus[i] - minus[i]) / (2.0 * h * point.sigma);
        }
    }
    j
}

/// Damped Gauss-Newton minimizer of the weighted residual sum for an
/// arbitrary model `f(x, theta)`. The damping factor multiplies the normal
/// matrix diagonal and adapts by a factor of ten on failed or successful
/// steps. Parameter uncertainties come from the inverse curvature at the
/// optimum, scaled by the reduced chi-square when it exceeds one.
pub fn fit_curve(
    points: &[DataPoint],
    model: impl Fn(f64, &[f64]) -> f64,
    init: &[(&'static str, f64)],
) -> Result<FitResult> {
    let n_params = init.len();
    check_points(points, n_params + 1)?;
    // Canonical point order makes the accumulation, and therefore the result,
    // bit-identical under any permutation of the input.
    let points = &sorted_points(points)[..];
    let model: &dyn Fn(f64, &[f64]) -> f64 = &model;
    let names: Vec<&'static str> = init.iter().map(|(n, _)| *n).collect();
    let mut theta: Vec<f64> = init.iter().map(|(_, v)| *v).collect();
    let scales: Vec<f64> = theta.iter().map(|v| v.abs().max(1e-8)).collect();

    let mut chi2 = chi2_of(points, model, &theta);
    if !chi2.is_finite() {
        return Err(ModelError::SingularFit(
            "initial guess gives a non-finite residual".into(),
        ));
    }
    let mut damping = 1e-3;
    let mut converged = false;
    let mut polished = false;
    let mut iterations = 0;

    for _ in 0..MAX_ITERATIONS {
        iterations += 1;
        let j = jacobian(points, model, &theta, &scales);
        let residual = DVector::from_iterator(
            points.len(),
            points.iter().map(|p| (p.y - model(p.x, &theta)) / p.sigma),
        );
        let normal = j.transpose() * &j;
        let gradient = j.transpose() * residual;
        if gradient.iter().any(|g| !g.is_finite()) {
            return Err(ModelError::SingularFit("non-finite gradient".into()));
        }

        let mut stepped = false;
        for _ in 0..24 {
            let mut damped = normal.clone();
            for k in 0..n_params {
                let d = damped[(k, k)];
                if d <= 0.0 || !d.is_finite() {
                    return Err(ModelError::SingularFit(format!(
                        "vanishing curvature for {}",
                        names[k]
                    )));
                }
                damped[(k, k)] = d * (1.0 + damping);
            }
            let Some(step) = damped.lu().solve(&gradient) else {
                return Err(ModelError::SingularFit("normal equations".into()));
            };
            let candidate: Vec<f64> =
                theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
            let candidate_chi2 = chi2_of(points, model, &candidate);
            if candidate_chi2.is_finite() && candidate_chi2 <= chi2 {
                let rel_step = step
                    .iter()
                    .zip(theta.iter().zip(scales.iter()))
                    .map(|(s, (t, scale))| s.abs() / t.abs().max(*scale))
                    .fold(0.0f64, f64::max);
                theta = candidate;
                chi2 = candidate_chi2;
                damping = (damping / 10.0).max(1e-12);
                stepped = true;
                if rel_step < STEP_TOLERANCE {
                    converged = true;
                }
                // Polish to the fixed point so the result does not depend on
                // where inside the tolerance band the iteration stopped.
                if rel_step < 1e-13 {
                    polished = true;
                }
                break;
            }
            damping *= 10.0;
        }
        if polished || !stepped {
            break;
        }
    }

    let dof = points.len() - n_params;
    let j = jacobian(points, model, &theta, &scales);
    let normal = j.transpose() * &j;
    let covariance = normal
        .try_inverse()
        .ok_or_else(|| ModelError::SingularFit("curvature is singular at the optimum".into()))?;
    let scale = if dof > 0 { (chi2 / dof as f64).max(1.0) } else { 1.0 };
    let parameters = names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let var = covariance[(k, k)];
            if var < 0.0 || !var.is_finite() {
                return Err(ModelError::SingularFit(format!(
                    "negative variance for {name}"
                )));
            }
            Ok(FitParameter {
                name,
                value: theta[k],
                sigma: (var * scale).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(FitResult {
        parameters,
        chi2,
        dof,
        converged,
        iterations,
    })
}

/// Auto-derived starting point for the Gaussian decay fit: amplitude from the
/// first point, floor from the last, decay time from the linearly
/// interpolated crossing of the 1/e level of the initial excess.
fn gaussian_decay_guess(points: &[DataPoint]) -> [f64; 3] {
    let first = points.first().expect("checked non-empty");
    let last = points.last().expect("checked non-empty");
    let floor = last.y;
    let amplitude = first.y - floor;
    let threshold = floor + amplitude / std::f64::consts::E;
    let mut tau = (last.x - first.x).abs().max(f64::MIN_POSITIVE);
    for pair in points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if (a.y >= threshold && b.y <= threshold) && a.y != b.y {
            let f = (a.y - threshold) / (a.y - b.y);
            tau = (a.x + f * (b.x - a.x)).max(f64::MIN_POSITIVE);
            break;
        }
    }
    [amplitude, tau, floor]
}

/// Fits `amplitude * exp(-(t/tau)^2) + floor` to a storage-time decay.
///
/// Initial guesses may be supplied as `[amplitude, tau, floor]`; otherwise
/// they are derived from the data. Input points must span at least one
/// e-folding for the automatic guess to be meaningful.
pub fn fit_gaussian_decay(points: &[DataPoint], guesses: Option<[f64; 3]>) -> Result<FitResult> {
    check_points(points, 4)?;
    // The automatic guess walks the curve in time order.
    let points = sorted_points(points);
    let [amplitude, tau, floor] = guesses.unwrap_or_else(|| gaussian_decay_guess(&points));
    fit_curve(
        &points,
        |t, theta| {
            let x = t / theta[1];
            theta[0] * (-x * x).exp() + theta[2]
        },
        &[("amplitude", amplitude), ("tau", tau), ("floor", floor)],
    )
}

/// Fits the conversion saturation curve `eta_max * sin^2(L sqrt(eta_n P))`
/// with the waveguide length fixed.
pub fn fit_saturation(
    points: &[DataPoint],
    length_cm: f64,
    guesses: Option<[f64; 2]>,
) -> Result<FitResult> {
    check_points(points, 4)?;
    if !length_cm.is_finite() || length_cm <= 0.0 {
        return Err(ModelError::NonPositive {
            name: "length_cm",
            value: length_cm,
        });
    }
    let [eta_max, eta_n] = guesses.unwrap_or_else(|| {
        let peak = points.iter().fold(points[0], |best, p| {
            if p.y > best.y {
                *p
            } else {
                best
            }
        });
        let eta_max = peak.y.max(1e-3);
        let half_pi_over_l = std::f64::consts::PI / (2.0 * length_cm);
        let eta_n = if peak.x > 0.0 {
            half_pi_over_l * half_pi_over_l / peak.x
        } else {
            1.0
        };
        [eta_max, eta_n]
    });
    fit_curve(
        points,
        move |p, theta| {
            let s = (length_cm * (theta[1].abs() * p).sqrt()).sin();
            theta[0] * s * s
        },
        &[("eta_max", eta_max), ("eta_n", eta_n)],
    )
}

/// Full-model fit of the cross-correlation storage decay with
/// `(p, eta_ret_intrinsic, tau)` free and the branching coefficient fixed
/// from the parameter set.
pub fn fit_g2_decay_full(
    points: &[DataPoint],
    params: &ExperimentParams,
    init: [f64; 3],
) -> Result<FitResult> {
    check_points(points, 4)?;
    let xi = params.xi_effective();
    fit_curve(
        points,
        move |t, theta| {
            let (p, eta0, tau) = (theta[0].abs(), theta[1].abs(), theta[2].abs());
            let x = t / tau;
            let eta = eta0 * (-x * x).exp();
            1.0 + eta * (1.0 - p) / (p * (eta * (1.0 - xi) + xi))
        },
        &[("p", init[0]), ("eta_ret_intrinsic", init[1]), ("tau", init[2])],
    )
}

/// Full-model fit of the retrieval-efficiency storage decay with
/// `(p, eta_ret_intrinsic, tau)` free and the read-arm efficiency and
/// branching coefficient fixed from the parameter set.
pub fn fit_retrieval_decay_full(
    points: &[DataPoint],
    params: &ExperimentParams,
    init: [f64; 3],
) -> Result<FitResult> {
    check_points(points, 4)?;
    let xi = params.xi_effective();
    let eta_r = params.eta_r;
    fit_curve(
        points,
        move |t, theta| {
            let (p, eta0, tau) = (theta[0].abs(), theta[1].abs(), theta[2].abs());
            let x = t / tau;
            eta_r * (eta0 * (-x * x).exp() * (1.0 - p * xi) + p * xi)
        },
        &[("p", init[0]), ("eta_ret_intrinsic", init[1]), ("tau", init[2])],
    )
}

/// Synthetic saturation data helper shared by tests and benchmarks.
pub fn saturation_curve(device: &ConversionDevice, powers: &[f64]) -> Result<Vec<DataPoint>> {
    powers
        .iter()
        .map(|&p| {
            Ok(DataPoint::new(
                p,
                crate::qfc::eta_internal(p, device)?,
                0.01,
            ))
        })
        .collect()
}

/// Synthetic retrieval-decay data helper shared by tests and benchmarks.
pub fn retrieval_curve(
    params: &ExperimentParams,
    deph: &DephasingModel,
    times: &[f64],
    sigma: f64,
) -> Result<Vec<DataPoint>> {
    times
        .iter()
        .map(|&t| {
            Ok(DataPoint::new(
                t,
                crate::dlcz::retrieval_efficiency_closed(t, params, deph)?,
                sigma,
            ))
        })
        .collect()
}

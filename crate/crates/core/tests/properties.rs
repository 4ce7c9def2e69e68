//! Property tests for the model invariants: algebraic identities between the
//! closed forms and the probability equations, composition-rule behavior,
//! link-budget additivity, and estimator null behavior.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dlcz_telecom_core::constants::RB87_MASS;
use dlcz_telecom_core::dlcz::{
    coherence_time, delta_k_from_geometry, detection_probabilities, g2_cross_closed,
    retrieval_efficiency_closed, temperature_from_tau, DephasingModel,
};
use dlcz_telecom_core::params::{reference_params, ExperimentParams, FOUR_PI};
use dlcz_telecom_core::qfc::{
    chain_extinction, compose_g2_with_noise, equivalent_fiber_length, snr, FilterChain,
    FilterStage,
};
use dlcz_telecom_core::sim::{sample_pair_number, simulate, SimulationConfig};
use dlcz_telecom_core::stats;

fn reference_dephasing() -> DephasingModel {
    let dk = delta_k_from_geometry(780e-9, 780e-9, 3f64.to_radians()).unwrap();
    DephasingModel::from_tau(RB87_MASS, 23.6e-6, dk).unwrap()
}

fn random_params() -> impl Strategy<Value = ExperimentParams> {
    (
        1e-4..0.2f64,   // p
        1e-3..1.0f64,   // eta_cw
        1e-3..1.0f64,   // eta_r
        0.01..1.0f64,   // eta_ret_intrinsic
        0.01..0.99f64,  // xi_g
        -8.0..-2.0f64,  // log10 write solid-angle fraction
        -8.0..-2.0f64,  // log10 read solid-angle fraction
    )
        .prop_map(|(p, eta_cw, eta_r, eta0, xi, log_fw, log_fr)| ExperimentParams {
            p,
            eta_cw,
            eta_r,
            eta_ret_intrinsic: eta0,
            xi_g: xi,
            solid_angle_w: 10f64.powf(log_fw) * FOUR_PI,
            solid_angle_r: 10f64.powf(log_fr) * FOUR_PI,
            p_noise_w: 0.0,
            p_noise_r: 0.0,
            p_per_write_watt: 1.0,
        })
        .prop_filter("inside the linearized model's domain", |params| {
            params.validate().is_valid()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn closed_forms_are_identities(params in random_params(), t_frac in 0.0..3.0f64) {
        let deph = reference_dephasing();
        let t = t_frac * deph.tau();
        prop_assert!(params.validate().is_valid());
        let probs = detection_probabilities(t, &params, &deph).unwrap();
        let eta = retrieval_efficiency_closed(t, &params, &deph).unwrap();
        let g2 = g2_cross_closed(t, &params, &deph).unwrap();
        let eta_ratio = probs.p_cwr / probs.p_cw;
        let g2_ratio = probs.p_cwr / (probs.p_cw * probs.p_r);
        prop_assert!(((eta - eta_ratio) / eta).abs() < 1e-12,
            "eta {eta} vs ratio {eta_ratio}");
        prop_assert!(((g2 - g2_ratio) / g2).abs() < 1e-12,
            "g2 {g2} vs ratio {g2_ratio}");
        // Coincidences never exceed singles.
        prop_assert!(probs.p_cwr <= probs.p_cw.min(probs.p_r) * (1.0 + 1e-15));
    }

    #[test]
    fn g2_closed_is_nonincreasing_and_at_least_one(
        params in random_params(),
        t_frac in 0.0..3.0f64,
        dt_frac in 0.0..1.0f64,
    ) {
        let deph = reference_dephasing();
        let t0 = t_frac * deph.tau();
        let t1 = t0 + dt_frac * deph.tau();
        let early = g2_cross_closed(t0, &params, &deph).unwrap();
        let late = g2_cross_closed(t1, &params, &deph).unwrap();
        prop_assert!(early >= 1.0 && late >= 1.0);
        prop_assert!(late <= early * (1.0 + 1e-12));
        let eta_early = retrieval_efficiency_closed(t0, &params, &deph).unwrap();
        let eta_late = retrieval_efficiency_closed(t1, &params, &deph).unwrap();
        prop_assert!(eta_late <= eta_early * (1.0 + 1e-12));
    }

    #[test]
    fn coherence_time_round_trips(
        temperature in 1e-6..1e-2f64,
        delta_k in 1e3..1e7f64,
    ) {
        let tau = coherence_time(RB87_MASS, temperature, delta_k).unwrap();
        let back = temperature_from_tau(RB87_MASS, tau, delta_k).unwrap();
        prop_assert!(((back - temperature) / temperature).abs() < 1e-12);
    }

    #[test]
    fn composition_maps_into_unit_interval_and_is_monotone(
        g2_low in 1.0..1e3f64,
        gap in 0.0..1e3f64,
        snr_low in 1e-6..1e9f64,
        factor in 1.0..1e6f64,
    ) {
        let g2_high = g2_low + gap;
        let snr_high = snr_low * factor;
        let base = compose_g2_with_noise(g2_low, snr_low).unwrap();
        prop_assert!(base >= 1.0 - 1e-12 && base <= g2_low + 1e-12);
        let richer = compose_g2_with_noise(g2_high, snr_low).unwrap();
        prop_assert!(richer >= base - 1e-12 * richer.abs());
        let cleaner = compose_g2_with_noise(g2_low, snr_high).unwrap();
        prop_assert!(cleaner >= base - 1e-12 * cleaner.abs());
        prop_assert_eq!(compose_g2_with_noise(1.0, snr_low).unwrap(), 1.0);
    }

    #[test]
    fn fiber_equivalents_add_in_decibels(
        eta_a in 1e-6..1.0f64,
        eta_b in 1e-6..1.0f64,
        atten in 0.05..5.0f64,
    ) {
        let combined = equivalent_fiber_length(eta_a * eta_b, atten).unwrap();
        let split = equivalent_fiber_length(eta_a, atten).unwrap()
            + equivalent_fiber_length(eta_b, atten).unwrap();
        prop_assert!((combined - split).abs() <= 1e-9 * combined.abs().max(1.0));
    }

    #[test]
    fn chain_extinction_is_permutation_invariant(
        dbs in prop::collection::vec(0.0..120.0f64, 1..6),
        rotation in 0usize..6,
    ) {
        let stages: Vec<FilterStage> = dbs
            .iter()
            .enumerate()
            .map(|(i, &db)| FilterStage {
                name: format!("stage {i}"),
                extinction_db: db,
                transmission: 0.5 + 0.4 / (i + 1) as f64,
            })
            .collect();
        let mut rotated = stages.clone();
        rotated.rotate_left(rotation % stages.len().max(1));
        let a = chain_extinction(&FilterChain { stages }).unwrap();
        let b = chain_extinction(&FilterChain { stages: rotated }).unwrap();
        prop_assert!((a.extinction_db - b.extinction_db).abs() < 1e-9);
        prop_assert!((a.signal_transmission - b.signal_transmission).abs() < 1e-12);
    }

    #[test]
    fn snr_scales_linearly(mu in 1e-6..10.0f64, scale in 1e-3..1e3f64, pump in 0.01..0.6f64) {
        let device = dlcz_telecom_core::qfc::reference_device();
        let base = snr(mu, pump, &device).unwrap();
        let scaled = snr(scale * mu, pump, &device).unwrap();
        prop_assert!(((scaled - scale * base) / scaled).abs() < 1e-12);
    }

    #[test]
    fn validated_params_are_accepted_downstream(params in random_params(), t_frac in 0.0..2.0f64) {
        // Validation is the gate: anything it passes must evaluate cleanly.
        prop_assert!(params.validate().is_valid());
        let deph = reference_dephasing();
        let t = t_frac * deph.tau();
        prop_assert!(detection_probabilities(t, &params, &deph).is_ok());
        prop_assert!(retrieval_efficiency_closed(t, &params, &deph).is_ok());
        prop_assert!(g2_cross_closed(t, &params, &deph).is_ok());
        let config = SimulationConfig {
            params,
            device: dlcz_telecom_core::qfc::reference_device(),
            dephasing: deph,
            storage_time: t,
            pump_power: 0.29,
            n_trials: 32,
            seed: 5,
            converted: true,
        };
        prop_assert!(simulate(&config).is_ok());
    }
}

/// Destroying the write-read pairing drives the cross-correlation estimate to
/// one: write clicks come from one source realization, read clicks from an
/// independent one.
#[test]
fn shuffled_pairing_gives_unit_cross_correlation() {
    let p_mean = 0.05;
    let eta_w = 0.5;
    let eta_r = 0.4;
    let n_trials: u64 = 400_000;
    let mut rng_w = ChaCha8Rng::seed_from_u64(101);
    let mut rng_r = ChaCha8Rng::seed_from_u64(909);
    let mut counts = dlcz_telecom_core::TrialCounts {
        n_trials,
        ..Default::default()
    };
    for _ in 0..n_trials {
        let n_w = sample_pair_number(p_mean, &mut rng_w).unwrap();
        let mut w = false;
        for _ in 0..n_w {
            w |= rng_w.random_bool(eta_w);
        }
        // Independent draw for the read side breaks the pairing.
        let n_r = sample_pair_number(p_mean, &mut rng_r).unwrap();
        let mut r = false;
        for _ in 0..n_r {
            r |= rng_r.random_bool(eta_r);
        }
        counts.clicks_w += w as u64;
        counts.clicks_r += r as u64;
        counts.coincidences_wr += (w && r) as u64;
    }
    let estimate = stats::g2_cross(&counts).unwrap();
    assert!(
        (estimate.value - 1.0).abs() < 3.0 * estimate.sigma,
        "g2 = {} +- {}",
        estimate.value,
        estimate.sigma
    );
}

/// Two independent thermal beams are classical light: the Cauchy-Schwarz
/// parameter stays at or below one (within errors) for every seed.
#[test]
fn independent_thermal_beams_respect_the_classical_bound() {
    let p_mean = 0.2;
    let eta = 0.5;
    let n_trials: u64 = 400_000;
    for seed in 0..5u64 {
        let mut rng_w = ChaCha8Rng::seed_from_u64(7_000 + seed);
        let mut rng_r = ChaCha8Rng::seed_from_u64(8_000 + seed);
        let mut counts = dlcz_telecom_core::TrialCounts {
            n_trials,
            ..Default::default()
        };
        let arm = |rng: &mut ChaCha8Rng| -> (bool, bool) {
            let n = sample_pair_number(p_mean, rng).unwrap();
            let (mut a, mut b) = (false, false);
            for _ in 0..n {
                if rng.random_bool(eta) {
                    if rng.random_bool(0.5) {
                        a = true;
                    } else {
                        b = true;
                    }
                }
            }
            (a, b)
        };
        for _ in 0..n_trials {
            let (w_a, w_b) = arm(&mut rng_w);
            let (r_a, r_b) = arm(&mut rng_r);
            let w = w_a || w_b;
            let r = r_a || r_b;
            counts.clicks_w += w as u64;
            counts.clicks_r += r as u64;
            counts.coincidences_wr += (w && r) as u64;
            counts.clicks_w_split_a += w_a as u64;
            counts.clicks_w_split_b += w_b as u64;
            counts.coinc_w_ab += (w_a && w_b) as u64;
            counts.clicks_r_split_a += r_a as u64;
            counts.clicks_r_split_b += r_b as u64;
            counts.coinc_r_ab += (r_a && r_b) as u64;
        }
        let r = stats::cauchy_schwarz_r_from_counts(&counts).unwrap();
        assert!(
            r.value <= 1.0 + 3.0 * r.sigma,
            "seed {seed}: R = {} +- {}",
            r.value,
            r.sigma
        );
    }
}

/// Quadrupling the trial count halves the cross-correlation error bar.
#[test]
fn error_bars_shrink_with_root_n() {
    let mut params = reference_params();
    params.p = 0.05;
    params.eta_cw = 0.3;
    params.eta_r = 0.3;
    params.p_noise_w = 0.0;
    params.p_noise_r = 0.0;
    let deph = reference_dephasing();
    let mut ratios = Vec::new();
    for seed in 0..6 {
        let config = |n_trials, seed| SimulationConfig {
            params,
            device: dlcz_telecom_core::qfc::reference_device(),
            dephasing: deph,
            storage_time: 0.0,
            pump_power: 0.29,
            n_trials,
            seed,
            converted: false,
        };
        let small = simulate(&config(100_000, seed)).unwrap();
        let large = simulate(&config(400_000, seed)).unwrap();
        let sigma_small = stats::g2_cross(&small).unwrap().sigma;
        let sigma_large = stats::g2_cross(&large).unwrap().sigma;
        ratios.push(sigma_small / sigma_large);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!(
        (mean - 2.0).abs() / 2.0 < 0.20,
        "mean sigma ratio {mean}, ratios {ratios:?}"
    );
}

/// Noise-free simulated probabilities track the analytic model over the
/// storage sweep.
#[test]
fn simulated_probabilities_follow_the_model() {
    let mut params = reference_params();
    params.p = 0.05;
    params.eta_cw = 0.4;
    params.eta_r = 0.4;
    params.p_noise_w = 0.0;
    params.p_noise_r = 0.0;
    let deph = reference_dephasing();
    for (i, t_frac) in [0.0, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let t = t_frac * deph.tau();
        let config = SimulationConfig {
            params,
            device: dlcz_telecom_core::qfc::reference_device(),
            dephasing: deph,
            storage_time: t,
            pump_power: 0.29,
            n_trials: 500_000,
            seed: 40 + i as u64,
            converted: false,
        };
        let counts = simulate(&config).unwrap();
        let empirical = dlcz_telecom_core::sim::empirical_probabilities(&counts).unwrap();
        let model = detection_probabilities(t, &params, &deph).unwrap();
        let n = config.n_trials as f64;
        for (label, observed, expected) in [
            ("p_cw", empirical.p_cw, model.p_cw),
            ("p_r", empirical.p_r, model.p_r),
            ("p_cwr", empirical.p_cwr, model.p_cwr),
        ] {
            let sigma = (expected / n).sqrt();
            assert!(
                (observed - expected).abs() < 4.0 * sigma,
                "{label} at t/tau = {t_frac}: {observed} vs {expected} (sigma {sigma})"
            );
        }
    }
}

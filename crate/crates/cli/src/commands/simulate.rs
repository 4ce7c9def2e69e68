//! One simulation run: full tallies as a CSV row plus the derived
//! correlation estimates.

use dlcz_telecom_core::sim::simulate;
use dlcz_telecom_core::stats;

use crate::context::RunContext;
use crate::error::AppResult;
use crate::manifest::MANIFEST_FILE;
use crate::manifest::RunManifest;
use crate::output::{fmt_float, CsvTable};

pub fn run(ctx: &RunContext) -> AppResult<()> {
    let resolved = &ctx.resolved;
    let config = resolved.simulation_at(resolved.storage_time, resolved.n_trials);
    let counts = simulate(&config)?;
    if counts.clamp_events > 0 {
        eprintln!(
            "warning: {} per-trial rates were clamped into [0, 1]",
            counts.clamp_events
        );
    }

    let manifest = RunManifest::load(&ctx.path(MANIFEST_FILE))?;
    let mut table = CsvTable::new(&[
        "config_sha256",
        "seed",
        "n_trials",
        "clicks_w",
        "clicks_r",
        "coincidences_wr",
        "clicks_w_split_a",
        "clicks_w_split_b",
        "coinc_w_ab",
        "clicks_r_split_a",
        "clicks_r_split_b",
        "coinc_r_ab",
        "clamp_events",
    ]);
    table.row(vec![
        manifest.config_sha256.clone().into(),
        resolved.seed.into(),
        counts.n_trials.into(),
        counts.clicks_w.into(),
        counts.clicks_r.into(),
        counts.coincidences_wr.into(),
        counts.clicks_w_split_a.into(),
        counts.clicks_w_split_b.into(),
        counts.coinc_w_ab.into(),
        counts.clicks_r_split_a.into(),
        counts.clicks_r_split_b.into(),
        counts.coinc_r_ab.into(),
        counts.clamp_events.into(),
    ]);
    let counts_path = ctx.path("counts.csv");
    table.write(&counts_path)?;

    let mut estimates = CsvTable::new(&["label", "value", "sigma", "flagged"]);
    let mut add = |label: &str, estimate: dlcz_telecom_core::Result<stats::CorrelationEstimate>| {
        if let Ok(e) = estimate {
            estimates.row(vec![
                label.into(),
                e.value.into(),
                e.sigma.into(),
                u64::from(e.flagged).into(),
            ]);
            println!("{label} = {} +- {}", fmt_float(e.value), fmt_float(e.sigma));
        } else {
            println!("{label}: not estimable from these counts");
        }
    };
    add("g2_cross", stats::g2_cross(&counts));
    add("g2_auto_w", stats::g2_auto_write(&counts));
    add("g2_auto_r", stats::g2_auto_read(&counts));
    add("cauchy_schwarz_R", stats::cauchy_schwarz_r_from_counts(&counts));
    let estimates_path = ctx.path("estimates.csv");
    estimates.write(&estimates_path)?;

    println!(
        "wrote {} and {}",
        counts_path.display(),
        estimates_path.display()
    );
    Ok(())
}

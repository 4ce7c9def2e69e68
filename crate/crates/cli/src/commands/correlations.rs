//! Write-power sweep: modeled and simulated cross-correlations of the
//! converted write photon with the read photon, the write-photon SNR, and
//! the derived visibility and heralding-efficiency bounds.

use dlcz_telecom_core::dlcz::g2_cross_closed;
use dlcz_telecom_core::qfc::{self, compose_g2_with_noise};
use dlcz_telecom_core::sim::simulate;
use dlcz_telecom_core::stats;

use crate::context::RunContext;
use crate::error::AppResult;
use crate::output::CsvTable;

pub fn run(ctx: &RunContext) -> AppResult<()> {
    let resolved = &ctx.resolved;
    let noise = qfc::noise_probability(resolved.pump_power, &resolved.device)?.value;
    let mut table = CsvTable::new(&[
        "P_W (W)",
        "p",
        "g2_wr_model",
        "SNR",
        "g2_cwr_composed",
        "g2_cwr_sim",
        "g2_cwr_sim_sigma",
        "eta_h_max",
        "V_max",
    ]);

    for &write_power in &resolved.write_power_grid {
        let params = resolved.params.with_write_power(write_power);
        if !params.validate().is_valid() {
            eprintln!(
                "warning: skipping P_W = {write_power} W; mapped p = {} is not a probability",
                params.p
            );
            continue;
        }
        let g2_wr = g2_cross_closed(resolved.storage_time, &params, &resolved.dephasing)?;
        // Write-photon SNR: detected-signal probability over the noise floor.
        let snr = if noise > 0.0 {
            params.p * params.eta_cw / noise
        } else {
            f64::INFINITY
        };
        let composed = compose_g2_with_noise(g2_wr, snr)?;

        let mut config = resolved.simulation_at(resolved.storage_time, resolved.n_trials);
        config.params = params;
        let counts = simulate(&config)?;
        let (sim_g2, sim_sigma) = match stats::g2_cross(&counts) {
            Ok(estimate) => (estimate.value, estimate.sigma),
            Err(_) => (f64::NAN, f64::NAN),
        };

        let eta_h = stats::max_heralding_efficiency(snr)?;
        let v_max = stats::max_visibility(composed)?.value;
        table.row(vec![
            write_power.into(),
            params.p.into(),
            g2_wr.into(),
            snr.into(),
            composed.into(),
            sim_g2.into(),
            sim_sigma.into(),
            eta_h.into(),
            v_max.into(),
        ]);
    }

    let path = ctx.path("correlations.csv");
    table.write(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

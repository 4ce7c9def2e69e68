//! SNR versus mean input photon number at fixed pump power.

use dlcz_telecom_core::qfc;
use dlcz_telecom_core::stats;

use crate::context::RunContext;
use crate::error::AppResult;
use crate::output::{fmt_float, CsvTable};

pub fn run(ctx: &RunContext) -> AppResult<()> {
    let resolved = &ctx.resolved;
    let device = &resolved.device;
    let p_pump = resolved.pump_power;
    let mut table = CsvTable::new(&["mu_in", "SNR", "eta_h_max"]);
    for &mu_in in &resolved.mu_in_grid {
        let snr = qfc::snr(mu_in, p_pump, device)?;
        let eta_h = stats::max_heralding_efficiency(snr)?;
        table.row(vec![mu_in.into(), snr.into(), eta_h.into()]);
    }
    let path = ctx.path("snr_curve.csv");
    table.write(&path)?;

    println!(
        "SNR slope {} per photon at P = {} W",
        fmt_float(qfc::snr(1.0, p_pump, device)?),
        fmt_float(p_pump),
    );
    println!("wrote {}", path.display());
    Ok(())
}

//! Conversion-device characterization sweep: internal and total efficiency,
//! noise probability, and SNR versus pump power.

use dlcz_telecom_core::qfc;

use crate::context::RunContext;
use crate::error::AppResult;
use crate::output::{fmt_float, CsvTable};

pub fn run(ctx: &RunContext) -> AppResult<()> {
    let resolved = &ctx.resolved;
    let device = &resolved.device;
    let mut table = CsvTable::new(&[
        "P_pump (W)",
        "eta_int",
        "eta_dev",
        "p_N (per gate)",
        "SNR",
    ]);
    for &p_pump in &resolved.pump_power_grid {
        let eta_int = qfc::eta_internal(p_pump, device)?;
        let eta_dev = qfc::eta_device(p_pump, device)?;
        let noise = qfc::noise_probability(p_pump, device)?;
        if noise.clamped {
            eprintln!("warning: noise probability clamped at P = {p_pump} W");
        }
        let snr = qfc::snr(resolved.mu_in, p_pump, device)?;
        table.row(vec![
            p_pump.into(),
            eta_int.into(),
            eta_dev.into(),
            noise.value.into(),
            snr.into(),
        ]);
    }
    let path = ctx.path("qfc_curve.csv");
    table.write(&path)?;

    let p_opt = device.optimal_pump_power();
    println!(
        "peak internal efficiency {} at P = {} W (device efficiency {})",
        fmt_float(qfc::eta_internal(p_opt, device)?),
        fmt_float(p_opt),
        fmt_float(qfc::eta_device(p_opt, device)?),
    );
    println!("wrote {}", path.display());
    Ok(())
}

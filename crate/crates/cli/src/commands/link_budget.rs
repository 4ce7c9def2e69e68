//! Telecom link budget: loss-equivalent fiber lengths of the conversion
//! device, the direct-transmission crossover distance, and the
//! storage-time-to-fiber-length correspondence.

use dlcz_telecom_core::fixtures::{ATTENUATION_NIR_DB_KM, ATTENUATION_TELECOM_DB_KM};
use dlcz_telecom_core::qfc::{
    self, crossover_distance, equivalent_fiber_length, storage_to_fiber_length,
};

use crate::context::RunContext;
use crate::error::AppResult;
use crate::output::{fmt_float, CsvTable};

pub fn run(ctx: &RunContext) -> AppResult<()> {
    let resolved = &ctx.resolved;
    let eta_operating = qfc::eta_device(resolved.pump_power, &resolved.device)?;
    let v_group = resolved.constants.fiber_group_velocity;

    let mut report = String::new();
    report.push_str(&format!(
        "device efficiency at P = {} W: {}\n",
        fmt_float(resolved.pump_power),
        fmt_float(eta_operating)
    ));
    for eta in [eta_operating, 0.10, 0.50] {
        let km = equivalent_fiber_length(eta, ATTENUATION_TELECOM_DB_KM)?;
        report.push_str(&format!(
            "eta_dev = {}: loss equals {} km of telecom fiber per arm\n",
            fmt_float(eta),
            fmt_float(km)
        ));
    }
    let crossover = crossover_distance(
        eta_operating,
        ATTENUATION_NIR_DB_KM,
        ATTENUATION_TELECOM_DB_KM,
    )?;
    report.push_str(&format!(
        "conversion beats direct near-infrared transmission beyond {} km\n",
        fmt_float(crossover)
    ));

    let mut table = CsvTable::new(&["t (s)", "fiber_length (km)"]);
    for &t in &resolved.storage_time_grid {
        table.row(vec![t.into(), storage_to_fiber_length(t, v_group)?.into()]);
    }
    let csv_path = ctx.path("storage_vs_fiber.csv");
    table.write(&csv_path)?;

    let report_path = ctx.path("link_budget.txt");
    std::fs::write(&report_path, &report)?;
    print!("{report}");
    println!("wrote {} and {}", report_path.display(), csv_path.display());
    Ok(())
}

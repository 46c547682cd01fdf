//! How much energy the CIoT optimizations save over Service Request across
//! the default inter-arrival grid, and where the saving peaks.

use lte_iot_energy::metrics::{default_iat_grid, peak_reduction, reduction};
use lte_iot_energy::{ModelConfig, ProcedureKind};

fn main() -> lte_iot_energy::Result<()> {
    let base = ModelConfig::default();
    let sr = |iat| base.with_procedure(ProcedureKind::ServiceRequest).with_iat(iat);

    println!("{:>14} {:>10} {:>10}", "IAT (ms)", "CP saves", "UP saves");
    for iat in default_iat_grid() {
        let cp = reduction(&base.with_procedure(ProcedureKind::ControlPlane).with_iat(iat)?, &sr(iat)?)?;
        let up = reduction(&base.with_procedure(ProcedureKind::UserPlane).with_iat(iat)?, &sr(iat)?)?;
        println!("{iat:>14.0} {:>9.1}% {:>9.1}%", cp * 100.0, up * 100.0);
    }

    let (iat, r) = peak_reduction(
        &base,
        &default_iat_grid(),
        ProcedureKind::ControlPlane,
        ProcedureKind::ServiceRequest,
    )?;
    println!("\nlargest CP saving: {:.1}% at IAT {:.0} s", r * 100.0, iat / 1e3);
    Ok(())
}

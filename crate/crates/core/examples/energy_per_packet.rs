//! Energy per packet for each procedure at a single traffic load, split by
//! operation mode.
//!
//! ```bash
//! cargo run --example energy_per_packet -- 3600000
//! ```

use lte_iot_energy::{Analysis, ModeFilter, ModelConfig, ProcedureKind};

fn main() -> lte_iot_energy::Result<()> {
    let iat: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("IAT in ms"))
        .unwrap_or(3_600_000.0);

    println!("IAT = {iat} ms");
    println!("{:<4} {:>14} {:>12} {:>14} {:>12}", "", "E_p (uJ)", "off", "communication", "inactive");
    for p in ProcedureKind::ALL {
        let a = Analysis::new(&ModelConfig::default().with_procedure(p).with_iat(iat)?)?;
        println!(
            "{:<4} {:>14.2} {:>12.2} {:>14.2} {:>12.2}",
            p.short_name(),
            a.energy_per_packet(ModeFilter::ALL)?,
            a.energy_per_packet(ModeFilter::OFF)?,
            a.energy_per_packet(ModeFilter::COMMUNICATION)?,
            a.energy_per_packet(ModeFilter::INACTIVE)?,
        );
    }
    Ok(())
}

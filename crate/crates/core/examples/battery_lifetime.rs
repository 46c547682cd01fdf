//! Battery lifetime of a 5 Wh device for each procedure, with both drain
//! models, next to the always-asleep bound.

use lte_iot_energy::metrics::{default_iat_grid, lifetime_years_at};
use lte_iot_energy::{Analysis, LifetimeModel, ModelConfig, ProcedureKind};

fn main() -> lte_iot_energy::Result<()> {
    let base = ModelConfig::default();
    println!(
        "always in PSM: {:.2} years",
        lifetime_years_at(base.battery_wh, base.power.p_s)
    );

    println!("{:>14} {:>9} {:>9} {:>9}   (years, time-average power)", "IAT (ms)", "SR", "CP", "UP");
    for iat in default_iat_grid().into_iter().step_by(3) {
        let years = ProcedureKind::ALL.map(|p| {
            Analysis::new(&base.with_procedure(p).with_iat(iat)?)?
                .lifetime_years(LifetimeModel::RenewalReward)
        });
        let [sr, cp, up] = years;
        println!("{iat:>14.0} {:>9.3} {:>9.3} {:>9.3}", sr?, cp?, up?);
    }

    // E_p times the arrival rate ignores the energy of dropped attempts
    let cfg = base.with_iat(3.6e6)?.with_failure(0.3, 0.0)?;
    let a = Analysis::new(&cfg)?;
    println!(
        "\nIAT 1 h, p_out 0.3: {:.3} years (renewal) vs {:.3} years (per packet)",
        a.lifetime_years(LifetimeModel::RenewalReward)?,
        a.lifetime_years(LifetimeModel::PerPacket)?
    );
    Ok(())
}

//! Simulates the chain and checks the analytic occupancies and energy per
//! packet against it, then shows that a perturbed energy table is caught.

use lte_iot_energy::sim::{compare_with_analytic, compare_with_profile, SimConfig};
use lte_iot_energy::{EnergyDurationProfile, ModelConfig, StateId};

fn main() -> lte_iot_energy::Result<()> {
    let cfg = ModelConfig::default().with_iat(1e4)?;
    let sim = SimConfig::new(cfg, 1_000_000, 7);

    let report = compare_with_analytic(&sim)?;
    let ep = report.energy_per_packet.as_ref().expect("traffic is on");
    println!("generator: {}, seed {}, {} steps", report.generator, report.seed, report.steps);
    println!(
        "E_p: simulated {:.1} +/- {:.1} uJ, analytic {:.1} uJ (z = {:.2})",
        ep.simulated, ep.std_error, ep.analytic, ep.z
    );
    println!("largest state |z| = {:.2}, passed = {}", report.max_abs_state_z, report.passed);

    let skewed = EnergyDurationProfile::compute(&cfg)?.with_scaled_energy(StateId::Inactive, 1.1);
    let bad = compare_with_profile(&sim, skewed)?;
    println!("with Inactive energy +10%: passed = {}, flagged {:?}", bad.passed, bad.flagged);
    Ok(())
}

//! Uplink transmit power versus distance, with and without full pathloss
//! compensation, and the resulting RA energy.

use lte_iot_energy::energy::{pathloss_db, preamble_power_mw, state_energy, tx_power_per_rbp_mw};
use lte_iot_energy::{ModelConfig, StateId};

fn main() -> lte_iot_energy::Result<()> {
    let mut cfg = ModelConfig::default();
    println!("{:>8} {:>10} {:>12} {:>12} {:>12}", "d (km)", "PL (dB)", "P_RBp (mW)", "alpha=0.8", "E_RA (uJ)");
    for d in [0.1, 0.3, 0.7, 1.0, 2.0, 5.0, 10.0] {
        cfg.radio.distance_km = d;
        let full = tx_power_per_rbp_mw(&cfg.radio, &cfg.power);
        let mut partial = cfg.radio;
        partial.alpha = 0.8;
        println!(
            "{d:>8.1} {:>10.2} {full:>12.3} {:>12.3} {:>12.2}",
            pathloss_db(&cfg.radio),
            tx_power_per_rbp_mw(&partial, &cfg.power),
            state_energy(StateId::Ra { attempt: 0 }, &cfg)?,
        );
    }

    cfg.radio.distance_km = 0.7;
    cfg.radio.ramping_step_db = 2.0;
    cfg.radio.accumulate_ramping = true;
    print!("\npreamble power with 2 dB ramping:");
    for attempt in 1..=6 {
        print!(" {:.1}", preamble_power_mw(&cfg.radio, &cfg.power, attempt));
    }
    println!(" mW");
    Ok(())
}

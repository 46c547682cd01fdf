//! Builds the transition matrix, solves it numerically and compares the
//! result with the closed-form occupancies.

use lte_iot_energy::chain::ChainParams;
use lte_iot_energy::{ModelConfig, StateId};

fn main() -> lte_iot_energy::Result<()> {
    let cfg = ModelConfig::default().with_iat(1e4)?.with_failure(0.1, 0.05)?;
    let params = ChainParams::from_config(&cfg)?;
    let tm = params.transition_matrix();
    println!("{} states, max row-sum error {:.1e}", tm.dim(), tm.stochasticity_error());

    let closed = params.closed_form();
    let numeric = params.numeric_stationary()?;
    println!("max |closed - numeric| = {:.2e}", closed.max_abs_diff(&numeric));
    println!("balance residual of the numeric solve = {:.2e}", numeric.residual(&tm));

    for s in [
        StateId::Off,
        StateId::Ra { attempt: 0 },
        StateId::Backoff { retry: 1, slot: 5 },
        StateId::Connect,
        StateId::Active,
        StateId::LongCycle { cycle: 0 },
        StateId::Tx,
        StateId::Inactive,
        StateId::Drop,
    ] {
        println!("{:<14} {:.6e}  {:.6e}", s.to_string(), closed.get(s), numeric.get(s));
    }
    Ok(())
}

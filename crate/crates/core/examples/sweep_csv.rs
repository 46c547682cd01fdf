//! Writes the full procedure x IAT x outage sweep as CSV, ready for any
//! plotting tool.
//!
//! ```bash
//! cargo run --example sweep_csv > sweep.csv
//! ```

use std::io;

use lte_iot_energy::metrics::sweep;
use lte_iot_energy::{ModelConfig, SweepSpec};

fn main() -> lte_iot_energy::Result<()> {
    let result = sweep(&ModelConfig::default(), &SweepSpec::default())?;
    result.write_csv(io::stdout().lock())?;
    for f in result.failures() {
        eprintln!("skipped {} at {} ms: {}", f.procedure, f.iat_ms, f.error);
    }
    Ok(())
}

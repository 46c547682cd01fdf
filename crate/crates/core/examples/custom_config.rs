//! Loads a JSON configuration (only the keys that differ from the defaults
//! need to be present) and prints the full metrics report.

use lte_iot_energy::{Analysis, ModelConfig};

fn main() -> lte_iot_energy::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ModelConfig::from_json_file(path)?,
        None => ModelConfig::from_json_str(
            r#"{ "procedure": "up", "iat_ms": 600000, "t_i": 5000, "p_c": 0.05, "b_data": 150, "b_comp_cp": 180, "b_data_cp": 170 }"#,
        )?,
    };
    let report = Analysis::new(&cfg)?.report()?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

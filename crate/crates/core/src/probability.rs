//! Scalar probability and count primitives of the transmission model.
//!
//! Every "probability of an arrival within a window" is `1 - exp(-lambda * w)`,
//! evaluated with `expm1` so that it stays accurate when `lambda * w` is tiny.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::config::{TimerConfig, TrafficModel};
use crate::error::{Error, Result};

/// Probability of at least one Poisson arrival of rate `lambda` (per ms)
/// within `window_ms`.
pub fn arrival_within(lambda: f64, window_ms: f64) -> f64 {
    -(-lambda * window_ms).exp_m1()
}

/// Complement of [`arrival_within`], computed directly.
pub fn no_arrival_within(lambda: f64, window_ms: f64) -> f64 {
    (-lambda * window_ms).exp()
}

/// Probability of uplink traffic in one subframe.
pub fn p_on(traffic: &TrafficModel) -> f64 {
    arrival_within(traffic.lambda_app(), 1.0)
}

/// Probability of a new packet before the inactivity timer expires.
pub fn p_tx(traffic: &TrafficModel, timers: &TimerConfig) -> f64 {
    arrival_within(traffic.lambda_app(), timers.t_i as f64)
}

/// Probability of a new packet before the DRX inactivity timer expires.
pub fn p_a(traffic: &TrafficModel, timers: &TimerConfig) -> f64 {
    arrival_within(traffic.lambda_app(), timers.t_drxi as f64)
}

/// Probability of a new packet within one long DRX cycle.
pub fn p_lc(traffic: &TrafficModel, timers: &TimerConfig) -> f64 {
    arrival_within(traffic.lambda_app(), timers.long_cycle_ms() as f64)
}

/// Outage probability of a connection attempt.
pub fn outage(p_c: f64, p_e: f64) -> f64 {
    1.0 - (1.0 - p_e) * (1.0 - p_c)
}

/// How an outage probability is attributed to RA collisions and
/// connection-request errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutageSplit {
    #[default]
    AllCollision,
    AllError,
    Symmetric,
}

impl std::str::FromStr for OutageSplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_collision" | "collision" => Ok(OutageSplit::AllCollision),
            "all_error" | "error" => Ok(OutageSplit::AllError),
            "symmetric" => Ok(OutageSplit::Symmetric),
            other => Err(Error::InvalidArgument(format!(
                "unknown outage split `{other}`"
            ))),
        }
    }
}

/// Splits `p_out` into `(p_c, p_e)` such that `outage(p_c, p_e) == p_out`.
pub fn split_outage(p_out: f64, policy: OutageSplit) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&p_out) {
        return Err(Error::InvalidArgument(format!(
            "outage probability must lie in [0, 1), got {p_out}"
        )));
    }
    Ok(match policy {
        OutageSplit::AllCollision => (p_out, 0.0),
        OutageSplit::AllError => (0.0, p_out),
        OutageSplit::Symmetric => {
            // 1 - sqrt(1 - p_out)
            let p = -(0.5 * (-p_out).ln_1p()).exp_m1();
            (p, p)
        }
    })
}

/// Number of complete long DRX cycles that fit between the DRX inactivity
/// timer and the inactivity timer. Negative counts clamp to zero.
pub fn n_long_cycles(timers: &TimerConfig) -> Result<u32> {
    let cycle = timers.long_cycle_ms() as i64;
    if cycle == 0 {
        return Err(Error::InvalidArgument(
            "t_lc + t_ond must be > 0".to_string(),
        ));
    }
    let span = timers.t_i as i64 - timers.t_drxi as i64;
    let n = span.div_euclid(cycle);
    if n < 0 {
        warn!(
            "t_i ({}) < t_drxi ({}): no long DRX cycles, clamping N_c to 0",
            timers.t_i, timers.t_drxi
        );
        return Ok(0);
    }
    Ok(n as u32)
}

/// Time left after the DRX inactivity period and the long cycles, before the
/// inactivity timer fires.
pub fn t_spare(timers: &TimerConfig) -> Result<u32> {
    let n_c = n_long_cycles(timers)? as i64;
    let used = timers.t_drxi as i64 + n_c * timers.long_cycle_ms() as i64;
    Ok((timers.t_i as i64 - used).max(0) as u32)
}

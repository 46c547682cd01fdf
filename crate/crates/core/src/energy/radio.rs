//! Uplink power control for PUSCH and PRACH.

use serde::{Deserialize, Serialize};

use crate::config::{check_pos, PowerLevels};
use crate::error::{Error, Result};

/// Link geometry and power-control parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioLinkConfig {
    pub distance_km: f64,
    /// Open-loop PUSCH target (dBm).
    pub p0_pusch_dbm: f64,
    /// Fractional pathloss compensation.
    pub alpha: f64,
    pub delta_tf_db: f64,
    /// Closed-loop correction (dB).
    pub f_c_db: f64,
    pub preamble_initial_rtp_dbm: f64,
    pub delta_pre_db: f64,
    pub ramping_step_db: f64,
    /// When set, RA attempt `i` transmits its preamble `i * ramping_step_db`
    /// above the first attempt.
    pub accumulate_ramping: bool,
    pub pathloss_intercept_db: f64,
    /// Pathloss slope in dB per decade of distance.
    pub pathloss_slope: f64,
    /// Overrides the computed per-RB-pair transmit power (mW).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rbp_mw: Option<f64>,
    /// Overrides the computed preamble power (mW).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_pre_mw: Option<f64>,
}

impl Default for RadioLinkConfig {
    fn default() -> Self {
        Self {
            distance_km: 0.7,
            p0_pusch_dbm: -100.0,
            alpha: 1.0,
            delta_tf_db: 0.0,
            f_c_db: 0.0,
            preamble_initial_rtp_dbm: -100.0,
            delta_pre_db: 0.0,
            ramping_step_db: 0.0,
            accumulate_ramping: false,
            pathloss_intercept_db: 120.9,
            pathloss_slope: 37.6,
            p_rbp_mw: None,
            p_pre_mw: None,
        }
    }
}

impl RadioLinkConfig {
    pub fn validate(&self) -> Result<()> {
        check_pos("distance_km", self.distance_km)?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid_config(
                "alpha",
                format!("must lie in [0, 1], got {}", self.alpha),
            ));
        }
        for (key, v) in [
            ("p0_pusch_dbm", self.p0_pusch_dbm),
            ("delta_tf_db", self.delta_tf_db),
            ("f_c_db", self.f_c_db),
            ("preamble_initial_rtp_dbm", self.preamble_initial_rtp_dbm),
            ("delta_pre_db", self.delta_pre_db),
            ("ramping_step_db", self.ramping_step_db),
            ("pathloss_intercept_db", self.pathloss_intercept_db),
            ("pathloss_slope", self.pathloss_slope),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid_config(key, "must be finite"));
            }
        }
        if let Some(p) = self.p_rbp_mw {
            check_pos("p_rbp_mw", p)?;
        }
        if let Some(p) = self.p_pre_mw {
            check_pos("p_pre_mw", p)?;
        }
        Ok(())
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Log-distance pathloss in dB.
pub fn pathloss_db(radio: &RadioLinkConfig) -> f64 {
    radio.pathloss_intercept_db + radio.pathloss_slope * radio.distance_km.log10()
}

/// PUSCH transmit power for a single RB pair, in mW, capped at `p_tx_max`.
/// Returns the configured override when one is set.
pub fn tx_power_per_rbp_mw(radio: &RadioLinkConfig, power: &PowerLevels) -> f64 {
    if let Some(p) = radio.p_rbp_mw {
        return p;
    }
    // 10 log10(M) vanishes for M = 1
    let target = radio.p0_pusch_dbm
        + radio.alpha * pathloss_db(radio)
        + radio.delta_tf_db
        + radio.f_c_db;
    dbm_to_mw(target.min(mw_to_dbm(power.p_tx_max)))
}

/// Preamble transmit power of RA attempt `attempt` (1-based), in mW.
pub fn preamble_power_mw(radio: &RadioLinkConfig, power: &PowerLevels, attempt: u32) -> f64 {
    if let Some(p) = radio.p_pre_mw {
        return p;
    }
    let ramp = radio.ramping_step_db * attempt.saturating_sub(1) as f64;
    let target =
        radio.preamble_initial_rtp_dbm + radio.delta_pre_db + ramp + pathloss_db(radio);
    dbm_to_mw(target.min(mw_to_dbm(power.p_tx_max)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close_rel(a: f64, b: f64, rel: f64) {
        assert!(((a - b) / b).abs() <= rel, "{a} vs {b}");
    }

    #[test]
    fn pathloss_values() {
        let mut r = RadioLinkConfig::default();
        r.distance_km = 1.0;
        assert!((pathloss_db(&r) - 120.9).abs() < 1e-12);
        r.distance_km = 0.7;
        assert!((pathloss_db(&r) - 115.076).abs() < 5e-4);
        r.distance_km = 10.0;
        assert!((pathloss_db(&r) - 158.5).abs() < 1e-12);
    }

    #[test]
    fn reference_tx_power() {
        let p = tx_power_per_rbp_mw(&RadioLinkConfig::default(), &PowerLevels::default());
        close_rel(p, 32.18, 5e-4);
        let pre = preamble_power_mw(&RadioLinkConfig::default(), &PowerLevels::default(), 1);
        close_rel(pre, 32.18, 5e-4);
    }

    #[test]
    fn no_pathloss_compensation() {
        let r = RadioLinkConfig {
            alpha: 0.0,
            ..Default::default()
        };
        close_rel(tx_power_per_rbp_mw(&r, &PowerLevels::default()), 1e-10, 1e-12);
    }

    #[test]
    fn clamp_at_max_power() {
        let r = RadioLinkConfig {
            distance_km: 10.0,
            ..Default::default()
        };
        close_rel(tx_power_per_rbp_mw(&r, &PowerLevels::default()), 200.0, 1e-12);
        assert!(preamble_power_mw(&r, &PowerLevels::default(), 1) <= 200.0 * (1.0 + 1e-12));
    }

    #[test]
    fn preamble_ramping() {
        let r = RadioLinkConfig {
            ramping_step_db: 2.0,
            ..Default::default()
        };
        let p = PowerLevels::default();
        let base = preamble_power_mw(&r, &p, 1);
        let fourth = preamble_power_mw(&r, &p, 4);
        close_rel(fourth, dbm_to_mw(mw_to_dbm(base) + 6.0), 1e-12);
        close_rel(fourth, 128.1, 1e-3);
        let mut prev = 0.0;
        for a in 1..=12 {
            let q = preamble_power_mw(&r, &p, a);
            assert!(q >= prev && q <= 200.0 * (1.0 + 1e-12));
            prev = q;
        }
    }

    #[test]
    fn overrides_win() {
        let r = RadioLinkConfig {
            p_rbp_mw: Some(50.0),
            p_pre_mw: Some(60.0),
            ..Default::default()
        };
        assert_eq!(tx_power_per_rbp_mw(&r, &PowerLevels::default()), 50.0);
        assert_eq!(preamble_power_mw(&r, &PowerLevels::default(), 3), 60.0);
    }
}

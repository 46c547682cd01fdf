//! Per-state energy consumption and duration, including uplink power control
//! and the expected-wait sums of the DRX states.

mod profile;
mod radio;

pub use profile::{
    expected_wait, rb_pairs, state_duration, state_energy, tx_subframes, EnergyDurationProfile,
    WaitExpectation,
};
pub use radio::{
    dbm_to_mw, mw_to_dbm, pathloss_db, preamble_power_mw, tx_power_per_rbp_mw, RadioLinkConfig,
};

pub(crate) use profile::expected_wait_rate;

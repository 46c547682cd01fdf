//! Per-state energy and duration.
//!
//! Units are mW for power and ms for time, so energies come out in µJ.

use std::io::Write;

use serde::Serialize;

use super::radio::{preamble_power_mw, tx_power_per_rbp_mw};
use crate::chain::{StateId, StateSpace};
use crate::config::{ModelConfig, ProcedureKind, TrafficModel};
use crate::error::Result;
use crate::probability;

/// Number of RB pairs needed to carry `bytes`.
pub fn rb_pairs(bytes: u32, b_rbp: u32) -> u32 {
    assert!(b_rbp > 0, "b_rbp must be > 0");
    bytes.div_ceil(b_rbp)
}

/// Subframes needed to send `n_rbp` RB pairs with at most `threshold` per
/// subframe.
pub fn tx_subframes(n_rbp: u32, threshold: u32) -> u32 {
    n_rbp.div_ceil(threshold)
}

/// Waiting time for the first arrival in a window of subframes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaitExpectation {
    /// Expected subframes elapsed until the first arrival, or the whole
    /// window when none arrives before its last subframe.
    pub expected_elapsed_ms: f64,
    /// Probability of no arrival in the first `window - 1` subframes.
    pub p_no_arrival: f64,
    /// Contribution of arrivals strictly before the last subframe,
    /// `sum_{l < window} l P(first arrival at l)`.
    pub(crate) early_part: f64,
}

/// Expected elapsed time `sum_{l=1}^{W-1} l e^{-λ(l-1)}(1-e^{-λ}) +
/// W e^{-λ(W-1)}` for a window of `W` subframes.
pub fn expected_wait(window_ms: u32, traffic: &TrafficModel) -> WaitExpectation {
    expected_wait_rate(window_ms, traffic.lambda_app())
}

pub(crate) fn expected_wait_rate(window_ms: u32, lambda: f64) -> WaitExpectation {
    if window_ms == 0 {
        return WaitExpectation {
            expected_elapsed_ms: 0.0,
            p_no_arrival: 1.0,
            early_part: 0.0,
        };
    }
    let hit = -(-lambda).exp_m1();
    let early_part: f64 = (1..window_ms)
        .map(|l| (-lambda * (l - 1) as f64).exp() * hit * l as f64)
        .sum();
    let tail = (-lambda * (window_ms - 1) as f64).exp();
    WaitExpectation {
        expected_elapsed_ms: early_part + tail * window_ms as f64,
        p_no_arrival: tail,
        early_part,
    }
}

/// Derived quantities shared by every state's energy and duration.
#[derive(Debug, Clone, Copy)]
struct EnergyModel<'a> {
    cfg: &'a ModelConfig,
    p_rbp: f64,
    n_c: u32,
    t_spare: u32,
    active_wait: WaitExpectation,
    lc_wait: WaitExpectation,
}

impl<'a> EnergyModel<'a> {
    fn new(cfg: &'a ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let lambda = cfg.traffic.lambda_app();
        Ok(Self {
            cfg,
            p_rbp: tx_power_per_rbp_mw(&cfg.radio, &cfg.power),
            n_c: probability::n_long_cycles(&cfg.timers)?,
            t_spare: probability::t_spare(&cfg.timers)?,
            active_wait: expected_wait_rate(cfg.timers.t_drxi, lambda),
            lc_wait: expected_wait_rate(cfg.timers.long_cycle_ms(), lambda),
        })
    }

    fn rbp(&self, bytes: u32) -> u32 {
        rb_pairs(bytes, self.cfg.sizes.b_rbp)
    }

    fn preamble_mw(&self, attempt: u32) -> f64 {
        let radio = &self.cfg.radio;
        let nth = if radio.accumulate_ramping { attempt + 1 } else { 1 };
        preamble_power_mw(radio, &self.cfg.power, nth)
    }

    /// Energy of one uplink message. Each subframe carries at most the
    /// fragmentation threshold of RB pairs and is capped at `p_tx_max`.
    fn message_energy(&self, bytes: u32) -> f64 {
        let threshold = self.cfg.access.frag_threshold_rbp;
        let mut left = self.rbp(bytes);
        let mut energy = 0.0;
        while left > 0 {
            let now = left.min(threshold);
            energy += (now as f64 * self.p_rbp).min(self.cfg.power.p_tx_max);
            left -= now;
        }
        energy
    }

    fn message_subframes(&self, bytes: u32) -> u32 {
        tx_subframes(self.rbp(bytes), self.cfg.access.frag_threshold_rbp)
    }

    fn cr_messages(&self) -> Vec<u32> {
        let s = &self.cfg.sizes;
        match self.cfg.procedure {
            ProcedureKind::ServiceRequest => vec![s.b_req, s.b_comp, s.b_s_comp, s.b_r_ul],
            ProcedureKind::ControlPlane => vec![s.b_req, s.b_comp_cp],
            ProcedureKind::UserPlane => vec![s.b_req, s.b_comp],
        }
    }

    fn connect_messages(&self) -> Vec<u32> {
        match self.cfg.procedure {
            ProcedureKind::ControlPlane => vec![],
            _ => vec![self.cfg.sizes.b_data],
        }
    }

    fn tx_message(&self) -> u32 {
        match self.cfg.procedure {
            ProcedureKind::ControlPlane => self.cfg.sizes.b_data_cp,
            _ => self.cfg.sizes.b_data,
        }
    }

    fn energy(&self, state: StateId) -> f64 {
        let c = self.cfg;
        let p = &c.power;
        let t = &c.timers;
        match state.canonical() {
            StateId::Off => p.p_s,
            StateId::Ra { attempt } => {
                t.t_pre * p.p_i + t.t_ra_rx * p.p_rx + self.preamble_mw(attempt)
            }
            StateId::Backoff { .. } => p.p_i,
            StateId::ConnectionRequest { .. } => {
                c.procedure.t_cr_rx_ms() * p.p_rx
                    + self
                        .cr_messages()
                        .into_iter()
                        .map(|b| self.message_energy(b))
                        .sum::<f64>()
            }
            StateId::Connect => self
                .connect_messages()
                .into_iter()
                .map(|b| self.message_energy(b))
                .sum(),
            StateId::Active => self.active_wait.expected_elapsed_ms * p.p_rx,
            StateId::LongCycle { .. } => {
                self.lc_wait.early_part * p.p_i
                    + self.lc_wait.p_no_arrival * (t.t_lc as f64 * p.p_i + t.t_ond as f64 * p.p_rx)
            }
            StateId::Tx => self.message_energy(self.tx_message()),
            StateId::Inactive => match c.procedure {
                ProcedureKind::ControlPlane => t.t_wait as f64 * p.p_rx,
                _ => {
                    let n_c = self.n_c as f64;
                    (t.t_drxi as f64 + n_c * t.t_ond as f64) * p.p_rx
                        + (n_c * t.t_lc as f64 + self.t_spare as f64) * p.p_i
                }
            },
            StateId::Drop => 0.0,
        }
    }

    fn duration(&self, state: StateId) -> f64 {
        let c = self.cfg;
        let t = &c.timers;
        match state.canonical() {
            StateId::Off | StateId::Backoff { .. } => 1.0,
            StateId::Ra { .. } => t.t_pre + 1.0 + t.t_ra_rx,
            StateId::ConnectionRequest { .. } => {
                c.procedure.t_cr_rx_ms()
                    + self
                        .cr_messages()
                        .into_iter()
                        .map(|b| self.message_subframes(b) as f64)
                        .sum::<f64>()
            }
            StateId::Connect => self
                .connect_messages()
                .into_iter()
                .map(|b| self.message_subframes(b) as f64)
                .sum(),
            StateId::Active => self.active_wait.expected_elapsed_ms,
            StateId::LongCycle { .. } => self.lc_wait.expected_elapsed_ms,
            StateId::Tx => self.message_subframes(self.tx_message()) as f64,
            StateId::Inactive => match c.procedure {
                ProcedureKind::ControlPlane => t.t_wait as f64,
                _ => t.t_i as f64,
            },
            StateId::Drop => 0.0,
        }
    }
}

/// Average energy (µJ) spent in one visit to `state`.
pub fn state_energy(state: StateId, cfg: &ModelConfig) -> Result<f64> {
    Ok(EnergyModel::new(cfg)?.energy(state))
}

/// Expected duration (ms) of one visit to `state`.
pub fn state_duration(state: StateId, cfg: &ModelConfig) -> Result<f64> {
    Ok(EnergyModel::new(cfg)?.duration(state))
}

/// Energy and duration of every chain state for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyDurationProfile {
    #[serde(skip)]
    space: StateSpace,
    pub procedure: ProcedureKind,
    pub p_rbp_mw: f64,
    pub p_pre_mw: f64,
    energy_uj: Vec<f64>,
    duration_ms: Vec<f64>,
}

impl EnergyDurationProfile {
    pub fn compute(cfg: &ModelConfig) -> Result<Self> {
        let model = EnergyModel::new(cfg)?;
        let space = StateSpace::new(cfg.access.m, cfg.access.w_c, model.n_c);
        let energy_uj = space.states().map(|s| model.energy(s)).collect();
        let duration_ms = space.states().map(|s| model.duration(s)).collect();
        Ok(Self {
            space,
            procedure: cfg.procedure,
            p_rbp_mw: model.p_rbp,
            p_pre_mw: model.preamble_mw(0),
            energy_uj,
            duration_ms,
        })
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn energy_uj(&self) -> &[f64] {
        &self.energy_uj
    }

    pub fn duration_ms(&self) -> &[f64] {
        &self.duration_ms
    }

    pub fn energy(&self, state: StateId) -> f64 {
        self.space.index_of(state).map_or(0.0, |i| self.energy_uj[i])
    }

    pub fn duration(&self, state: StateId) -> f64 {
        self.space.index_of(state).map_or(0.0, |i| self.duration_ms[i])
    }

    /// Scales the energy of one state; used to check that validation
    /// notices a wrong energy table.
    pub fn with_scaled_energy(mut self, state: StateId, factor: f64) -> Self {
        if let Some(i) = self.space.index_of(state) {
            self.energy_uj[i] *= factor;
        }
        self
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        use crate::metrics::format_sig9;
        writeln!(out, "state,energy_uj,duration_ms")?;
        for (i, s) in self.space.states().enumerate() {
            writeln!(
                out,
                "{s},{},{}",
                format_sig9(self.energy_uj[i]),
                format_sig9(self.duration_ms[i])
            )?;
        }
        Ok(())
    }
}

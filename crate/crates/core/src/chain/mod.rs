//! The device Markov chain and its stationary distribution.
//!
//! Two independent routes to the stationary distribution are provided: the
//! closed-form product solution ([`closed_form_distribution`]) and a generic
//! numeric solve of the transition matrix ([`solve_stationary`]). They must
//! agree to round-off on every valid configuration.

mod matrix;
mod state;
mod stationary;

pub use matrix::{build_transition_matrix, TransitionMatrix};
pub use state::{OperationMode, StateId, StateSpace};
pub use stationary::{
    closed_form_distribution, long_cycle_mass, n_p, solve_stationary, StationaryDistribution,
};

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::probability::{self, arrival_within, no_arrival_within};

/// Transition probabilities and dimensions of the chain.
///
/// Each probability is stored with its complement, both evaluated directly
/// from the arrival rate, so that `1 - p` never has to be formed when `p` is
/// within round-off of one (e.g. `p_tx` at sub-second inter-arrival times).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub p_on: f64,
    pub q_on: f64,
    pub p_tx: f64,
    pub q_tx: f64,
    pub p_a: f64,
    pub q_a: f64,
    pub p_lc: f64,
    pub q_lc: f64,
    pub p_c: f64,
    pub p_e: f64,
    pub m: u32,
    pub w_c: u32,
    pub n_c: u32,
}

impl ChainParams {
    pub fn from_config(cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let lambda = cfg.traffic.lambda_app();
        let t = &cfg.timers;
        let window = |w: f64| (arrival_within(lambda, w), no_arrival_within(lambda, w));
        let (p_on, q_on) = window(1.0);
        let (p_tx, q_tx) = window(t.t_i as f64);
        let (p_a, q_a) = window(t.t_drxi as f64);
        let (p_lc, q_lc) = window(t.long_cycle_ms() as f64);
        Ok(Self {
            p_on,
            q_on,
            p_tx,
            q_tx,
            p_a,
            q_a,
            p_lc,
            q_lc,
            p_c: cfg.access.p_c,
            p_e: cfg.access.p_e,
            m: cfg.access.m,
            w_c: cfg.access.w_c,
            n_c: probability::n_long_cycles(t)?,
        })
    }

    /// Builds parameters from raw probabilities; complements are `1 - p`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_probabilities(
        p_on: f64,
        p_tx: f64,
        p_a: f64,
        p_lc: f64,
        p_c: f64,
        p_e: f64,
        m: u32,
        w_c: u32,
        n_c: u32,
    ) -> Result<Self> {
        for (name, p) in [("p_on", p_on), ("p_tx", p_tx), ("p_a", p_a), ("p_lc", p_lc)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        for (name, p) in [("p_c", p_c), ("p_e", p_e)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1), got {p}")));
            }
        }
        if w_c == 0 {
            return Err(Error::InvalidArgument("w_c must be >= 1".into()));
        }
        Ok(Self {
            p_on,
            q_on: 1.0 - p_on,
            p_tx,
            q_tx: 1.0 - p_tx,
            p_a,
            q_a: 1.0 - p_a,
            p_lc,
            q_lc: 1.0 - p_lc,
            p_c,
            p_e,
            m,
            w_c,
            n_c,
        })
    }

    pub fn space(&self) -> StateSpace {
        StateSpace::new(self.m, self.w_c, self.n_c)
    }

    /// Probability that one attempt fails (collision or request error).
    pub fn attempt_failure(&self) -> f64 {
        self.p_e * (1.0 - self.p_c) + self.p_c
    }

    /// Probability that one attempt succeeds, `(1 - p_c)(1 - p_e)`.
    pub fn attempt_success(&self) -> f64 {
        (1.0 - self.p_c) * (1.0 - self.p_e)
    }
}

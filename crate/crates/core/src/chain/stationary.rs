use std::io::Write;

use serde::Serialize;

use super::{ChainParams, StateId, StateSpace, TransitionMatrix};
use crate::config::ModelConfig;
use crate::error::{Error, Result};

/// Steady-state probability of every chain state.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    space: StateSpace,
    probs: Vec<f64>,
}

impl StationaryDistribution {
    pub fn new(space: StateSpace, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} probabilities, got {}",
                space.len(),
                probs.len()
            )));
        }
        Ok(Self { space, probs })
    }

    /// Everything in Off: the chain without traffic.
    pub fn all_off(space: StateSpace) -> Self {
        let mut probs = vec![0.0; space.len()];
        probs[space.off()] = 1.0;
        Self { space, probs }
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of `state`; zero for states outside the space.
    pub fn get(&self, state: StateId) -> f64 {
        self.space
            .index_of(state)
            .map_or(0.0, |i| self.probs[i])
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, f64)> + '_ {
        self.space.states().zip(self.probs.iter().copied())
    }

    pub fn max_abs_diff(&self, other: &StationaryDistribution) -> f64 {
        assert_eq!(self.space, other.space, "distributions over different spaces");
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `max_j |(pi P)_j - pi_j|`.
    pub fn residual(&self, tm: &TransitionMatrix) -> f64 {
        let n = self.probs.len();
        let mut next = vec![0.0; n];
        for (i, pi) in self.probs.iter().enumerate() {
            if *pi == 0.0 {
                continue;
            }
            for (j, p) in tm.row(i).iter().enumerate() {
                next[j] += pi * p;
            }
        }
        next.iter()
            .zip(&self.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "state,probability")?;
        for (s, p) in self.iter() {
            writeln!(out, "{s},{}", crate::metrics::format_sig9(p))?;
        }
        Ok(())
    }
}

impl Serialize for StationaryDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.probs.len()))?;
        for (s, p) in self.iter() {
            map.serialize_entry(&s.to_string(), &p)?;
        }
        map.end()
    }
}

/// `sum_{n < n_c} (1 - p_lc)^n`, i.e. `(1 - (1 - p_lc)^n_c) / p_lc`.
pub fn long_cycle_mass(p_lc: f64, n_c: u32) -> f64 {
    let n = n_c as f64;
    if p_lc < 1e-9 {
        // series in p_lc; the next term is O(n^3 p_lc^2)
        n * (1.0 - 0.5 * (n - 1.0) * p_lc)
    } else {
        -(n * (-p_lc).ln_1p()).exp_m1() / p_lc
    }
}

/// Stationary distribution from the closed-form product solution.
pub fn closed_form_distribution(cfg: &ModelConfig) -> Result<StationaryDistribution> {
    Ok(ChainParams::from_config(cfg)?.closed_form())
}

impl ChainParams {
    /// Closed-form stationary distribution.
    ///
    /// With `p_on == 0` every state but Off is unreachable. With
    /// `1 - p_tx == 0` the connected loop never releases and all mass sits in
    /// Active, LC and TX.
    pub fn closed_form(&self) -> StationaryDistribution {
        let space = self.space();
        if self.p_on == 0.0 {
            return StationaryDistribution::all_off(space);
        }
        let mut b = vec![0.0; space.len()];
        let lc_mass = long_cycle_mass(self.p_lc, self.n_c);

        if self.q_tx == 0.0 {
            let active = 1.0 / (2.0 + self.q_a * lc_mass);
            fill_connected(&mut b, &space, self, active);
            return StationaryDistribution { space, probs: b };
        }

        let s = self.attempt_failure();
        let m = self.m as i32;
        let w = self.w_c as f64;
        let s_m1 = s.powi(m + 1);
        let one_minus_s = self.attempt_success();
        let ratio = self.p_tx / self.q_tx;
        let aux = 2.0 - self.p_tx + ratio * (3.0 - self.p_tx + self.q_a * lc_mass);
        let inv = 1.0
            + self.p_on
                * (1.0
                    + s_m1
                    + (1.0 - s_m1) * (1.0 - self.p_c) / one_minus_s
                    + s * (1.0 - s.powi(m)) * (1.0 + w) / (2.0 * one_minus_s)
                    + (1.0 - s_m1) * aux);
        let b_off = 1.0 / inv;
        let b00 = self.p_on * b_off;

        b[space.off()] = b_off;
        let mut connect = 0.0;
        let mut s_i = 1.0;
        for i in 0..=self.m {
            let ra = s_i * b00;
            b[space.ra(i)] = ra;
            if i >= 1 {
                for slot in 1..self.w_c {
                    b[space.backoff(i, slot)] = (w - slot as f64) / w * ra;
                }
            }
            let cr = (1.0 - self.p_c) * ra;
            b[space.cr(i)] = cr;
            connect += (1.0 - self.p_e) * cr;
            s_i *= s;
        }
        b[space.drop_state()] = s_m1 * b00;
        b[space.connect()] = connect;

        let active = ratio * connect;
        fill_connected(&mut b, &space, self, active);
        b[space.inactive()] = self.q_tx * (b[space.tx()] + connect);
        StationaryDistribution { space, probs: b }
    }

    /// Stationary distribution from a numeric solve of the transition matrix.
    pub fn numeric_stationary(&self) -> Result<StationaryDistribution> {
        solve_stationary(&self.transition_matrix())
    }

    /// Expected packets delivered per chain step, `b_connect / (1 - p_tx)`.
    pub fn packets_per_step(&self, dist: &StationaryDistribution) -> Result<f64> {
        if self.q_tx == 0.0 {
            return Err(Error::InvalidArgument(
                "p_tx = 1: connected sessions never end".into(),
            ));
        }
        Ok(dist.get(StateId::Connect) / self.q_tx)
    }
}

fn fill_connected(b: &mut [f64], space: &StateSpace, p: &ChainParams, active: f64) {
    b[space.active()] = active;
    b[space.tx()] = active;
    let mut decay = p.q_a * active;
    for n in 0..p.n_c {
        b[space.lc(n)] = decay;
        decay *= p.q_lc;
    }
}

/// Solves `pi P = pi`, `sum(pi) = 1` by Grassmann-Taksar-Heyman elimination.
///
/// The elimination only ever adds nonnegative quantities, so it keeps full
/// relative accuracy even when the chain is nearly decomposable. A chain
/// where nothing leaves Off yields the all-Off distribution.
pub fn solve_stationary(tm: &TransitionMatrix) -> Result<StationaryDistribution> {
    let space = tm.space();
    let n = tm.dim();
    let mut a = tm.data().to_vec();
    let at = |i: usize, j: usize| i * n + j;

    let mut row_nz: Vec<usize> = Vec::with_capacity(n);
    let mut col_nz: Vec<usize> = Vec::with_capacity(n);
    for k in (1..n).rev() {
        row_nz.clear();
        col_nz.clear();
        let mut out = 0.0;
        for j in 0..k {
            let v = a[at(k, j)];
            if v != 0.0 {
                out += v;
                row_nz.push(j);
            }
        }
        if out <= 0.0 {
            return Err(Error::ReducibleChain(format!(
                "state {} cannot reach Off",
                space.state(k)
            )));
        }
        for i in 0..k {
            let v = a[at(i, k)];
            if v != 0.0 {
                a[at(i, k)] = v / out;
                col_nz.push(i);
            }
        }
        for &i in &col_nz {
            let f = a[at(i, k)];
            for &j in &row_nz {
                a[at(i, j)] += f * a[at(k, j)];
            }
        }
    }

    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for j in 1..n {
        pi[j] = (0..j).map(|i| pi[i] * a[at(i, j)]).sum();
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    StationaryDistribution::new(space, pi)
}

/// Expected packets per chain step from `b_connect` and `p_tx`:
/// one packet per connection plus a geometric number of follow-ups.
pub fn n_p(dist: &StationaryDistribution, p_tx: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p_tx) {
        return Err(Error::InvalidArgument(format!(
            "p_tx must lie in [0, 1), got {p_tx}"
        )));
    }
    Ok(dist.get(StateId::Connect) / (1.0 - p_tx))
}

use std::io::Write;

use super::{ChainParams, StateSpace};
use crate::config::ModelConfig;
use crate::error::Result;

/// Dense row-stochastic transition matrix over a [`StateSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    space: StateSpace,
    data: Vec<f64>,
}

impl TransitionMatrix {
    fn zeros(space: StateSpace) -> Self {
        let n = space.len();
        Self {
            space,
            data: vec![0.0; n * n],
        }
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.data[from * self.dim() + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let n = self.dim();
        &self.data[from * n..(from + 1) * n]
    }

    fn add(&mut self, from: usize, to: usize, p: f64) {
        let n = self.dim();
        self.data[from * n + to] += p;
    }

    pub(crate) fn data(&self) -> &[f64] {
        &self.data
    }

    /// Largest `|row sum - 1|` over all rows.
    pub fn stochasticity_error(&self) -> f64 {
        (0..self.dim())
            .map(|i| (self.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Writes the matrix as CSV: a header of state labels, then one row per
    /// source state.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "state")?;
        for s in self.space.states() {
            write!(out, ",{s}")?;
        }
        writeln!(out)?;
        for (i, s) in self.space.states().enumerate() {
            write!(out, "{s}")?;
            for p in self.row(i) {
                write!(out, ",{}", crate::metrics::format_sig9(*p))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Builds the transition matrix of the chain for `cfg`.
pub fn build_transition_matrix(cfg: &ModelConfig) -> Result<TransitionMatrix> {
    Ok(ChainParams::from_config(cfg)?.transition_matrix())
}

impl ChainParams {
    pub fn transition_matrix(&self) -> TransitionMatrix {
        let space = self.space();
        let mut tm = TransitionMatrix::zeros(space);
        let m = self.m;
        let w = self.w_c;

        // A failed attempt `i` backs off into retry `i + 1`, drawing its
        // counter uniformly from `0..w_c`; slot 0 is the retry itself.
        let fail = |tm: &mut TransitionMatrix, from: usize, attempt: u32, p: f64| {
            if p == 0.0 {
                return;
            }
            if attempt == m {
                tm.add(from, space.drop_state(), p);
            } else {
                for slot in 0..w {
                    tm.add(from, space.backoff(attempt + 1, slot), p / w as f64);
                }
            }
        };

        tm.add(space.off(), space.off(), self.q_on);
        tm.add(space.off(), space.ra(0), self.p_on);

        for i in 0..=m {
            let ra = space.ra(i);
            tm.add(ra, space.cr(i), 1.0 - self.p_c);
            fail(&mut tm, ra, i, self.p_c);

            let cr = space.cr(i);
            tm.add(cr, space.connect(), 1.0 - self.p_e);
            fail(&mut tm, cr, i, self.p_e);
        }

        for retry in 1..=m {
            for slot in 1..w {
                tm.add(space.backoff(retry, slot), space.backoff(retry, slot - 1), 1.0);
            }
        }

        for from in [space.connect(), space.tx()] {
            tm.add(from, space.active(), self.p_tx);
            tm.add(from, space.inactive(), self.q_tx);
        }

        if self.n_c == 0 {
            tm.add(space.active(), space.tx(), 1.0);
        } else {
            tm.add(space.active(), space.tx(), self.p_a);
            tm.add(space.active(), space.lc(0), self.q_a);
            for n in 0..self.n_c - 1 {
                tm.add(space.lc(n), space.tx(), self.p_lc);
                tm.add(space.lc(n), space.lc(n + 1), self.q_lc);
            }
            tm.add(space.lc(self.n_c - 1), space.tx(), 1.0);
        }

        tm.add(space.inactive(), space.off(), 1.0);
        tm.add(space.drop_state(), space.off(), 1.0);
        tm
    }
}

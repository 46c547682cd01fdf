use std::fmt;

use serde::{Serialize, Serializer};

/// The device's coarse operation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperationMode {
    /// RRC idle in PSM.
    Off,
    /// RA, connection setup and data transmission.
    Communication,
    /// RRC connected without data: DRX waiting and release.
    Inactive,
}

/// A state of the device chain.
///
/// `Backoff { retry, slot: 0 }` is the retry attempt itself and therefore the
/// same state as `Ra { attempt: retry }`; [`StateSpace`] only enumerates
/// backoff slots `1..w_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateId {
    Off,
    Ra { attempt: u32 },
    Backoff { retry: u32, slot: u32 },
    ConnectionRequest { attempt: u32 },
    Connect,
    Active,
    LongCycle { cycle: u32 },
    Tx,
    Inactive,
    Drop,
}

impl StateId {
    pub fn mode(self) -> OperationMode {
        match self {
            StateId::Off => OperationMode::Off,
            StateId::Active | StateId::LongCycle { .. } | StateId::Inactive => {
                OperationMode::Inactive
            }
            _ => OperationMode::Communication,
        }
    }

    /// Folds `Backoff { slot: 0 }` onto the RA attempt it stands for.
    pub fn canonical(self) -> StateId {
        match self {
            StateId::Backoff { retry, slot: 0 } => StateId::Ra { attempt: retry },
            s => s,
        }
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateId::Off => f.write_str("Off"),
            StateId::Ra { attempt } => write!(f, "RA({attempt})"),
            StateId::Backoff { retry, slot } => write!(f, "Backoff({retry},{slot})"),
            StateId::ConnectionRequest { attempt } => write!(f, "CR({attempt})"),
            StateId::Connect => f.write_str("Connect"),
            StateId::Active => f.write_str("Active"),
            StateId::LongCycle { cycle } => write!(f, "LC({cycle})"),
            StateId::Tx => f.write_str("TX"),
            StateId::Inactive => f.write_str("Inactive"),
            StateId::Drop => f.write_str("Drop"),
        }
    }
}

impl Serialize for StateId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Dense indexing of the chain states for given `m`, `w_c` and `N_c`.
///
/// Layout: `Off, RA(0..=m), Backoff(1..=m, 1..w_c), CR(0..=m), Connect,
/// Active, LC(0..n_c), TX, Inactive, Drop`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    m: u32,
    w_c: u32,
    n_c: u32,
}

impl StateSpace {
    pub fn new(m: u32, w_c: u32, n_c: u32) -> Self {
        assert!(w_c >= 1, "backoff window must be >= 1");
        Self { m, w_c, n_c }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn w_c(&self) -> u32 {
        self.w_c
    }

    pub fn n_c(&self) -> u32 {
        self.n_c
    }

    fn ra_base(&self) -> usize {
        1
    }

    fn backoff_base(&self) -> usize {
        self.ra_base() + self.m as usize + 1
    }

    fn cr_base(&self) -> usize {
        self.backoff_base() + self.m as usize * (self.w_c as usize - 1)
    }

    fn connect_index(&self) -> usize {
        self.cr_base() + self.m as usize + 1
    }

    fn lc_base(&self) -> usize {
        self.connect_index() + 2
    }

    pub fn len(&self) -> usize {
        self.lc_base() + self.n_c as usize + 3
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn off(&self) -> usize {
        0
    }

    pub fn ra(&self, attempt: u32) -> usize {
        debug_assert!(attempt <= self.m);
        self.ra_base() + attempt as usize
    }

    pub fn cr(&self, attempt: u32) -> usize {
        debug_assert!(attempt <= self.m);
        self.cr_base() + attempt as usize
    }

    /// Index of backoff slot `slot` of retry `retry` (`1..=m`); slot 0 is the
    /// RA attempt.
    pub fn backoff(&self, retry: u32, slot: u32) -> usize {
        debug_assert!((1..=self.m).contains(&retry) && slot < self.w_c);
        if slot == 0 {
            return self.ra(retry);
        }
        self.backoff_base()
            + (retry as usize - 1) * (self.w_c as usize - 1)
            + (slot as usize - 1)
    }

    pub fn connect(&self) -> usize {
        self.connect_index()
    }

    pub fn active(&self) -> usize {
        self.connect_index() + 1
    }

    pub fn lc(&self, cycle: u32) -> usize {
        debug_assert!(cycle < self.n_c);
        self.lc_base() + cycle as usize
    }

    pub fn tx(&self) -> usize {
        self.lc_base() + self.n_c as usize
    }

    pub fn inactive(&self) -> usize {
        self.tx() + 1
    }

    pub fn drop_state(&self) -> usize {
        self.tx() + 2
    }

    /// Index of `state`, or `None` when it lies outside this space.
    pub fn index_of(&self, state: StateId) -> Option<usize> {
        let idx = match state.canonical() {
            StateId::Off => self.off(),
            StateId::Ra { attempt } if attempt <= self.m => self.ra(attempt),
            StateId::Backoff { retry, slot }
                if (1..=self.m).contains(&retry) && slot < self.w_c =>
            {
                self.backoff(retry, slot)
            }
            StateId::ConnectionRequest { attempt } if attempt <= self.m => self.cr(attempt),
            StateId::Connect => self.connect(),
            StateId::Active => self.active(),
            StateId::LongCycle { cycle } if cycle < self.n_c => self.lc(cycle),
            StateId::Tx => self.tx(),
            StateId::Inactive => self.inactive(),
            StateId::Drop => self.drop_state(),
            _ => return None,
        };
        Some(idx)
    }

    pub fn state(&self, index: usize) -> StateId {
        assert!(index < self.len(), "state index {index} out of range");
        let m = self.m as usize;
        let slots = self.w_c as usize - 1;
        if index == 0 {
            StateId::Off
        } else if index < self.backoff_base() {
            StateId::Ra {
                attempt: (index - self.ra_base()) as u32,
            }
        } else if index < self.cr_base() {
            let off = index - self.backoff_base();
            StateId::Backoff {
                retry: (off / slots + 1) as u32,
                slot: (off % slots + 1) as u32,
            }
        } else if index < self.cr_base() + m + 1 {
            StateId::ConnectionRequest {
                attempt: (index - self.cr_base()) as u32,
            }
        } else if index == self.connect() {
            StateId::Connect
        } else if index == self.active() {
            StateId::Active
        } else if index < self.tx() {
            StateId::LongCycle {
                cycle: (index - self.lc_base()) as u32,
            }
        } else if index == self.tx() {
            StateId::Tx
        } else if index == self.inactive() {
            StateId::Inactive
        } else {
            StateId::Drop
        }
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.len()).map(|i| self.state(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_space_size() {
        // 1 + 10 + 9*19 + 10 + 1 + 1 + 116 + 1 + 1 + 1
        assert_eq!(StateSpace::new(9, 20, 116).len(), 313);
        assert_eq!(StateSpace::new(0, 1, 0).len(), 1 + 1 + 0 + 1 + 2 + 3);
    }

    #[test]
    fn index_round_trip() {
        for space in [
            StateSpace::new(9, 20, 116),
            StateSpace::new(0, 1, 0),
            StateSpace::new(3, 1, 2),
            StateSpace::new(2, 5, 0),
        ] {
            for (i, s) in space.states().enumerate() {
                assert_eq!(space.index_of(s), Some(i), "{s}");
                assert!(!matches!(s, StateId::Backoff { slot: 0, .. }));
            }
        }
    }

    #[test]
    fn backoff_slot_zero_is_the_retry() {
        let space = StateSpace::new(9, 20, 116);
        assert_eq!(
            space.index_of(StateId::Backoff { retry: 4, slot: 0 }),
            space.index_of(StateId::Ra { attempt: 4 })
        );
        assert_eq!(space.index_of(StateId::Backoff { retry: 0, slot: 3 }), None);
        assert_eq!(space.index_of(StateId::Backoff { retry: 1, slot: 20 }), None);
        assert_eq!(space.index_of(StateId::LongCycle { cycle: 116 }), None);
    }

    #[test]
    fn modes_partition_states() {
        let space = StateSpace::new(2, 4, 3);
        let mut counts = [0; 3];
        for s in space.states() {
            counts[match s.mode() {
                OperationMode::Off => 0,
                OperationMode::Communication => 1,
                OperationMode::Inactive => 2,
            }] += 1;
        }
        assert_eq!(counts[0], 1);
        assert_eq!(counts[2], 1 + 3 + 1);
        assert_eq!(counts.iter().sum::<usize>(), space.len());
    }

    #[test]
    fn labels() {
        assert_eq!(StateId::Backoff { retry: 2, slot: 7 }.to_string(), "Backoff(2,7)");
        assert_eq!(StateId::LongCycle { cycle: 0 }.to_string(), "LC(0)");
        assert_eq!(StateId::ConnectionRequest { attempt: 9 }.to_string(), "CR(9)");
    }
}

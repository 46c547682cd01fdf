//! Energy model of an LTE IoT device sending sporadic uplink packets.
//!
//! The device is described by a discrete-time Markov chain with one step per
//! subframe (1 ms). Each state carries an energy cost and a duration, which
//! turns the chain into a semi-Markov model from which the library derives
//! energy per delivered packet, average power and battery lifetime for
//! three connection procedures:
//!
//! * Service Request (`sr`), the legacy release-and-reestablish flow,
//! * Control-Plane CIoT optimization (`cp`), data piggybacked on NAS,
//! * User-Plane CIoT optimization (`up`), suspend and resume.
//!
//! ```
//! use lte_iot_energy::{Analysis, ModeFilter, ModelConfig, ProcedureKind};
//!
//! let cfg = ModelConfig::default()
//!     .with_procedure(ProcedureKind::ControlPlane)
//!     .with_iat(3_600_000.0)?;
//! let a = Analysis::new(&cfg)?;
//! let e_p = a.energy_per_packet(ModeFilter::ALL)?;
//! assert!(e_p > 0.0);
//! # Ok::<(), lte_iot_energy::Error>(())
//! ```
//!
//! A Monte Carlo walker of the same chain lives in [`sim`] and is used to
//! cross-check the analytic results.

pub mod chain;
pub mod cli;
pub mod config;
pub mod energy;
mod error;
pub mod metrics;
pub mod probability;
pub mod sim;

pub use chain::{
    build_transition_matrix, closed_form_distribution, solve_stationary, ChainParams,
    OperationMode, StateId, StateSpace, StationaryDistribution, TransitionMatrix,
};
pub use config::{
    AccessConfig, ConfigDocument, MessageSizes, ModelConfig, PowerLevels, ProcedureKind,
    TimerConfig, TrafficModel,
};
pub use energy::{EnergyDurationProfile, RadioLinkConfig};
pub use error::{Error, Result};
pub use metrics::{Analysis, LifetimeModel, MetricsReport, ModeFilter, SweepSpec};
pub use probability::OutageSplit;
pub use sim::{compare_with_analytic, simulate, SimConfig, SimEstimate, ValidationReport};

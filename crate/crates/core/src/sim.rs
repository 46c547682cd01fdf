//! Monte Carlo walk of the device chain.
//!
//! The simulator follows the chain transition by transition, but it does not
//! reuse the analytic machinery for the DRX states: on every visit to Active
//! or a long cycle it draws the first-arrival subframe from a geometric
//! distribution, routes on it and charges the energy of the time actually
//! spent. The expected-wait sums are therefore checked rather than assumed.
//!
//! An Off dwell is drawn as a single geometric variate (it is a run of
//! Bernoulli(`p_on`) self-loops) and counts as one step of the run length,
//! while its occupancy weight is the number of subframes it lasted. This
//! keeps long inter-arrival times affordable without changing the chain.
//!
//! Standard errors come from batch means over at least 30 batches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::{ChainParams, StateId, StateSpace};
use crate::config::ModelConfig;
use crate::energy::EnergyDurationProfile;
use crate::error::{Error, Result};
use crate::metrics::{Analysis, ModeFilter};

/// Name of the pseudorandom generator, recorded in every report.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

pub const MIN_BATCHES: usize = 30;
const MIN_STEPS_PER_BATCH: u64 = 10;

/// |z| above which a comparison is flagged.
pub const Z_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: ModelConfig,
    /// Chain transitions to simulate; an Off dwell counts once.
    pub steps: u64,
    pub seed: u64,
    /// Transitions discarded before statistics are collected.
    pub warmup_steps: u64,
    pub batches: usize,
    /// Forces the per-subframe arrival probability in Off.
    pub p_on_override: Option<f64>,
    /// Forces the probability of another packet before the inactivity
    /// timer expires.
    pub p_tx_override: Option<f64>,
}

impl SimConfig {
    pub fn new(model: ModelConfig, steps: u64, seed: u64) -> Self {
        Self {
            model,
            steps,
            seed,
            warmup_steps: 0,
            batches: MIN_BATCHES,
            p_on_override: None,
            p_tx_override: None,
        }
    }

    fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.batches < MIN_BATCHES {
            return Err(Error::Simulation(format!(
                "at least {MIN_BATCHES} batches are required, got {}",
                self.batches
            )));
        }
        if self.steps < self.batches as u64 * MIN_STEPS_PER_BATCH {
            return Err(Error::Simulation(format!(
                "{} steps are too few for {} batches (need >= {})",
                self.steps,
                self.batches,
                self.batches as u64 * MIN_STEPS_PER_BATCH
            )));
        }
        for (name, p) in [("p_on", self.p_on_override), ("p_tx", self.p_tx_override)] {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidArgument(format!(
                        "{name} override must lie in [0, 1], got {p}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Chain parameters with the overrides applied.
    pub fn chain_params(&self) -> Result<ChainParams> {
        let mut p = ChainParams::from_config(&self.model)?;
        if let Some(v) = self.p_on_override {
            p.p_on = v;
            p.q_on = 1.0 - v;
        }
        if let Some(v) = self.p_tx_override {
            p.p_tx = v;
            p.q_tx = 1.0 - v;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccupancyEstimate {
    pub state: StateId,
    pub fraction: f64,
    pub std_error: f64,
}

/// Output of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimEstimate {
    pub seed: u64,
    pub generator: &'static str,
    pub steps: u64,
    /// Chain steps including every Off self-loop.
    pub subframe_steps: f64,
    /// No traffic: the run never left Off.
    pub degenerate: bool,
    pub e_p_uj: Option<Estimate>,
    pub avg_power_mw: Estimate,
    /// Time spent per Active visit.
    pub active_wait_ms: Option<Estimate>,
    pub active_visits: u64,
    pub occupancy: Vec<OccupancyEstimate>,
    pub packets_delivered: u64,
    pub packets_dropped: u64,
}

impl SimEstimate {
    pub fn occupancy_of(&self, state: StateId) -> Option<&OccupancyEstimate> {
        self.occupancy.iter().find(|o| o.state == state.canonical())
    }
}

#[derive(Debug, Clone)]
struct Batch {
    visits: Vec<f64>,
    steps: f64,
    energy: f64,
    duration: f64,
    packets: f64,
    drops: f64,
    active_wait: f64,
    active_visits: f64,
}

impl Batch {
    fn new(n: usize) -> Self {
        Self {
            visits: vec![0.0; n],
            steps: 0.0,
            energy: 0.0,
            duration: 0.0,
            packets: 0.0,
            drops: 0.0,
            active_wait: 0.0,
            active_visits: 0.0,
        }
    }
}

/// Ratio-of-sums estimate with its batch-means standard error.
fn ratio_estimate(pairs: impl Iterator<Item = (f64, f64)> + Clone) -> Option<Estimate> {
    let b = pairs.clone().count() as f64;
    let (sx, sy) = pairs.clone().fold((0.0, 0.0), |(a, c), (x, y)| (a + x, c + y));
    if sy <= 0.0 {
        return None;
    }
    let r = sx / sy;
    let ss: f64 = pairs.map(|(x, y)| (x - r * y).powi(2)).sum();
    let se = (ss / (b * (b - 1.0))).sqrt() / (sy / b);
    Some(Estimate {
        mean: r,
        std_error: se,
    })
}

/// Number of Bernoulli trials up to and including the first success, where
/// `log_fail = ln(1 - p)`. Saturates at `u64::MAX` when success is
/// impossible.
fn geometric<R: Rng>(rng: &mut R, log_fail: f64) -> u64 {
    if log_fail == f64::NEG_INFINITY {
        return 1;
    }
    if log_fail >= 0.0 {
        return u64::MAX;
    }
    let v = 1.0 - rng.random::<f64>(); // (0, 1]
    let l = (v.ln() / log_fail).ceil();
    if l < 1.0 {
        1
    } else if l >= 1.8e19 {
        u64::MAX
    } else {
        l as u64
    }
}

struct Walker<'a> {
    space: StateSpace,
    params: ChainParams,
    profile: &'a EnergyDurationProfile,
    cfg: &'a ModelConfig,
    log_no_arrival: f64,
    log_stay_off: f64,
}

impl Walker<'_> {
    fn backoff_target<R: Rng>(&self, rng: &mut R, failed_attempt: u32) -> StateId {
        if failed_attempt == self.params.m {
            return StateId::Drop;
        }
        let slot = rng.random_range(0..self.params.w_c);
        StateId::Backoff {
            retry: failed_attempt + 1,
            slot,
        }
        .canonical()
    }

    fn after_packet<R: Rng>(&self, rng: &mut R) -> StateId {
        if rng.random::<f64>() < self.params.p_tx {
            StateId::Active
        } else {
            StateId::Inactive
        }
    }

    /// Visits `state`, books its statistics into `batch` and returns the
    /// next state.
    fn step<R: Rng>(&self, rng: &mut R, state: StateId, batch: &mut Batch) -> StateId {
        let idx = self.space.index_of(state).expect("walker stays inside the space");
        let power = &self.cfg.power;
        let timers = &self.cfg.timers;
        let n_c = self.params.n_c;

        let mut visits = 1.0;
        let mut energy = self.profile.energy_uj()[idx];
        let mut duration = self.profile.duration_ms()[idx];

        let next = match state {
            StateId::Off => {
                let dwell = geometric(rng, self.log_stay_off) as f64;
                visits = dwell;
                energy *= dwell;
                duration *= dwell;
                StateId::Ra { attempt: 0 }
            }
            StateId::Ra { attempt } => {
                if rng.random::<f64>() < self.params.p_c {
                    self.backoff_target(rng, attempt)
                } else {
                    StateId::ConnectionRequest { attempt }
                }
            }
            StateId::Backoff { retry, slot } => StateId::Backoff {
                retry,
                slot: slot - 1,
            }
            .canonical(),
            StateId::ConnectionRequest { attempt } => {
                if rng.random::<f64>() < self.params.p_e {
                    self.backoff_target(rng, attempt)
                } else {
                    StateId::Connect
                }
            }
            StateId::Connect | StateId::Tx => {
                batch.packets += 1.0;
                self.after_packet(rng)
            }
            StateId::Active => {
                let window = timers.t_drxi as u64;
                let arrival = geometric(rng, self.log_no_arrival);
                let elapsed = arrival.min(window) as f64;
                energy = elapsed * power.p_rx;
                duration = elapsed;
                batch.active_wait += elapsed;
                batch.active_visits += 1.0;
                if arrival <= window || n_c == 0 {
                    StateId::Tx
                } else {
                    StateId::LongCycle { cycle: 0 }
                }
            }
            StateId::LongCycle { cycle } => {
                let window = timers.long_cycle_ms() as u64;
                let arrival = geometric(rng, self.log_no_arrival);
                if arrival < window {
                    energy = arrival as f64 * power.p_i;
                    duration = arrival as f64;
                } else {
                    energy = timers.t_lc as f64 * power.p_i + timers.t_ond as f64 * power.p_rx;
                    duration = window as f64;
                }
                if arrival <= window || cycle + 1 == n_c {
                    StateId::Tx
                } else {
                    StateId::LongCycle { cycle: cycle + 1 }
                }
            }
            StateId::Inactive => StateId::Off,
            StateId::Drop => {
                batch.drops += 1.0;
                StateId::Off
            }
        };

        batch.visits[idx] += visits;
        batch.steps += visits;
        batch.energy += energy;
        batch.duration += duration;
        next
    }
}

/// Runs the Monte Carlo walk described by `sim`.
pub fn simulate(sim: &SimConfig) -> Result<SimEstimate> {
    sim.validate()?;
    let params = sim.chain_params()?;
    let profile = EnergyDurationProfile::compute(&sim.model)?;
    let space = params.space();
    let n = space.len();

    if params.p_on == 0.0 {
        let occupancy = space
            .states()
            .map(|s| OccupancyEstimate {
                state: s,
                fraction: if s == StateId::Off { 1.0 } else { 0.0 },
                std_error: 0.0,
            })
            .collect();
        return Ok(SimEstimate {
            seed: sim.seed,
            generator: GENERATOR,
            steps: sim.steps,
            subframe_steps: f64::INFINITY,
            degenerate: true,
            e_p_uj: None,
            avg_power_mw: Estimate {
                mean: sim.model.power.p_s,
                std_error: 0.0,
            },
            active_wait_ms: None,
            active_visits: 0,
            occupancy,
            packets_delivered: 0,
            packets_dropped: 0,
        });
    }

    let walker = Walker {
        space,
        params,
        profile: &profile,
        cfg: &sim.model,
        log_no_arrival: -sim.model.traffic.lambda_app(),
        log_stay_off: (-params.p_on).ln_1p(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let mut state = StateId::Off;

    let mut scratch = Batch::new(n);
    for _ in 0..sim.warmup_steps {
        state = walker.step(&mut rng, state, &mut scratch);
    }

    let mut batches: Vec<Batch> = (0..sim.batches).map(|_| Batch::new(n)).collect();
    let per_batch = sim.steps / sim.batches as u64;
    for i in 0..sim.steps {
        let b = ((i / per_batch) as usize).min(sim.batches - 1);
        state = walker.step(&mut rng, state, &mut batches[b]);
    }

    let total_steps: f64 = batches.iter().map(|b| b.steps).sum();
    let occupancy = space
        .states()
        .enumerate()
        .map(|(j, s)| {
            let est = ratio_estimate(batches.iter().map(|b| (b.visits[j], b.steps)))
                .expect("every batch has steps");
            OccupancyEstimate {
                state: s,
                fraction: est.mean,
                std_error: est.std_error,
            }
        })
        .collect();

    Ok(SimEstimate {
        seed: sim.seed,
        generator: GENERATOR,
        steps: sim.steps,
        subframe_steps: total_steps,
        degenerate: false,
        e_p_uj: ratio_estimate(batches.iter().map(|b| (b.energy, b.packets))),
        avg_power_mw: ratio_estimate(batches.iter().map(|b| (b.energy, b.duration)))
            .ok_or_else(|| Error::Simulation("no simulated time elapsed".into()))?,
        active_wait_ms: ratio_estimate(batches.iter().map(|b| (b.active_wait, b.active_visits))),
        active_visits: batches.iter().map(|b| b.active_visits).sum::<f64>() as u64,
        occupancy,
        packets_delivered: batches.iter().map(|b| b.packets).sum::<f64>() as u64,
        packets_dropped: batches.iter().map(|b| b.drops).sum::<f64>() as u64,
    })
}

/// One simulated quantity against its analytic value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub name: String,
    pub simulated: f64,
    pub std_error: f64,
    pub analytic: f64,
    pub relative_error: f64,
    pub z: f64,
}

impl Comparison {
    fn new(name: impl Into<String>, simulated: f64, std_error: f64, analytic: f64) -> Self {
        let diff = simulated - analytic;
        let z = if std_error > 0.0 {
            diff / std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        };
        let relative_error = if analytic != 0.0 {
            diff / analytic
        } else {
            diff
        };
        Self {
            name: name.into(),
            simulated,
            std_error,
            analytic,
            relative_error,
            z,
        }
    }

    pub fn flagged(&self) -> bool {
        !(self.z.abs() <= Z_THRESHOLD)
    }
}

/// Simulation checked against the analytic pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub generator: &'static str,
    pub steps: u64,
    pub subframe_steps: f64,
    pub degenerate: bool,
    pub note: Option<String>,
    pub packets_delivered: u64,
    pub packets_dropped: u64,
    pub energy_per_packet: Option<Comparison>,
    pub average_power: Comparison,
    pub active_wait: Option<Comparison>,
    pub states: Vec<Comparison>,
    pub max_abs_state_z: f64,
    pub flagged: Vec<String>,
    pub passed: bool,
}

/// Mean and variance of `min(L, window)` for a geometric first-arrival
/// subframe `L` with per-subframe success `1 - exp(-lambda)`.
fn truncated_wait_moments(window: u32, lambda: f64) -> (f64, f64) {
    let expected = crate::energy::expected_wait_rate(window, lambda);
    let hit = -(-lambda).exp_m1();
    let second: f64 = (1..window)
        .map(|l| (-lambda * (l - 1) as f64).exp() * hit * (l as f64).powi(2))
        .sum::<f64>()
        + expected.p_no_arrival * (window as f64).powi(2);
    let mean = expected.expected_elapsed_ms;
    (mean, (second - mean * mean).max(0.0))
}

/// Simulates and compares against the closed-form analysis of the same
/// configuration.
pub fn compare_with_analytic(sim: &SimConfig) -> Result<ValidationReport> {
    let profile = EnergyDurationProfile::compute(&sim.model)?;
    compare_with_profile(sim, profile)
}

/// Like [`compare_with_analytic`] but the analytic side uses `profile`
/// instead of the configuration's own energy table.
pub fn compare_with_profile(
    sim: &SimConfig,
    profile: EnergyDurationProfile,
) -> Result<ValidationReport> {
    let params = sim.chain_params()?;
    let analysis = Analysis::with_distribution(&sim.model, params.closed_form())?
        .with_profile(profile)?
        .with_params(params);
    let est = simulate(sim)?;

    let mut states = Vec::with_capacity(est.occupancy.len());
    for occ in &est.occupancy {
        let b = analysis.distribution().get(occ.state);
        // Batch means cannot see rare states; never trust an SE below the
        // binomial one implied by the analytic occupancy.
        let floor = if est.subframe_steps.is_finite() {
            (b * (1.0 - b) / est.subframe_steps).sqrt()
        } else {
            0.0
        };
        states.push(Comparison::new(
            occ.state.to_string(),
            occ.fraction,
            occ.std_error.max(floor),
            b,
        ));
    }

    let energy_per_packet = match (est.e_p_uj, analysis.energy_per_packet(ModeFilter::ALL)) {
        (Some(e), Ok(a)) => Some(Comparison::new("energy_per_packet_uj", e.mean, e.std_error, a)),
        _ => None,
    };
    let average_power = Comparison::new(
        "average_power_mw",
        est.avg_power_mw.mean,
        est.avg_power_mw.std_error,
        analysis.average_power()?,
    );
    let active_wait = est.active_wait_ms.map(|w| {
        let (mean, var) =
            truncated_wait_moments(sim.model.timers.t_drxi, sim.model.traffic.lambda_app());
        let floor = (var / est.active_visits as f64).sqrt();
        Comparison::new("active_wait_ms", w.mean, w.std_error.max(floor), mean)
    });

    let max_abs_state_z = states.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
    let flagged: Vec<String> = states
        .iter()
        .chain(energy_per_packet.iter())
        .chain(std::iter::once(&average_power))
        .chain(active_wait.iter())
        .filter(|c| c.flagged())
        .map(|c| c.name.clone())
        .collect();

    let note = est
        .degenerate
        .then(|| "no traffic (p_on = 0): the run never leaves Off".to_string());
    Ok(ValidationReport {
        seed: est.seed,
        generator: est.generator,
        steps: est.steps,
        subframe_steps: est.subframe_steps,
        degenerate: est.degenerate,
        note,
        packets_delivered: est.packets_delivered,
        packets_dropped: est.packets_dropped,
        energy_per_packet,
        average_power,
        active_wait,
        states,
        max_abs_state_z,
        passed: flagged.is_empty(),
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProcedureKind;

    #[test]
    fn deterministic_cycle_energy() {
        // every subframe has traffic, nothing fails, one packet per connection
        let mut sim = SimConfig::new(ModelConfig::default().with_iat(1e4).unwrap(), 3_000, 1);
        sim.p_on_override = Some(1.0);
        sim.p_tx_override = Some(0.0);
        let est = simulate(&sim).unwrap();
        let profile = EnergyDurationProfile::compute(&sim.model).unwrap();
        let expected = profile.energy(StateId::Ra { attempt: 0 })
            + profile.energy(StateId::ConnectionRequest { attempt: 0 })
            + profile.energy(StateId::Connect);
        // per cycle: Off (1 subframe), RA, CR, Connect, Inactive
        let per_cycle = expected + profile.energy(StateId::Off) + profile.energy(StateId::Inactive);
        let e_p = est.e_p_uj.unwrap();
        assert!((e_p.mean - per_cycle).abs() < 1e-6 * per_cycle, "{} vs {per_cycle}", e_p.mean);
        assert_eq!(est.packets_delivered, 600);
        assert_eq!(est.packets_dropped, 0);
        let comm: f64 = expected;
        assert!(comm > 0.0);
    }

    #[test]
    fn same_seed_same_output() {
        let cfg = ModelConfig::default()
            .with_iat(1e4)
            .unwrap()
            .with_failure(0.2, 0.1)
            .unwrap();
        let sim = SimConfig::new(cfg, 20_000, 42);
        assert_eq!(simulate(&sim).unwrap(), simulate(&sim).unwrap());
        let other = SimConfig { seed: 43, ..sim.clone() };
        assert_ne!(simulate(&sim).unwrap(), simulate(&other).unwrap());
    }

    #[test]
    fn occupancy_sums_to_one() {
        let cfg = ModelConfig::default().with_iat(2e3).unwrap().with_failure(0.3, 0.0).unwrap();
        let est = simulate(&SimConfig::new(cfg, 50_000, 3)).unwrap();
        let total: f64 = est.occupancy.iter().map(|o| o.fraction).sum();
        assert!((total - 1.0).abs() <= 1e-12);
        assert!(est.avg_power_mw.std_error > 0.0);
        assert!(est.e_p_uj.unwrap().std_error > 0.0);
    }

    #[test]
    fn short_runs_are_rejected() {
        let sim = SimConfig::new(ModelConfig::default(), 100, 1);
        assert!(matches!(simulate(&sim), Err(Error::Simulation(_))));
        let mut sim = SimConfig::new(ModelConfig::default(), 100_000, 1);
        sim.batches = 10;
        assert!(matches!(simulate(&sim), Err(Error::Simulation(_))));
    }

    #[test]
    fn no_traffic_is_degenerate() {
        let cfg = ModelConfig::default().with_iat(f64::INFINITY).unwrap();
        let report = compare_with_analytic(&SimConfig::new(cfg, 1_000, 1)).unwrap();
        assert!(report.degenerate);
        assert!(report.note.is_some());
        assert!(report.energy_per_packet.is_none());
        assert!(report.passed, "{:?}", report.flagged);
    }

    #[test]
    fn geometric_sampler_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(geometric(&mut rng, f64::NEG_INFINITY), 1);
        assert_eq!(geometric(&mut rng, 0.0), u64::MAX);
        let n = 200_000;
        let p: f64 = 0.01;
        let mean = (0..n).map(|_| geometric(&mut rng, (-p).ln_1p()) as f64).sum::<f64>() / n as f64;
        // mean 1/p, sd sqrt(1-p)/p
        let se = (1.0 - p).sqrt() / p / (n as f64).sqrt();
        assert!((mean - 1.0 / p).abs() < 4.0 * se, "{mean}");
    }

    #[test]
    fn wait_moments_edges() {
        assert_eq!(truncated_wait_moments(1, 0.01), (1.0, 0.0));
        let (mean, var) = truncated_wait_moments(200, 1e-12);
        assert!((mean - 200.0).abs() < 1e-6 && var < 1e-4);
        // no truncation in practice: geometric mean 1/p and variance (1-p)/p^2
        let p = -(-0.5f64).exp_m1();
        let (mean, var) = truncated_wait_moments(1_000, 0.5);
        assert!((mean - 1.0 / p).abs() < 1e-12);
        assert!((var - (1.0 - p) / (p * p)).abs() < 1e-12);
    }

    #[test]
    fn corrupted_energy_is_flagged() {
        let cfg = ModelConfig::default()
            .with_procedure(ProcedureKind::ServiceRequest)
            .with_iat(1e5)
            .unwrap();
        let sim = SimConfig::new(cfg, 200_000, 11);
        let good = compare_with_analytic(&sim).unwrap();
        assert!(good.passed, "{:?} {:?}", good.flagged, good.active_wait);
        let bad_profile = EnergyDurationProfile::compute(&cfg)
            .unwrap()
            .with_scaled_energy(StateId::Inactive, 1.1);
        let bad = compare_with_profile(&sim, bad_profile).unwrap();
        assert!(!bad.passed);
        assert!(bad.flagged.iter().any(|f| f == "energy_per_packet_uj"), "{:?}", bad.flagged);
    }
}

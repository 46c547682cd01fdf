//! Headline quantities: energy per packet, average power, battery lifetime,
//! procedure comparisons and parameter sweeps.

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::chain::{ChainParams, OperationMode, StateId, StationaryDistribution};
use crate::config::{ModelConfig, ProcedureKind};
use crate::energy::EnergyDurationProfile;
use crate::error::{Error, Result};
use crate::probability::{split_outage, OutageSplit};

/// µJ per Wh.
pub const UJ_PER_WH: f64 = 3.6e9;
pub const MS_PER_YEAR: f64 = 365.25 * 24.0 * 3600.0 * 1000.0;

/// Upper end of the default inter-arrival grid: 48 h in ms.
pub const MAX_IAT_MS: f64 = 1.728e8;
pub const MIN_IAT_MS: f64 = 320.0;

/// A set of operation modes whose states contribute to an energy sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModeFilter {
    pub off: bool,
    pub communication: bool,
    pub inactive: bool,
}

impl ModeFilter {
    pub const ALL: ModeFilter = ModeFilter {
        off: true,
        communication: true,
        inactive: true,
    };
    pub const OFF: ModeFilter = ModeFilter {
        off: true,
        communication: false,
        inactive: false,
    };
    pub const COMMUNICATION: ModeFilter = ModeFilter {
        off: false,
        communication: true,
        inactive: false,
    };
    pub const INACTIVE: ModeFilter = ModeFilter {
        off: false,
        communication: false,
        inactive: true,
    };

    pub fn contains(&self, state: StateId) -> bool {
        match state.mode() {
            OperationMode::Off => self.off,
            OperationMode::Communication => self.communication,
            OperationMode::Inactive => self.inactive,
        }
    }
}

impl Default for ModeFilter {
    fn default() -> Self {
        ModeFilter::ALL
    }
}

impl FromStr for ModeFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(ModeFilter::ALL),
            "off" => Ok(ModeFilter::OFF),
            "communication" | "comm" => Ok(ModeFilter::COMMUNICATION),
            "inactive" => Ok(ModeFilter::INACTIVE),
            other => Err(Error::InvalidArgument(format!("unknown mode filter `{other}`"))),
        }
    }
}

/// How battery lifetime turns energy into a drain rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LifetimeModel {
    /// Time-average power, `sum b_j E_j / sum b_j T_j`.
    #[default]
    RenewalReward,
    /// Energy per delivered packet times the arrival rate.
    PerPacket,
}

impl FromStr for LifetimeModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "renewal" | "renewal_reward" => Ok(LifetimeModel::RenewalReward),
            "per-packet" | "per_packet" => Ok(LifetimeModel::PerPacket),
            other => Err(Error::InvalidArgument(format!("unknown lifetime model `{other}`"))),
        }
    }
}

/// A configuration evaluated end to end: chain probabilities, stationary
/// distribution and per-state energies.
#[derive(Debug, Clone)]
pub struct Analysis {
    cfg: ModelConfig,
    params: ChainParams,
    dist: StationaryDistribution,
    profile: EnergyDurationProfile,
}

impl Analysis {
    /// Uses the closed-form stationary distribution.
    pub fn new(cfg: &ModelConfig) -> Result<Self> {
        let params = ChainParams::from_config(cfg)?;
        let dist = params.closed_form();
        Self::with_distribution(cfg, dist)
    }

    /// Uses the numeric stationary solve instead of the closed form.
    pub fn numeric(cfg: &ModelConfig) -> Result<Self> {
        let params = ChainParams::from_config(cfg)?;
        let dist = params.numeric_stationary()?;
        Self::with_distribution(cfg, dist)
    }

    pub fn with_distribution(cfg: &ModelConfig, dist: StationaryDistribution) -> Result<Self> {
        let params = ChainParams::from_config(cfg)?;
        if dist.space() != params.space() {
            return Err(Error::InvalidArgument(
                "distribution does not match the configuration's state space".into(),
            ));
        }
        let profile = EnergyDurationProfile::compute(cfg)?;
        Ok(Self {
            cfg: *cfg,
            params,
            dist,
            profile,
        })
    }

    /// Replaces the energy table, e.g. with a deliberately perturbed one.
    pub fn with_profile(mut self, profile: EnergyDurationProfile) -> Result<Self> {
        if profile.space() != self.params.space() {
            return Err(Error::InvalidArgument("profile does not match the state space".into()));
        }
        self.profile = profile;
        Ok(self)
    }

    /// Swaps in routing probabilities that differ from the configuration's
    /// own (the simulator's overrides). The distribution must already match.
    pub(crate) fn with_params(mut self, params: ChainParams) -> Self {
        self.params = params;
        self
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn distribution(&self) -> &StationaryDistribution {
        &self.dist
    }

    pub fn profile(&self) -> &EnergyDurationProfile {
        &self.profile
    }

    /// `sum_{j in filter} b_j E_j`, in µJ per chain step.
    pub fn energy_rate(&self, filter: ModeFilter) -> f64 {
        self.dist
            .iter()
            .zip(self.profile.energy_uj())
            .filter(|((s, _), _)| filter.contains(*s))
            .map(|((_, b), e)| b * e)
            .sum()
    }

    /// `sum_j b_j T_j`, in ms per chain step.
    pub fn mean_step_duration(&self) -> f64 {
        self.dist
            .probs()
            .iter()
            .zip(self.profile.duration_ms())
            .map(|(b, t)| b * t)
            .sum()
    }

    /// Packets delivered per chain step.
    pub fn n_p(&self) -> Result<f64> {
        self.params.packets_per_step(&self.dist)
    }

    /// Average energy per delivered packet, in µJ, counting only states in
    /// `filter`.
    pub fn energy_per_packet(&self, filter: ModeFilter) -> Result<f64> {
        let n_p = self.n_p()?;
        if !(n_p > 0.0) {
            return Err(Error::UndefinedMetric(
                "no packets are delivered (N_p = 0)".into(),
            ));
        }
        Ok(self.energy_rate(filter) / n_p)
    }

    /// Time-average power in mW.
    pub fn average_power(&self) -> Result<f64> {
        let t = self.mean_step_duration();
        if !(t > 0.0) {
            return Err(Error::UndefinedMetric("zero mean step duration".into()));
        }
        Ok(self.energy_rate(ModeFilter::ALL) / t)
    }

    pub fn drain_power(&self, model: LifetimeModel) -> Result<f64> {
        match model {
            LifetimeModel::RenewalReward => self.average_power(),
            LifetimeModel::PerPacket => Ok(self.energy_per_packet(ModeFilter::ALL)?
                * self.cfg.traffic.lambda_app()),
        }
    }

    pub fn lifetime_years(&self, model: LifetimeModel) -> Result<f64> {
        Ok(lifetime_years_at(self.cfg.battery_wh, self.drain_power(model)?))
    }

    pub fn report(&self) -> Result<MetricsReport> {
        let e_p = |f| self.energy_per_packet(f);
        Ok(MetricsReport {
            procedure: self.cfg.procedure,
            iat_ms: self.cfg.traffic.iat_ms(),
            p_c: self.cfg.access.p_c,
            p_e: self.cfg.access.p_e,
            p_out: self.cfg.access.p_out(),
            e_p_uj: e_p(ModeFilter::ALL)?,
            e_p_off_uj: e_p(ModeFilter::OFF)?,
            e_p_communication_uj: e_p(ModeFilter::COMMUNICATION)?,
            e_p_inactive_uj: e_p(ModeFilter::INACTIVE)?,
            avg_power_mw: self.average_power()?,
            lifetime_years: self.lifetime_years(LifetimeModel::RenewalReward)?,
            lifetime_years_per_packet: self.lifetime_years(LifetimeModel::PerPacket)?,
            n_p: self.n_p()?,
            b_off: self.dist.get(StateId::Off),
            b_drop: self.dist.get(StateId::Drop),
            p_rbp_mw: self.profile.p_rbp_mw,
            p_pre_mw: self.profile.p_pre_mw,
        })
    }
}

/// Every metric of one configuration, as emitted by `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub procedure: ProcedureKind,
    pub iat_ms: f64,
    pub p_c: f64,
    pub p_e: f64,
    pub p_out: f64,
    pub e_p_uj: f64,
    pub e_p_off_uj: f64,
    pub e_p_communication_uj: f64,
    pub e_p_inactive_uj: f64,
    pub avg_power_mw: f64,
    pub lifetime_years: f64,
    pub lifetime_years_per_packet: f64,
    pub n_p: f64,
    pub b_off: f64,
    pub b_drop: f64,
    pub p_rbp_mw: f64,
    pub p_pre_mw: f64,
}

pub fn lifetime_years_at(battery_wh: f64, power_mw: f64) -> f64 {
    battery_wh * UJ_PER_WH / power_mw / MS_PER_YEAR
}

pub fn energy_per_packet(cfg: &ModelConfig, filter: ModeFilter) -> Result<f64> {
    Analysis::new(cfg)?.energy_per_packet(filter)
}

pub fn average_power(cfg: &ModelConfig) -> Result<f64> {
    Analysis::new(cfg)?.average_power()
}

pub fn battery_lifetime_years(cfg: &ModelConfig) -> Result<f64> {
    Analysis::new(cfg)?.lifetime_years(LifetimeModel::RenewalReward)
}

/// Relative energy saving of `a` over `b`: `1 - E_p(a) / E_p(b)`.
pub fn reduction(a: &ModelConfig, b: &ModelConfig) -> Result<f64> {
    reduction_with(a, b, ModeFilter::ALL)
}

pub fn reduction_with(a: &ModelConfig, b: &ModelConfig, filter: ModeFilter) -> Result<f64> {
    Ok(1.0 - energy_per_packet(a, filter)? / energy_per_packet(b, filter)?)
}

/// Largest saving of procedure `a` over `b` on an IAT grid, with the IAT at
/// which it occurs.
pub fn peak_reduction(
    base: &ModelConfig,
    iat_grid: &[f64],
    a: ProcedureKind,
    b: ProcedureKind,
) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &iat in iat_grid {
        let at = base.with_iat(iat)?;
        let r = reduction(&at.with_procedure(a), &at.with_procedure(b))?;
        if best.is_none_or(|(_, v)| r > v) {
            best = Some((iat, r));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("empty IAT grid".into()))
}

/// `n` log-spaced points from `lo` to `hi`, both ends included exactly.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "logspace needs 0 < lo <= hi and n >= 1, got {lo}:{hi}:{n}"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    v[0] = lo;
    v[n - 1] = hi;
    Ok(v)
}

/// 30 log-spaced inter-arrival times from 320 ms to 48 h.
pub fn default_iat_grid() -> Vec<f64> {
    logspace(MIN_IAT_MS, MAX_IAT_MS, 30).expect("static grid")
}

/// Grids and options of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub iat_grid: Vec<f64>,
    pub p_out_grid: Vec<f64>,
    pub procedures: Vec<ProcedureKind>,
    pub split: OutageSplit,
    pub filter: ModeFilter,
    pub lifetime: LifetimeModel,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            iat_grid: default_iat_grid(),
            p_out_grid: vec![0.0, 0.1, 0.3],
            procedures: ProcedureKind::ALL.to_vec(),
            split: OutageSplit::default(),
            filter: ModeFilter::ALL,
            lifetime: LifetimeModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub procedure: ProcedureKind,
    pub iat_ms: f64,
    pub p_out: f64,
    pub e_p_uj: f64,
    pub avg_power_mw: f64,
    pub lifetime_years: f64,
    pub n_p: f64,
    pub b_drop: f64,
}

/// A grid point that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub procedure: ProcedureKind,
    pub iat_ms: f64,
    pub p_out: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SweepRecord {
    Row(SweepRow),
    Failed(SweepFailure),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
}

pub const SWEEP_CSV_HEADER: &str =
    "procedure,iat_ms,p_out,e_p_uj,avg_power_mw,lifetime_years,n_p,b_drop";

impl SweepResult {
    pub fn rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.records.iter().filter_map(|r| match r {
            SweepRecord::Row(row) => Some(row),
            SweepRecord::Failed(_) => None,
        })
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepFailure> {
        self.records.iter().filter_map(|r| match r {
            SweepRecord::Failed(f) => Some(f),
            SweepRecord::Row(_) => None,
        })
    }

    /// Writes successful rows; failed grid points are left out.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SWEEP_CSV_HEADER}")?;
        for r in self.rows() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.procedure.key(),
                format_sig9(r.iat_ms),
                format_sig9(r.p_out),
                format_sig9(r.e_p_uj),
                format_sig9(r.avg_power_mw),
                format_sig9(r.lifetime_years),
                format_sig9(r.n_p),
                format_sig9(r.b_drop),
            )?;
        }
        Ok(())
    }
}

fn sweep_point(
    base: &ModelConfig,
    spec: &SweepSpec,
    procedure: ProcedureKind,
    iat: f64,
    p_out: f64,
) -> Result<SweepRow> {
    let (p_c, p_e) = split_outage(p_out, spec.split)?;
    let cfg = base
        .with_procedure(procedure)
        .with_iat(iat)?
        .with_failure(p_c, p_e)?;
    let a = Analysis::new(&cfg)?;
    Ok(SweepRow {
        procedure,
        iat_ms: iat,
        p_out,
        e_p_uj: a.energy_per_packet(spec.filter)?,
        avg_power_mw: a.average_power()?,
        lifetime_years: a.lifetime_years(spec.lifetime)?,
        n_p: a.n_p()?,
        b_drop: a.distribution().get(StateId::Drop),
    })
}

/// Evaluates every (procedure, IAT, outage) combination. Rows are ordered by
/// procedure, then ascending IAT, then ascending outage; a failing point
/// becomes a [`SweepFailure`] and the sweep carries on.
pub fn sweep(base: &ModelConfig, spec: &SweepSpec) -> Result<SweepResult> {
    if spec.iat_grid.is_empty() || spec.p_out_grid.is_empty() || spec.procedures.is_empty() {
        return Err(Error::InvalidArgument("sweep grids must be nonempty".into()));
    }
    let mut procedures = spec.procedures.clone();
    procedures.sort();
    procedures.dedup();
    let mut iats = spec.iat_grid.clone();
    iats.sort_by(f64::total_cmp);
    let mut pouts = spec.p_out_grid.clone();
    pouts.sort_by(f64::total_cmp);

    let mut records = Vec::with_capacity(procedures.len() * iats.len() * pouts.len());
    for &procedure in &procedures {
        for &iat in &iats {
            for &p_out in &pouts {
                records.push(match sweep_point(base, spec, procedure, iat, p_out) {
                    Ok(row) => SweepRecord::Row(row),
                    Err(e) => SweepRecord::Failed(SweepFailure {
                        procedure,
                        iat_ms: iat,
                        p_out,
                        error: e.to_string(),
                    }),
                });
            }
        }
    }
    Ok(SweepResult { records })
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros removed,
/// scientific notation outside `[1e-5, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let fixed = format!("{:.*}", (DIGITS - 1 - exp) as usize, x);
        trim_fraction(&fixed).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

//! Model configuration.
//!
//! Defaults reproduce the reference parameter table: a 5 MHz LTE cell with
//! QPSK (36 bytes per RB pair), a device at 700 m, connected-mode DRX with an
//! 80 ms long cycle and a 10 s inactivity timer, up to 9 RA retransmissions and
//! a 20 ms backoff window.
//!
//! On disk the configuration is a flat JSON object (see [`ConfigDocument`]);
//! any key that is left out keeps its default value.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::energy::RadioLinkConfig;
use crate::error::{Error, Result};

/// The small-data transmission procedure being modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProcedureKind {
    /// Conventional Service Request: full RRC connection re-establishment.
    #[serde(rename = "sr", alias = "SR")]
    ServiceRequest,
    /// Control-plane CIoT optimization: data rides in NAS signaling.
    #[serde(rename = "cp", alias = "CP")]
    ControlPlane,
    /// User-plane CIoT optimization: RRC suspend/resume.
    #[serde(rename = "up", alias = "UP")]
    UserPlane,
}

impl ProcedureKind {
    pub const ALL: [ProcedureKind; 3] = [
        ProcedureKind::ServiceRequest,
        ProcedureKind::ControlPlane,
        ProcedureKind::UserPlane,
    ];

    /// Sum of UE and eNB processing delays needed to establish the
    /// connection, in ms.
    pub fn t_cr_rx_ms(self) -> f64 {
        match self {
            ProcedureKind::ServiceRequest => 41.0,
            ProcedureKind::ControlPlane | ProcedureKind::UserPlane => 16.0,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            ProcedureKind::ServiceRequest => "SR",
            ProcedureKind::ControlPlane => "CP",
            ProcedureKind::UserPlane => "UP",
        }
    }

    /// Lowercase identifier used in flags, JSON and CSV.
    pub fn key(self) -> &'static str {
        match self {
            ProcedureKind::ServiceRequest => "sr",
            ProcedureKind::ControlPlane => "cp",
            ProcedureKind::UserPlane => "up",
        }
    }
}

impl fmt::Display for ProcedureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ProcedureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sr" => Ok(ProcedureKind::ServiceRequest),
            "cp" => Ok(ProcedureKind::ControlPlane),
            "up" => Ok(ProcedureKind::UserPlane),
            other => Err(Error::InvalidArgument(format!(
                "unknown procedure `{other}` (expected sr, cp or up)"
            ))),
        }
    }
}

/// Poisson uplink traffic described by its mean inter-arrival time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficModel {
    iat_ms: f64,
}

impl TrafficModel {
    /// `iat_ms` may be `f64::INFINITY` (no traffic at all).
    pub fn new(iat_ms: f64) -> Result<Self> {
        if iat_ms.is_nan() || iat_ms <= 0.0 {
            return Err(Error::invalid_config(
                "iat_ms",
                format!("must be > 0, got {iat_ms}"),
            ));
        }
        Ok(Self { iat_ms })
    }

    pub fn from_rate(lambda_per_ms: f64) -> Result<Self> {
        if lambda_per_ms.is_nan() || lambda_per_ms < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "arrival rate must be >= 0, got {lambda_per_ms}"
            )));
        }
        Self::new(1.0 / lambda_per_ms)
    }

    pub fn iat_ms(&self) -> f64 {
        self.iat_ms
    }

    /// Arrival rate in packets per ms.
    pub fn lambda_app(&self) -> f64 {
        1.0 / self.iat_ms
    }
}

/// Connected-mode and RA timers. Window timers are whole subframes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimerConfig {
    /// Inactivity timer.
    pub t_i: u32,
    /// DRX inactivity timer.
    pub t_drxi: u32,
    /// Idle part of a long DRX cycle.
    pub t_lc: u32,
    /// On-duration of a long DRX cycle.
    pub t_ond: u32,
    /// Time before the preamble is sent.
    pub t_pre: f64,
    /// Receive time of the RA procedure.
    pub t_ra_rx: f64,
    /// CP release wait (S1 processing and transfer delay).
    pub t_wait: u32,
}

impl Default for TimerConfig {
    fn default() -> Self {
        Self {
            t_i: 10_000,
            t_drxi: 200,
            t_lc: 80,
            t_ond: 4,
            t_pre: 2.5,
            t_ra_rx: 10.0,
            t_wait: 54,
        }
    }
}

impl TimerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_i < self.t_drxi {
            return Err(Error::invalid_config(
                "t_i",
                format!("must be >= t_drxi ({}), got {}", self.t_drxi, self.t_i),
            ));
        }
        if self.t_lc + self.t_ond == 0 {
            return Err(Error::invalid_config("t_lc", "t_lc + t_ond must be > 0"));
        }
        check_nonneg("t_pre", self.t_pre)?;
        check_nonneg("t_ra_rx", self.t_ra_rx)?;
        Ok(())
    }

    /// Length of one long DRX cycle in ms.
    pub fn long_cycle_ms(&self) -> u32 {
        self.t_lc + self.t_ond
    }
}

/// Device power levels in mW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLevels {
    pub p_s: f64,
    pub p_i: f64,
    pub p_rx: f64,
    pub p_tx_max: f64,
}

impl Default for PowerLevels {
    fn default() -> Self {
        Self {
            p_s: 0.03,
            p_i: 10.0,
            p_rx: 100.0,
            p_tx_max: 200.0,
        }
    }
}

impl PowerLevels {
    pub fn validate(&self) -> Result<()> {
        check_pos("p_s", self.p_s)?;
        if self.p_i <= self.p_s {
            return Err(Error::invalid_config("p_i", "must exceed p_s"));
        }
        if self.p_rx <= self.p_i {
            return Err(Error::invalid_config("p_rx", "must exceed p_i"));
        }
        if !(self.p_tx_max >= self.p_rx) || !self.p_tx_max.is_finite() {
            return Err(Error::invalid_config("p_tx_max", "must be finite and >= p_rx"));
        }
        Ok(())
    }
}

/// Message sizes in bytes, plus the bytes carried by one RB pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageSizes {
    pub b_rbp: u32,
    /// RRC connection request.
    pub b_req: u32,
    /// RRC setup complete.
    pub b_comp: u32,
    /// RRC security mode complete.
    pub b_s_comp: u32,
    /// RRC reconfiguration complete.
    pub b_r_ul: u32,
    /// Application payload.
    pub b_data: u32,
    /// Setup complete carrying NAS data (CP).
    pub b_comp_cp: u32,
    /// UL information transfer carrying NAS data (CP).
    pub b_data_cp: u32,
}

impl Default for MessageSizes {
    fn default() -> Self {
        Self {
            b_rbp: 36,
            b_req: 7,
            b_comp: 20,
            b_s_comp: 13,
            b_r_ul: 10,
            b_data: 100,
            b_comp_cp: 129,
            b_data_cp: 120,
        }
    }
}

impl MessageSizes {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("b_rbp", self.b_rbp),
            ("b_req", self.b_req),
            ("b_comp", self.b_comp),
            ("b_s_comp", self.b_s_comp),
            ("b_r_ul", self.b_r_ul),
            ("b_data", self.b_data),
            ("b_comp_cp", self.b_comp_cp),
            ("b_data_cp", self.b_data_cp),
        ];
        for (key, v) in fields {
            if v == 0 {
                return Err(Error::invalid_config(key, "must be > 0"));
            }
        }
        if self.b_comp_cp < self.b_data {
            return Err(Error::invalid_config("b_comp_cp", "must be >= b_data"));
        }
        if self.b_data_cp < self.b_data {
            return Err(Error::invalid_config("b_data_cp", "must be >= b_data"));
        }
        Ok(())
    }
}

/// Random-access parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessConfig {
    /// Maximum number of RA retransmissions.
    pub m: u32,
    /// Maximum backoff window in subframes.
    pub w_c: u32,
    /// RA collision probability.
    pub p_c: f64,
    /// Connection-request error probability.
    pub p_e: f64,
    /// Maximum RB pairs scheduled in one subframe.
    pub frag_threshold_rbp: u32,
}

impl Default for AccessConfig {
    fn default() -> Self {
        Self {
            m: 9,
            w_c: 20,
            p_c: 0.0,
            p_e: 0.0,
            frag_threshold_rbp: 6,
        }
    }
}

impl AccessConfig {
    pub fn validate(&self) -> Result<()> {
        check_prob_open("p_c", self.p_c)?;
        check_prob_open("p_e", self.p_e)?;
        if self.w_c == 0 {
            return Err(Error::invalid_config("w_c", "must be >= 1"));
        }
        if self.frag_threshold_rbp == 0 {
            return Err(Error::invalid_config("frag_threshold_rbp", "must be >= 1"));
        }
        Ok(())
    }

    /// Outage probability of one connection attempt.
    pub fn p_out(&self) -> f64 {
        crate::probability::outage(self.p_c, self.p_e)
    }
}

/// Full model configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub procedure: ProcedureKind,
    pub traffic: TrafficModel,
    pub timers: TimerConfig,
    pub power: PowerLevels,
    pub sizes: MessageSizes,
    pub access: AccessConfig,
    pub radio: RadioLinkConfig,
    pub battery_wh: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            procedure: ProcedureKind::ServiceRequest,
            traffic: TrafficModel { iat_ms: 3_600_000.0 },
            timers: TimerConfig::default(),
            power: PowerLevels::default(),
            sizes: MessageSizes::default(),
            access: AccessConfig::default(),
            radio: RadioLinkConfig::default(),
            battery_wh: 5.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        TrafficModel::new(self.traffic.iat_ms)?;
        self.timers.validate()?;
        self.power.validate()?;
        self.sizes.validate()?;
        self.access.validate()?;
        self.radio.validate()?;
        check_pos("battery_wh", self.battery_wh)?;
        Ok(())
    }

    pub fn with_procedure(mut self, procedure: ProcedureKind) -> Self {
        self.procedure = procedure;
        self
    }

    pub fn with_iat(mut self, iat_ms: f64) -> Result<Self> {
        self.traffic = TrafficModel::new(iat_ms)?;
        Ok(self)
    }

    pub fn with_failure(mut self, p_c: f64, p_e: f64) -> Result<Self> {
        check_prob_open("p_c", p_c)?;
        check_prob_open("p_e", p_e)?;
        self.access.p_c = p_c;
        self.access.p_e = p_e;
        Ok(self)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: ConfigDocument = serde_json::from_str(s)?;
        doc.try_into()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&ConfigDocument::from(*self))
            .expect("config document always serializes")
    }
}

/// Flat on-disk form of [`ModelConfig`]. Keys are the lowercase parameter
/// symbols; `radio` is a nested object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigDocument {
    pub procedure: ProcedureKind,
    pub iat_ms: f64,
    pub t_i: u32,
    pub t_drxi: u32,
    pub t_lc: u32,
    pub t_ond: u32,
    pub t_pre: f64,
    pub t_ra_rx: f64,
    pub t_wait: u32,
    pub p_s: f64,
    pub p_i: f64,
    pub p_rx: f64,
    pub p_tx_max: f64,
    pub b_rbp: u32,
    pub b_req: u32,
    pub b_comp: u32,
    pub b_s_comp: u32,
    pub b_r_ul: u32,
    pub b_data: u32,
    pub b_comp_cp: u32,
    pub b_data_cp: u32,
    pub m: u32,
    pub w_c: u32,
    pub p_c: f64,
    pub p_e: f64,
    pub frag_threshold_rbp: u32,
    pub battery_wh: f64,
    pub radio: RadioLinkConfig,
}

impl Default for ConfigDocument {
    fn default() -> Self {
        ModelConfig::default().into()
    }
}

impl From<ModelConfig> for ConfigDocument {
    fn from(c: ModelConfig) -> Self {
        Self {
            procedure: c.procedure,
            iat_ms: c.traffic.iat_ms,
            t_i: c.timers.t_i,
            t_drxi: c.timers.t_drxi,
            t_lc: c.timers.t_lc,
            t_ond: c.timers.t_ond,
            t_pre: c.timers.t_pre,
            t_ra_rx: c.timers.t_ra_rx,
            t_wait: c.timers.t_wait,
            p_s: c.power.p_s,
            p_i: c.power.p_i,
            p_rx: c.power.p_rx,
            p_tx_max: c.power.p_tx_max,
            b_rbp: c.sizes.b_rbp,
            b_req: c.sizes.b_req,
            b_comp: c.sizes.b_comp,
            b_s_comp: c.sizes.b_s_comp,
            b_r_ul: c.sizes.b_r_ul,
            b_data: c.sizes.b_data,
            b_comp_cp: c.sizes.b_comp_cp,
            b_data_cp: c.sizes.b_data_cp,
            m: c.access.m,
            w_c: c.access.w_c,
            p_c: c.access.p_c,
            p_e: c.access.p_e,
            frag_threshold_rbp: c.access.frag_threshold_rbp,
            battery_wh: c.battery_wh,
            radio: c.radio,
        }
    }
}

impl TryFrom<ConfigDocument> for ModelConfig {
    type Error = Error;

    fn try_from(d: ConfigDocument) -> Result<Self> {
        let cfg = ModelConfig {
            procedure: d.procedure,
            traffic: TrafficModel::new(d.iat_ms)?,
            timers: TimerConfig {
                t_i: d.t_i,
                t_drxi: d.t_drxi,
                t_lc: d.t_lc,
                t_ond: d.t_ond,
                t_pre: d.t_pre,
                t_ra_rx: d.t_ra_rx,
                t_wait: d.t_wait,
            },
            power: PowerLevels {
                p_s: d.p_s,
                p_i: d.p_i,
                p_rx: d.p_rx,
                p_tx_max: d.p_tx_max,
            },
            sizes: MessageSizes {
                b_rbp: d.b_rbp,
                b_req: d.b_req,
                b_comp: d.b_comp,
                b_s_comp: d.b_s_comp,
                b_r_ul: d.b_r_ul,
                b_data: d.b_data,
                b_comp_cp: d.b_comp_cp,
                b_data_cp: d.b_data_cp,
            },
            access: AccessConfig {
                m: d.m,
                w_c: d.w_c,
                p_c: d.p_c,
                p_e: d.p_e,
                frag_threshold_rbp: d.frag_threshold_rbp,
            },
            radio: d.radio,
            battery_wh: d.battery_wh,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub(crate) fn check_pos(key: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid_config(key, format!("must be finite and > 0, got {v}")))
    }
}

pub(crate) fn check_nonneg(key: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid_config(key, format!("must be finite and >= 0, got {v}")))
    }
}

fn check_prob_open(key: &'static str, v: f64) -> Result<()> {
    if (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid_config(key, format!("must lie in [0, 1), got {v}")))
    }
}

//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a usage or configuration error, 2 when a
//! `validate` cross-check falls outside tolerance.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::chain::ChainParams;
use crate::config::{ModelConfig, ProcedureKind};
use crate::energy::EnergyDurationProfile;
use crate::error::{Error, Result};
use crate::metrics::{self, Analysis, LifetimeModel, ModeFilter, SweepSpec};
use crate::probability::{split_outage, OutageSplit};
use crate::sim::{self, SimConfig, ValidationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

/// Largest ∞-norm gap tolerated between the closed-form and numeric
/// stationary distributions.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "lte-iot-energy", version, about = "Energy per packet, power and battery lifetime of LTE IoT small-data procedures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every metric for one configuration (or a small grid).
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Write the fully resolved configuration as JSON instead of metrics.
        #[arg(long)]
        emit_config: bool,
    },
    /// Evaluate procedure x IAT x outage grids.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the Monte Carlo walker and report it against the analytic model.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Cross-check closed form, numeric solve and simulation.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Dump per-state tables as CSV.
    Dump {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = DumpWhat::Profile)]
        what: DumpWhat,
        /// Use the numeric solve for `--what distribution`.
        #[arg(long)]
        numeric: bool,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON configuration; omitted keys take the reference defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// sr, cp, up or all. Defaults to the configuration's procedure
    /// (all for `sweep`).
    #[arg(long)]
    procedure: Option<String>,
    /// Inter-arrival time(s) in ms: `3600000`, `1e4,3.6e6` or
    /// `logspace:lo:hi:n`.
    #[arg(long)]
    iat: Option<String>,
    /// Outage probabilities, comma separated.
    #[arg(long)]
    pout: Option<String>,
    /// How an outage probability is split into collision and error.
    #[arg(long, default_value = "all_collision")]
    split: String,
    /// all, off, communication or inactive.
    #[arg(long, default_value = "all")]
    filter: String,
    /// renewal or per-packet.
    #[arg(long, default_value = "renewal")]
    lifetime: String,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Chain transitions per run.
    #[arg(long, default_value_t = 1_000_000)]
    steps: u64,
    #[arg(long, default_value_t = sim::MIN_BATCHES)]
    batches: usize,
    #[arg(long, default_value_t = 0)]
    warmup: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DumpWhat {
    Profile,
    Matrix,
    Distribution,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

/// Parses an inter-arrival specification.
pub fn parse_iat_spec(spec: &str) -> Result<Vec<f64>> {
    if let Some(rest) = spec.strip_prefix("logspace:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "--iat: expected logspace:lo:hi:n, got `{spec}`"
            )));
        }
        let lo = parse_f64("--iat", parts[0])?;
        let hi = parse_f64("--iat", parts[1])?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("--iat: bad point count `{}`", parts[2])))?;
        return metrics::logspace(lo, hi, n);
    }
    parse_list("--iat", spec)
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(flag: &str, spec: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = spec
        .split(',')
        .map(|s| parse_f64(flag, s))
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(Error::InvalidArgument(format!("{flag}: empty list")));
    }
    Ok(v)
}

fn parse_f64(flag: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{flag}: `{}` is not a number", s.trim())))
}

fn parse_procedures(spec: &str) -> Result<Vec<ProcedureKind>> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(ProcedureKind::ALL.to_vec());
    }
    spec.split(',').map(|s| s.trim().parse()).collect()
}

/// A configuration grid resolved from the common flags.
struct Resolved {
    base: ModelConfig,
    procedures: Vec<ProcedureKind>,
    iats: Vec<f64>,
    pouts: Option<Vec<f64>>,
    split: OutageSplit,
    filter: ModeFilter,
    lifetime: LifetimeModel,
}

impl Resolved {
    fn new(args: &CommonArgs, default_all: bool) -> Result<Self> {
        let base = match &args.config {
            Some(path) => ModelConfig::from_json_file(path)?,
            None => ModelConfig::default(),
        };
        let procedures = match &args.procedure {
            Some(p) => parse_procedures(p)?,
            None if default_all => ProcedureKind::ALL.to_vec(),
            None => vec![base.procedure],
        };
        let iats = match &args.iat {
            Some(s) => parse_iat_spec(s)?,
            None if default_all => metrics::default_iat_grid(),
            None => vec![base.traffic.iat_ms()],
        };
        let pouts = match &args.pout {
            Some(s) => Some(parse_list("--pout", s)?),
            None if default_all => Some(vec![0.0, 0.1, 0.3]),
            None => None,
        };
        Ok(Self {
            base,
            procedures,
            iats,
            pouts,
            split: args.split.parse()?,
            filter: args.filter.parse()?,
            lifetime: args.lifetime.parse()?,
        })
    }

    /// Every configuration of the grid; without `--pout` the configuration
    /// file's own p_c and p_e are kept.
    fn configs(&self) -> Result<Vec<ModelConfig>> {
        let mut out = Vec::new();
        for &procedure in &self.procedures {
            for &iat in &self.iats {
                let cfg = self.base.with_procedure(procedure).with_iat(iat)?;
                match &self.pouts {
                    None => out.push(cfg),
                    Some(pouts) => {
                        for &p_out in pouts {
                            let (p_c, p_e) = split_outage(p_out, self.split)?;
                            out.push(cfg.with_failure(p_c, p_e)?);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Serializes a one-element list as the bare element.
fn write_json_items<T: Serialize>(out: &mut dyn Write, items: &[T]) -> Result<()> {
    match items {
        [one] => write_json(out, one),
        many => write_json(out, many),
    }
}

#[derive(Debug, Serialize)]
struct AnalyzeOutput {
    #[serde(flatten)]
    report: metrics::MetricsReport,
    filter: String,
    e_p_filtered_uj: f64,
    lifetime_model: LifetimeModel,
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Analyze {
            common,
            emit_config,
        } => analyze(&common, emit_config),
        Command::Sweep { common } => run_sweep(&common),
        Command::Simulate { common, sim } => simulate(&common, &sim),
        Command::Validate { common, sim } => validate(&common, &sim),
        Command::Dump {
            common,
            what,
            numeric,
        } => dump(&common, what, numeric),
    }
}

fn analyze(args: &CommonArgs, emit_config: bool) -> Result<i32> {
    let r = Resolved::new(args, false)?;
    let configs = r.configs()?;
    let mut out = open_output(&args.out)?;
    if emit_config {
        let [cfg] = configs.as_slice() else {
            return Err(Error::InvalidArgument(
                "--emit-config needs exactly one procedure, IAT and outage".into(),
            ));
        };
        writeln!(out, "{}", cfg.to_json_string())?;
        out.flush()?;
        return Ok(EXIT_OK);
    }
    if args.format == Some(Format::Csv) {
        let spec = SweepSpec {
            iat_grid: r.iats.clone(),
            p_out_grid: r.pouts.clone().unwrap_or_else(|| vec![r.base.access.p_out()]),
            procedures: r.procedures.clone(),
            split: r.split,
            filter: r.filter,
            lifetime: r.lifetime,
        };
        metrics::sweep(&r.base, &spec)?.write_csv(&mut out)?;
        out.flush()?;
        return Ok(EXIT_OK);
    }
    let mut reports = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let a = Analysis::new(cfg)?;
        let mut report = a.report()?;
        report.lifetime_years = a.lifetime_years(r.lifetime)?;
        reports.push(AnalyzeOutput {
            report,
            filter: args.filter.clone(),
            e_p_filtered_uj: a.energy_per_packet(r.filter)?,
            lifetime_model: r.lifetime,
        });
    }
    write_json_items(&mut *out, &reports)?;
    Ok(EXIT_OK)
}

fn run_sweep(args: &CommonArgs) -> Result<i32> {
    let r = Resolved::new(args, true)?;
    let spec = SweepSpec {
        iat_grid: r.iats.clone(),
        p_out_grid: r.pouts.clone().unwrap_or_else(|| vec![r.base.access.p_out()]),
        procedures: r.procedures.clone(),
        split: r.split,
        filter: r.filter,
        lifetime: r.lifetime,
    };
    let result = metrics::sweep(&r.base, &spec)?;
    for f in result.failures() {
        log::warn!(
            "{} iat={} p_out={}: {}",
            f.procedure,
            f.iat_ms,
            f.p_out,
            f.error
        );
    }
    let mut out = open_output(&args.out)?;
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => result.write_csv(&mut out)?,
        Format::Json => write_json(&mut *out, &result.records)?,
    }
    out.flush()?;
    Ok(EXIT_OK)
}

fn sim_config(cfg: ModelConfig, args: &SimArgs) -> SimConfig {
    SimConfig {
        warmup_steps: args.warmup,
        batches: args.batches,
        ..SimConfig::new(cfg, args.steps, args.seed)
    }
}

fn simulate(args: &CommonArgs, sim_args: &SimArgs) -> Result<i32> {
    let r = Resolved::new(args, false)?;
    let mut reports: Vec<ValidationReport> = Vec::new();
    for cfg in r.configs()? {
        reports.push(sim::compare_with_analytic(&sim_config(cfg, sim_args))?);
    }
    let mut out = open_output(&args.out)?;
    write_json_items(&mut *out, &reports)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct ValidationEntry {
    procedure: ProcedureKind,
    iat_ms: f64,
    p_out: f64,
    solver_max_abs_diff: f64,
    solver_passed: bool,
    simulation: ValidationReport,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct ValidationSummary {
    solver_tolerance: f64,
    z_threshold: f64,
    entries: Vec<ValidationEntry>,
    passed: bool,
}

fn validate(args: &CommonArgs, sim_args: &SimArgs) -> Result<i32> {
    let r = Resolved::new(args, false)?;
    let mut entries = Vec::new();
    for cfg in r.configs()? {
        let params = ChainParams::from_config(&cfg)?;
        let diff = params
            .closed_form()
            .max_abs_diff(&params.numeric_stationary()?);
        let solver_passed = diff <= SOLVER_TOLERANCE;
        let simulation = sim::compare_with_analytic(&sim_config(cfg, sim_args))?;
        let passed = solver_passed && simulation.passed;
        if !passed {
            log::error!(
                "{} iat={} p_out={}: solver diff {diff:e}, flagged {:?}",
                cfg.procedure,
                cfg.traffic.iat_ms(),
                cfg.access.p_out(),
                simulation.flagged
            );
        }
        entries.push(ValidationEntry {
            procedure: cfg.procedure,
            iat_ms: cfg.traffic.iat_ms(),
            p_out: cfg.access.p_out(),
            solver_max_abs_diff: diff,
            solver_passed,
            simulation,
            passed,
        });
    }
    let passed = entries.iter().all(|e| e.passed);
    let summary = ValidationSummary {
        solver_tolerance: SOLVER_TOLERANCE,
        z_threshold: sim::Z_THRESHOLD,
        entries,
        passed,
    };
    let mut out = open_output(&args.out)?;
    write_json(&mut *out, &summary)?;
    Ok(if passed { EXIT_OK } else { EXIT_VALIDATION })
}

fn dump(args: &CommonArgs, what: DumpWhat, numeric: bool) -> Result<i32> {
    let r = Resolved::new(args, false)?;
    let [cfg] = r.configs()?[..] else {
        return Err(Error::InvalidArgument(
            "dump needs exactly one procedure, IAT and outage".into(),
        ));
    };
    let mut out = open_output(&args.out)?;
    let json = args.format == Some(Format::Json);
    match what {
        DumpWhat::Profile => {
            let p = EnergyDurationProfile::compute(&cfg)?;
            if json {
                write_json(&mut *out, &p)?;
            } else {
                p.write_csv(&mut out)?;
            }
        }
        DumpWhat::Matrix => {
            if json {
                return Err(Error::InvalidArgument(
                    "the transition matrix is only dumped as CSV".into(),
                ));
            }
            ChainParams::from_config(&cfg)?
                .transition_matrix()
                .write_csv(&mut out)?;
        }
        DumpWhat::Distribution => {
            let params = ChainParams::from_config(&cfg)?;
            let dist = if numeric {
                params.numeric_stationary()?
            } else {
                params.closed_form()
            };
            if json {
                write_json(&mut *out, &dist)?;
            } else {
                dist.write_csv(&mut out)?;
            }
        }
    }
    out.flush()?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iat_specs() {
        assert_eq!(parse_iat_spec("3600000").unwrap(), vec![3.6e6]);
        assert_eq!(parse_iat_spec("1e4, 2e4").unwrap(), vec![1e4, 2e4]);
        let g = parse_iat_spec("logspace:320:172800000:30").unwrap();
        assert_eq!(g.len(), 30);
        assert_eq!(g[0], 320.0);
        assert_eq!(g[29], 1.728e8);
        assert!(parse_iat_spec("logspace:1:2").is_err());
        assert!(parse_iat_spec("ten").is_err());
    }

    #[test]
    fn procedure_lists() {
        assert_eq!(parse_procedures("all").unwrap().len(), 3);
        assert_eq!(
            parse_procedures("cp,up").unwrap(),
            vec![ProcedureKind::ControlPlane, ProcedureKind::UserPlane]
        );
        assert!(parse_procedures("xx").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["lte-iot-energy", "analyze", "--bogus"]), EXIT_CONFIG);
        assert_eq!(run(["lte-iot-energy", "analyze", "--iat=-5"]), EXIT_CONFIG);
        assert_eq!(run(["lte-iot-energy", "--help"]), EXIT_OK);
    }
}

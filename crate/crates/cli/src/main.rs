mod angle;
mod config;
mod output;
mod tables;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noon_core::montecarlo::{Simulation, DEFAULT_SHARDS};
use noon_core::{
    analytics, compare, critical_reflectance, detection_table, efficiency_penalty,
    efficiency_sweep, make_noon, odd_analytics, prob_closed_form, resolving_analytics,
    resolving_optimum, unit_propagate, which_way_propagate, AnalyticsReport, CascadeSpec,
    Comparison, DetectionScheme, DetectorKind, DetectorModel, NoonSpec, Parity, Reflectance,
    ResolvingReport, SimulationReport,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::angle::parse_angle;
use crate::config::{AngleValue, Format, ProtocolChoice, RunConfig};
use crate::output::{emit, object, render};

const DEFAULT_SHOTS: u64 = 100_000;
const SWEEP_LIMIT: u32 = 20;

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit code 2.
    Usage(String),
    /// Anything else; exit code 1.
    Internal(String),
}

impl CliError {
    pub fn usage(msg: impl fmt::Display) -> Self {
        CliError::Usage(msg.to_string())
    }

    pub fn internal(msg: impl fmt::Display) -> Self {
        CliError::Internal(msg.to_string())
    }
}

impl From<noon_core::Error> for CliError {
    fn from(e: noon_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Heralded reduction of N00N states to super-resolving single-photon states.
#[derive(Debug, Parser)]
#[command(name = "noon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for simulations.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of simulated shots.
    #[arg(long, global = true)]
    shots: Option<u64>,

    /// Detector efficiency in (0, 1].
    #[arg(long, global = true)]
    eta: Option<f64>,

    /// JSON file with run parameters; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Two-photon detection tables with and without the eraser.
    Tables(TablesArgs),
    /// Detection outcomes of one unit.
    Unit(UnitArgs),
    /// Closed-form analytics of a coincidence cascade.
    Cascade(CascadeArgs),
    /// Single-unit protocol with number-resolving detectors.
    Resolving(ResolvingArgs),
    /// Best success probability of both schemes against N.
    Sweep(SweepArgs),
    /// Uniform reflectance reaching a target conditional probability.
    CriticalRho(CriticalArgs),
    /// Monte Carlo run of either protocol.
    Simulate(SimulateArgs),
}

fn angle_arg(text: &str) -> Result<f64, String> {
    parse_angle(text)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParityArg {
    Odd,
    Even,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DetectorArg {
    Threshold,
    Resolving,
}

#[derive(Debug, Args)]
struct PhotonArgs {
    /// Photon number of the input N00N state.
    #[arg(long = "N", visible_alias = "photons")]
    photons: Option<u32>,

    /// Phase φ in radians or as pi/k, jpi/k.
    #[arg(long, value_parser = angle_arg, allow_hyphen_values = true)]
    phi: Option<f64>,
}

#[derive(Debug, Args)]
struct TablesArgs {
    #[arg(long)]
    rho: Option<f64>,

    #[arg(long, value_parser = angle_arg, allow_hyphen_values = true)]
    phi: Option<f64>,
}

#[derive(Debug, Args)]
struct UnitArgs {
    #[command(flatten)]
    photons: PhotonArgs,

    /// Phase multiplier M; defaults to N.
    #[arg(long = "M")]
    phase_multiplier: Option<u32>,

    #[arg(long)]
    rho: Option<f64>,

    /// Skip the eraser so detectors see which arm each photon left.
    #[arg(long)]
    which_way: bool,
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    /// Same reflectance for every unit.
    #[arg(long = "uniform-rho")]
    uniform_rho: Option<f64>,

    /// Comma-separated reflectances, unit 1 (nearest the output) first.
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<f64>>,

    /// Use the schedule maximizing the success probability.
    #[arg(long)]
    optimal: bool,

    /// Expected parity of N; checked against N.
    #[arg(long, value_enum)]
    parity: Option<ParityArg>,
}

#[derive(Debug, Args)]
struct CascadeArgs {
    #[command(flatten)]
    photons: PhotonArgs,

    #[command(flatten)]
    schedule: ScheduleArgs,

    /// Also run a Monte Carlo simulation and compare.
    #[arg(long)]
    simulate: bool,

    #[arg(long, value_enum)]
    detector: Option<DetectorArg>,

    #[arg(long)]
    shards: Option<usize>,
}

#[derive(Debug, Args)]
struct ResolvingArgs {
    #[command(flatten)]
    photons: PhotonArgs,

    #[arg(long)]
    rho: Option<f64>,

    /// Use the reflectance maximizing the success probability.
    #[arg(long)]
    optimize: bool,

    #[arg(long)]
    simulate: bool,

    #[arg(long)]
    shards: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long = "N-min")]
    n_min: Option<u32>,

    #[arg(long = "N-max")]
    n_max: Option<u32>,
}

#[derive(Debug, Args)]
struct CriticalArgs {
    #[command(flatten)]
    photons: PhotonArgs,

    /// Target conditional probability.
    #[arg(long)]
    target: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    protocol: Option<ProtocolChoice>,

    #[command(flatten)]
    photons: PhotonArgs,

    #[command(flatten)]
    schedule: ScheduleArgs,

    /// Reflectance of the resolving unit.
    #[arg(long)]
    rho: Option<f64>,

    #[arg(long)]
    optimize: bool,

    #[arg(long, value_enum)]
    detector: Option<DetectorArg>,

    #[arg(long)]
    shards: Option<usize>,
}

fn flag(set: bool) -> Option<bool> {
    set.then_some(true)
}

impl PhotonArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.photons = self.photons;
        cfg.phi = self.phi.map(AngleValue::Radians);
    }
}

impl ScheduleArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.uniform_rho = self.uniform_rho;
        cfg.schedule = self.schedule.clone();
        cfg.optimal = flag(self.optimal);
        cfg.parity = self.parity.map(|p| match p {
            ParityArg::Odd => Parity::Odd,
            ParityArg::Even => Parity::Even,
        });
    }
}

fn detector_kind(arg: Option<DetectorArg>) -> Option<DetectorKind> {
    arg.map(|d| match d {
        DetectorArg::Threshold => DetectorKind::Threshold,
        DetectorArg::Resolving => DetectorKind::Resolving,
    })
}

/// Parameters given on the command line, as a config layer.
fn command_line_layer(cli: &Cli) -> RunConfig {
    let mut cfg = RunConfig {
        format: cli.format,
        out: cli.out.clone(),
        seed: cli.seed,
        shots: cli.shots,
        eta: cli.eta,
        ..Default::default()
    };
    match &cli.command {
        Command::Tables(a) => {
            cfg.rho = a.rho;
            cfg.phi = a.phi.map(AngleValue::Radians);
        }
        Command::Unit(a) => {
            a.photons.apply(&mut cfg);
            cfg.phase_multiplier = a.phase_multiplier;
            cfg.rho = a.rho;
            cfg.which_way = flag(a.which_way);
        }
        Command::Cascade(a) => {
            a.photons.apply(&mut cfg);
            a.schedule.apply(&mut cfg);
            cfg.simulate = flag(a.simulate);
            cfg.detector = detector_kind(a.detector);
            cfg.shards = a.shards;
        }
        Command::Resolving(a) => {
            a.photons.apply(&mut cfg);
            cfg.rho = a.rho;
            cfg.optimize = flag(a.optimize);
            cfg.simulate = flag(a.simulate);
            cfg.shards = a.shards;
        }
        Command::Sweep(a) => {
            cfg.n_min = a.n_min;
            cfg.n_max = a.n_max;
        }
        Command::CriticalRho(a) => {
            a.photons.apply(&mut cfg);
            cfg.target = a.target;
        }
        Command::Simulate(a) => {
            cfg.protocol = a.protocol;
            a.photons.apply(&mut cfg);
            a.schedule.apply(&mut cfg);
            cfg.rho = a.rho;
            cfg.optimize = flag(a.optimize);
            cfg.detector = detector_kind(a.detector);
            cfg.shards = a.shards;
        }
    }
    cfg
}

fn to_value(value: &impl Serialize) -> CliResult<Value> {
    serde_json::to_value(value).map_err(CliError::internal)
}

fn cmd_tables(cfg: &RunConfig) -> CliResult<Value> {
    let rho = cfg.rho.ok_or_else(|| CliError::usage("--rho is required"))?;
    to_value(&tables::both_tables(rho, cfg.phi()?)?)
}

fn cmd_unit(cfg: &RunConfig) -> CliResult<Value> {
    let n = cfg.photons()?;
    let m = cfg.phase_multiplier.unwrap_or(n);
    let phi = cfg.phi()?;
    let rho = Reflectance::new(cfg.rho.ok_or_else(|| CliError::usage("--rho is required"))?)?;
    let which_way = RunConfig::flag(cfg.which_way);
    let input = make_noon(NoonSpec::new(n, m, phi)?, ("a", "b"))?;
    let state = if which_way {
        which_way_propagate(&input, rho)?
    } else {
        unit_propagate(&input, rho)?
    };
    let rows = detection_table(&state)?
        .into_iter()
        .map(|o| {
            let closed = if which_way {
                Value::Null
            } else {
                json!(prob_closed_form(n, m, phi, o.event, rho)?)
            };
            Ok(object([
                ("m", json!(o.event.d)),
                ("n", json!(o.event.c)),
                ("probability", json!(o.probability)),
                ("closed_form", closed),
            ]))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Value::Array(rows))
}

fn cascade_spec(cfg: &RunConfig) -> CliResult<CascadeSpec> {
    let n = cfg.photons()?;
    let phi = cfg.phi()?;
    if let Some(p) = cfg.parity {
        if Parity::of(n) != p {
            return Err(CliError::usage(format!("N = {n} does not match parity {p:?}")));
        }
    }
    let optimal = RunConfig::flag(cfg.optimal);
    let given = [cfg.uniform_rho.is_some(), cfg.schedule.is_some(), optimal];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(CliError::usage(
            "give exactly one of --uniform-rho, --schedule or --optimal",
        ));
    }
    let spec = if let Some(rho) = cfg.uniform_rho {
        CascadeSpec::uniform(n, phi, rho)?
    } else if let Some(schedule) = &cfg.schedule {
        CascadeSpec::for_photons(n, phi, schedule)?
    } else {
        CascadeSpec::optimal(n, phi)?
    };
    Ok(spec)
}

fn detector(cfg: &RunConfig, default: DetectorKind) -> CliResult<DetectorModel> {
    Ok(DetectorModel::new(
        cfg.detector.unwrap_or(default),
        cfg.eta.unwrap_or(1.0),
    )?)
}

fn run(sim: &Simulation, cfg: &RunConfig) -> CliResult<SimulationReport> {
    Ok(sim.run(
        cfg.shots.unwrap_or(DEFAULT_SHOTS),
        cfg.seed.unwrap_or(0),
        cfg.shards.unwrap_or(DEFAULT_SHARDS),
    )?)
}

#[derive(Serialize)]
struct CascadeOutput {
    #[serde(flatten)]
    analytics: AnalyticsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulation: Option<SimulationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Comparison>,
}

fn cmd_cascade(cfg: &RunConfig) -> CliResult<Value> {
    let spec = cascade_spec(cfg)?;
    let report = analytics(&spec)?;
    let (simulation, comparison) = if RunConfig::flag(cfg.simulate) {
        let sim = Simulation::cascade(&spec, detector(cfg, DetectorKind::Threshold)?)?;
        let sim_report = run(&sim, cfg)?;
        let c = compare(&sim_report, &report);
        (Some(sim_report), Some(c))
    } else {
        (None, None)
    };
    to_value(&CascadeOutput {
        analytics: report,
        simulation,
        comparison,
    })
}

#[derive(Serialize)]
struct ResolvingOutput {
    #[serde(flatten)]
    report: ResolvingReport,
    /// Aggregate η² multiplier at the requested efficiency.
    efficiency_penalty: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulation: Option<SimulationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Comparison>,
}

fn resolving_rho(cfg: &RunConfig, n: u32) -> CliResult<Reflectance> {
    match (cfg.rho, RunConfig::flag(cfg.optimize)) {
        (Some(rho), false) => Ok(Reflectance::new(rho)?),
        (None, true) => Ok(resolving_optimum(n)?.0),
        _ => Err(CliError::usage("give exactly one of --rho or --optimize")),
    }
}

fn cmd_resolving(cfg: &RunConfig) -> CliResult<Value> {
    let n = cfg.photons()?;
    let rho = resolving_rho(cfg, n)?;
    let report = resolving_analytics(n, rho)?;
    let eta = cfg.eta.unwrap_or(1.0);
    let efficiency_penalty = efficiency_penalty(DetectionScheme::NumberResolving, n, eta)?;
    let (simulation, comparison) = if RunConfig::flag(cfg.simulate) {
        let sim = Simulation::resolving(n, cfg.phi()?, rho, detector(cfg, DetectorKind::Resolving)?)?;
        let sim_report = run(&sim, cfg)?;
        let c = compare(&sim_report, &report);
        (Some(sim_report), Some(c))
    } else {
        (None, None)
    };
    to_value(&ResolvingOutput {
        report,
        efficiency_penalty,
        simulation,
        comparison,
    })
}

fn cmd_sweep(cfg: &RunConfig) -> CliResult<Value> {
    let lo = cfg.n_min.unwrap_or(2);
    let hi = cfg.n_max.unwrap_or(SWEEP_LIMIT);
    if !(2 <= lo && lo <= hi && hi <= SWEEP_LIMIT) {
        return Err(CliError::usage(format!(
            "sweep needs 2 <= N-min <= N-max <= {SWEEP_LIMIT}, got {lo}..{hi}"
        )));
    }
    let rows = efficiency_sweep(lo, hi)?
        .into_iter()
        .map(|r| {
            object([
                ("N", json!(r.photons)),
                ("coincidence_max", json!(r.coincidence_max)),
                ("resolving_max", json!(r.resolving_max)),
            ])
        })
        .collect();
    Ok(Value::Array(rows))
}

fn cmd_critical(cfg: &RunConfig) -> CliResult<Value> {
    let n = cfg.photons()?;
    let phi = cfg.phi()?;
    let target = cfg.target.ok_or_else(|| CliError::usage("--target is required"))?;
    let rho = critical_reflectance(n, phi, target)?;
    let reached = odd_analytics(&CascadeSpec::uniform(n, phi, rho)?)?.p_cond;
    Ok(object([
        ("photons", json!(n)),
        ("phase", json!(phi)),
        ("target", json!(target)),
        ("rho_c", json!(rho)),
        ("p_cond", json!(reached)),
    ]))
}

fn cmd_simulate(cfg: &RunConfig) -> CliResult<Value> {
    let protocol = cfg.protocol.unwrap_or(ProtocolChoice::Cascade);
    let sim = match protocol {
        ProtocolChoice::Cascade => {
            Simulation::cascade(&cascade_spec(cfg)?, detector(cfg, DetectorKind::Threshold)?)?
        }
        ProtocolChoice::Resolving => {
            let n = cfg.photons()?;
            let rho = resolving_rho(cfg, n)?;
            Simulation::resolving(n, cfg.phi()?, rho, detector(cfg, DetectorKind::Resolving)?)?
        }
    };
    let report = run(&sim, cfg)?;
    let exact = sim.exact();
    let comparison = compare(&report, &exact);
    Ok(object([
        ("simulation", to_value(&report)?),
        ("exact", to_value(&exact)?),
        ("comparison", to_value(&comparison)?),
    ]))
}

fn execute(cli: &Cli) -> CliResult<()> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let cfg = base.overlay(command_line_layer(cli));
    let (value, default_format) = match &cli.command {
        Command::Tables(_) => (cmd_tables(&cfg)?, Format::Csv),
        Command::Unit(_) => (cmd_unit(&cfg)?, Format::Csv),
        Command::Cascade(_) => (cmd_cascade(&cfg)?, Format::Json),
        Command::Resolving(_) => (cmd_resolving(&cfg)?, Format::Json),
        Command::Sweep(_) => (cmd_sweep(&cfg)?, Format::Csv),
        Command::CriticalRho(_) => (cmd_critical(&cfg)?, Format::Json),
        Command::Simulate(_) => (cmd_simulate(&cfg)?, Format::Json),
    };
    let text = render(&value, cfg.format.unwrap_or(default_format))?;
    emit(&text, cfg.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Usage(_) => ExitCode::from(2),
                CliError::Internal(_) => ExitCode::from(1),
            }
        }
    }
}

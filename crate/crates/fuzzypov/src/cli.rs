//! Command-line parsing; flags override values from `--config`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, ExecOptions};
use crate::config::{DesignChoice, GRuleChoice, KindConfig, MethodChoice, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "fuzzypov", version, about = "Fuzzy poverty indices and their MSE from survey microdata")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate indices and their MSE per area from a microdata CSV.
    Estimate(EstimateArgs),
    /// Run the Monte Carlo comparison on a synthetic population.
    Simulate(SimulateArgs),
    /// MSE surfaces and rank stability under parameter sweeps.
    Robustness(RobustnessArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Microdata CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// JSON config or a manifest from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Membership function, as NAME or NAME:z1=Q(0.01),z2=Q(0.99),beta=2.
    #[arg(long = "kind", value_name = "SPEC")]
    pub kinds: Vec<String>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// Bootstrap replicates.
    #[arg(long, short = 'R')]
    pub replicates: Option<usize>,
    #[arg(long, value_enum)]
    pub g_rule: Option<GRuleChoice>,
    /// Design of the input data.
    #[arg(long, value_enum)]
    pub design: Option<DesignChoice>,
    /// Sampling fraction of a stratum.
    #[arg(long = "fpc", value_name = "STRATUM=F")]
    pub fpc: Vec<String>,
    /// Input column for a field (unit_id, hh_id, stratum, psu, area, weight, income).
    #[arg(long = "column", value_name = "FIELD=NAME")]
    pub columns: Vec<String>,
    /// Recalibrate alpha within each domain.
    #[arg(long)]
    pub recalibrate: bool,
    /// Apply the (1 - w_hi / w_h) jackknife correction.
    #[arg(long)]
    pub unequal_probability_correction: bool,
    /// CV above which estimates are flagged as not publishable.
    #[arg(long)]
    pub publication_cv: Option<f64>,
    /// Bootstrap resamples for ZBM percentile fits.
    #[arg(long)]
    pub zbm_resamples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also write every replicate value to replicates.csv.
    #[arg(long)]
    pub export_replicates: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub scenario: Option<DesignChoice>,
    /// Monte Carlo replicates.
    #[arg(long = "T", short = 'T')]
    pub t: Option<usize>,
    /// SRS sample size.
    #[arg(long)]
    pub srs_n: Option<usize>,
    /// Households sampled in an area (complex scenario).
    #[arg(long = "households", value_name = "AREA=H")]
    pub households: Vec<String>,
    /// Reuse the population ZBM fit instead of refitting per sample.
    #[arg(long)]
    pub no_zbm_refit: bool,
    /// Write timings.csv (wall-clock, not reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct RobustnessArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Grid values for z1, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub z1: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub z2: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub beta: Option<Vec<f64>>,
    /// Only compare each benchmark with itself.
    #[arg(long)]
    pub benchmark_only: bool,
}

fn key_value(s: &str) -> Result<(&str, &str), CliError> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| CliError::user(format!("expected KEY=VALUE, got `{s}`")))
}

fn base_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::user(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::from_json(&text)
        }
    }
}

impl CommonArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(p) = &self.input {
            cfg.input = Some(p.clone());
        }
        cfg.seed = self.seed.or(cfg.seed);
        if !self.kinds.is_empty() {
            cfg.kinds = self.kinds.iter().map(|k| KindConfig::parse_flag(k)).collect::<Result<_, _>>()?;
        }
        cfg.method = self.method.unwrap_or(cfg.method);
        cfg.replicates = self.replicates.unwrap_or(cfg.replicates);
        cfg.g_rule = self.g_rule.unwrap_or(cfg.g_rule);
        cfg.design = self.design.unwrap_or(cfg.design);
        for item in &self.fpc {
            let (k, v) = key_value(item)?;
            let f: f64 = v.parse().map_err(|_| CliError::user(format!("bad sampling fraction `{v}`")))?;
            cfg.fpc.insert(k.to_string(), f);
        }
        for item in &self.columns {
            let (field, name) = key_value(item)?;
            let slot = match field {
                "unit_id" => &mut cfg.schema.unit_id,
                "hh_id" => &mut cfg.schema.hh_id,
                "stratum" => &mut cfg.schema.stratum,
                "psu" => &mut cfg.schema.psu,
                "area" => &mut cfg.schema.area,
                "weight" => &mut cfg.schema.weight,
                "income" => &mut cfg.schema.income,
                other => return Err(CliError::user(format!("unknown field `{other}`"))),
            };
            *slot = name.to_string();
        }
        cfg.recalibrate |= self.recalibrate;
        cfg.unequal_probability_correction |= self.unequal_probability_correction;
        cfg.publication_cv = self.publication_cv.unwrap_or(cfg.publication_cv);
        cfg.zbm_resamples = self.zbm_resamples.unwrap_or(cfg.zbm_resamples);
        Ok(())
    }

    fn exec(&self) -> ExecOptions {
        ExecOptions { jobs: self.jobs, timings: false }
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(a) => {
            let mut cfg = base_config(a.common.config.as_deref())?;
            a.common.apply(&mut cfg)?;
            cfg.export_replicates |= a.export_replicates;
            commands::cmd_estimate(cfg, &a.common.out, &a.common.exec())?;
        }
        Command::Simulate(a) => {
            let mut cfg = base_config(a.common.config.as_deref())?;
            a.common.apply(&mut cfg)?;
            let sim = &mut cfg.simulation;
            sim.scenario = a.scenario.unwrap_or(sim.scenario);
            sim.t = a.t.unwrap_or(sim.t);
            sim.srs_n = a.srs_n.or(sim.srs_n);
            if !a.households.is_empty() {
                let mut map = sim.households.clone().unwrap_or_default();
                for item in &a.households {
                    let (k, v) = key_value(item)?;
                    let h: usize = v.parse().map_err(|_| CliError::user(format!("bad household count `{v}`")))?;
                    map.insert(k.to_string(), h);
                }
                sim.households = Some(map);
            }
            if a.no_zbm_refit {
                sim.refit_zbm = false;
            }
            let exec = ExecOptions { timings: a.timings, ..a.common.exec() };
            commands::cmd_simulate(cfg, &a.common.out, &exec)?;
        }
        Command::Robustness(a) => {
            let mut cfg = base_config(a.common.config.as_deref())?;
            a.common.apply(&mut cfg)?;
            let rob = &mut cfg.robustness;
            rob.z1 = a.z1.or(rob.z1.take());
            rob.z2 = a.z2.or(rob.z2.take());
            rob.beta = a.beta.or(rob.beta.take());
            rob.benchmark_only |= a.benchmark_only;
            commands::cmd_robustness(cfg, &a.common.out, &a.common.exec())?;
        }
    }
    Ok(())
}

/// Prints each distinct warning once; replicate loops would otherwise
/// repeat the same message thousands of times.
struct OnceLogger {
    inner: env_logger::Logger,
    seen: std::sync::Mutex<std::collections::HashSet<String>>,
}

impl log::Log for OnceLogger {
    fn enabled(&self, metadata: &log::Metadata<'_>) -> bool {
        self.inner.enabled(metadata)
    }

    fn log(&self, record: &log::Record<'_>) {
        if !self.inner.matches(record) {
            return;
        }
        if record.level() <= log::Level::Warn {
            let key = format!("{}", record.args());
            if !self.seen.lock().map(|mut s| s.insert(key)).unwrap_or(true) {
                return;
            }
        }
        self.inner.log(record);
    }

    fn flush(&self) {
        self.inner.flush();
    }
}

fn init_logging(level: log::LevelFilter) {
    let inner = env_logger::Builder::new().filter_level(level).parse_default_env().build();
    let max = inner.filter();
    if log::set_boxed_logger(Box::new(OnceLogger { inner, seen: Default::default() })).is_ok() {
        log::set_max_level(max);
    }
}

/// Parses `args`, runs and returns the process exit code, printing
/// diagnostics to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    init_logging(level);
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            for line in e.lines() {
                eprintln!("error: {line}");
            }
            e.exit_code()
        }
    }
}

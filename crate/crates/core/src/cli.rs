//! Batch experiment runner.
//!
//! `run` executes one policy on one scenario for several seeds, writes a
//! trajectory CSV and a JSON summary per invocation, and prints the mean and
//! standard deviation of `sum_i w_i ln r_i` and `sum_i w_i r_i` over runs.
//! `enumerate` prints the exhaustive optimum of a small scenario.
//!
//! Run `k` of a sweep uses stream `k` of `--seed`. Generated layouts (the
//! grid built-ins) draw their clients from `--seed + k`, so every run sees a
//! fresh client placement, as in averaged experiments.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::annealing::{self, AnnealingSchedule, OptimizerPolicy, PolicyKind, RunResult, SelectionOrder};
use crate::baselines::{run_minint_wifi, DEFAULT_RESTARTS, MININT_WIFI};
use crate::fairness::Scheme;
use crate::model::Network;
use crate::oracle::enumerate_optimum;
use crate::scenarios::{builtin, load_scenario, write_trajectory_csv, RunSummary, Scenario, BUILTIN_NAMES};

#[derive(Debug, Parser)]
#[command(
    name = "mbpf",
    version,
    about = "Proportional-fair channel selection, association, access and scheduling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a policy on a scenario over several seeds.
    Run(RunArgs),
    /// Exhaustively search a small scenario for its optimum.
    Enumerate(EnumerateArgs),
    /// Print a scenario as TOML.
    Show(ShowArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    DpExact,
    DpApprox,
    Greedy,
    MinintWifi,
}

impl PolicyArg {
    fn kind(self) -> Option<PolicyKind> {
        match self {
            PolicyArg::DpExact => Some(PolicyKind::DpExact),
            PolicyArg::DpApprox => Some(PolicyKind::DpApprox),
            PolicyArg::Greedy => Some(PolicyKind::Greedy),
            PolicyArg::MinintWifi => None,
        }
    }

    fn label(self) -> &'static str {
        self.kind().map_or(MININT_WIFI, PolicyKind::label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Server,
    Client,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Server => Scheme::ServerCentric,
            SchemeArg::Client => Scheme::ClientContention,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    RoundRobin,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Built-in scenario name or path to a scenario file.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, value_enum, default_value = "dp-exact")]
    pub policy: PolicyArg,
    #[arg(long, value_enum, default_value = "server")]
    pub scheme: SchemeArg,
    /// Steps per run (default depends on the scenario size).
    #[arg(long)]
    pub iters: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub runs: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Initial temperature of the cooling schedule.
    #[arg(long)]
    pub t0: Option<f64>,
    /// invsqrtlog, invlog, geometric:<ratio> or const:<T>.
    #[arg(long, default_value = "invsqrtlog")]
    pub schedule: AnnealingSchedule,
    #[arg(long, value_enum, default_value = "round-robin")]
    pub order: OrderArg,
    #[arg(long, default_value_t = 1000)]
    pub record_every: u64,
    /// Random restarts of the minimum-interference channel search.
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long, value_enum, default_value = "server")]
    pub scheme: SchemeArg,
    /// Layout seed for generated scenarios.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Emit the optimum as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ShowArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Loads a built-in by name or a scenario file by path.
pub fn resolve_scenario(name: &str, seed: u64) -> Result<Scenario> {
    if BUILTIN_NAMES.contains(&name) {
        return Ok(builtin(name, seed)?);
    }
    let path = Path::new(name);
    if !path.exists() {
        bail!(
            "`{name}` is neither a built-in scenario ({}) nor an existing file",
            BUILTIN_NAMES.join(", ")
        );
    }
    Ok(load_scenario(path)?)
}

/// Default step budget: 20000 for line3-sized scenarios, 200000 for grids.
pub fn default_iterations(scenario: &Scenario) -> u64 {
    if scenario.name.starts_with("grid16") {
        200_000
    } else if scenario.name == "micro" {
        5_000
    } else {
        20_000
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub stddev: f64,
}

impl Stat {
    /// Sample mean and (n - 1) standard deviation.
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Stat {
            mean,
            stddev: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub scenario: String,
    pub policy: String,
    pub scheme: String,
    pub runs: u64,
    pub iterations: u64,
    pub log_utility: Stat,
    pub weighted_throughput: Stat,
    pub results: Vec<RunSummary>,
}

/// Outcome of `run`: the report plus the files written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: SweepReport,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

/// Executes all runs of a sweep; results come back in run order.
pub fn sweep(args: &RunArgs) -> Result<Vec<(Network, RunResult)>> {
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let mut schedule = args.schedule;
    if let Some(t0) = args.t0 {
        if !(t0 >= 0.0 && t0.is_finite()) {
            bail!("--t0 must be a finite non-negative number, got {t0}");
        }
        schedule = schedule.with_t0(t0);
    }
    let base = resolve_scenario(&args.scenario, args.seed)?;
    let iterations = args.iters.unwrap_or_else(|| default_iterations(&base));
    let scheme: Scheme = args.scheme.into();
    if args.policy == PolicyArg::MinintWifi && scheme != Scheme::ServerCentric {
        bail!("{MININT_WIFI} is defined for the server-centric scheme only");
    }
    (0..args.runs)
        .into_par_iter()
        .map(|k| {
            let scenario = if base.generator.is_some() && BUILTIN_NAMES.contains(&args.scenario.as_str()) {
                builtin(&args.scenario, args.seed.wrapping_add(k))?
            } else {
                base.clone()
            };
            let net = scenario.network()?;
            let result = match args.policy.kind() {
                Some(kind) => {
                    let policy = OptimizerPolicy::new(kind, iterations, args.seed)
                        .with_scheme(scheme)
                        .with_schedule(schedule)
                        .with_order(match args.order {
                            OrderArg::RoundRobin => SelectionOrder::RoundRobin,
                            OrderArg::Random => SelectionOrder::UniformRandom,
                        })
                        .with_stream(k)
                        .with_record_every(args.record_every);
                    annealing::run(&net, &policy)?
                }
                None => run_minint_wifi(&net, args.seed, k, args.restarts)?,
            };
            Ok((net, result))
        })
        .collect()
}

/// `run` subcommand: sweep, write `<scenario>_<policy>_<scheme>.csv` and
/// `.json` under `--out-dir`, and return the aggregate report.
pub fn cmd_run(args: &RunArgs) -> Result<RunOutput> {
    let runs = sweep(args)?;
    let base = resolve_scenario(&args.scenario, args.seed)?;
    let scheme: Scheme = args.scheme.into();
    let stem = format!("{}_{}_{}", base.name, args.policy.label(), scheme);
    let run_ids: Vec<String> = (0..runs.len()).map(|k| format!("{stem}_{k}")).collect();

    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let csv_path = args.out_dir.join(format!("{stem}.csv"));
    let file = fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    let rows: Vec<(String, &RunResult)> = run_ids.iter().cloned().zip(runs.iter().map(|(_, r)| r)).collect();
    write_trajectory_csv(std::io::BufWriter::new(file), &rows)?;

    let energies: Vec<f64> = runs.iter().map(|(_, r)| r.energy).collect();
    let throughputs: Vec<f64> = runs.iter().map(|(_, r)| r.weighted_throughput).collect();
    let report = SweepReport {
        scenario: base.name.clone(),
        policy: args.policy.label().to_string(),
        scheme: scheme.to_string(),
        runs: args.runs,
        iterations: runs[0].1.iterations,
        log_utility: Stat::of(&energies),
        weighted_throughput: Stat::of(&throughputs),
        results: runs
            .iter()
            .zip(&run_ids)
            .map(|((net, r), id)| RunSummary::new(id.clone(), net, r))
            .collect(),
    };
    let json_path = args.out_dir.join(format!("{stem}.json"));
    fs::write(&json_path, serde_json::to_string_pretty(&report)?)
        .with_context(|| format!("writing {}", json_path.display()))?;
    info!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(RunOutput {
        report,
        csv_path,
        json_path,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationReport {
    pub scenario: String,
    pub scheme: String,
    pub energy: f64,
    pub evaluated: u64,
    pub association: Vec<(String, String)>,
    pub channels: Vec<(String, String)>,
}

/// `enumerate` subcommand.
pub fn cmd_enumerate(args: &EnumerateArgs) -> Result<EnumerationReport> {
    let scenario = resolve_scenario(&args.scenario, args.seed)?;
    let net = scenario.network()?;
    let scheme: Scheme = args.scheme.into();
    let best = enumerate_optimum(&net, scheme).with_context(|| format!("enumerating `{}`", scenario.name))?;
    Ok(EnumerationReport {
        scenario: scenario.name.clone(),
        scheme: scheme.to_string(),
        energy: best.energy,
        evaluated: best.evaluated,
        association: net
            .clients
            .iter()
            .zip(&best.config.association)
            .map(|(c, &n)| (c.id.clone(), net.vaps[n].id.clone()))
            .collect(),
        channels: net
            .vaps
            .iter()
            .zip(&best.config.channel)
            .map(|(v, &c)| (v.id.clone(), net.channels[c].id.clone()))
            .collect(),
    })
}

/// Dispatches a parsed command, printing results to `out`.
pub fn execute<W: Write>(cli: &Cli, out: &mut W) -> Result<()> {
    match &cli.command {
        Command::Run(args) => {
            let RunOutput {
                report,
                csv_path,
                json_path,
            } = cmd_run(args)?;
            writeln!(
                out,
                "{} {} {}: {} runs x {} steps",
                report.scenario, report.policy, report.scheme, report.runs, report.iterations
            )?;
            writeln!(
                out,
                "  sum w ln r  mean {:.6}  stddev {:.6}",
                report.log_utility.mean, report.log_utility.stddev
            )?;
            writeln!(
                out,
                "  sum w r     mean {:.6}  stddev {:.6}",
                report.weighted_throughput.mean, report.weighted_throughput.stddev
            )?;
            writeln!(out, "  csv  {}", csv_path.display())?;
            writeln!(out, "  json {}", json_path.display())?;
        }
        Command::Enumerate(args) => {
            let report = cmd_enumerate(args)?;
            if args.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                writeln!(
                    out,
                    "{} ({}): U* = {:.12} over {} configurations",
                    report.scenario, report.scheme, report.energy, report.evaluated
                )?;
                for (ap, ch) in &report.channels {
                    writeln!(out, "  {ap} -> {ch}")?;
                }
                for (client, ap) in &report.association {
                    writeln!(out, "  {client} -> {ap}")?;
                }
            }
        }
        Command::Show(args) => {
            let scenario = resolve_scenario(&args.scenario, args.seed)?;
            write!(out, "{}", scenario.to_toml())?;
        }
    }
    Ok(())
}

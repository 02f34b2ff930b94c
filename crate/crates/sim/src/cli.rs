//! `dsee-anypath` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error, 3 runtime error.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anypath_core::anypath::shortest_anypath_first;
use anypath_core::experiment::{ExperimentError, ExploreCost};
use anypath_core::topology::{parse_topology, TopologyError};
use anypath_core::{BudgetMode, ExperimentConfig, Policy, Topology};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::csv_io::{write_aggregate, write_trace, CsvError};
use crate::format::sig9;
use crate::runner::{run_experiment, run_stats, RunError};
use crate::summary::{render_table, summarize_file, write_plot_data};

#[derive(Debug, Parser)]
#[command(
    name = "dsee-anypath",
    version,
    about = "Anypath routing with learned link probabilities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write CSV results.
    Run(RunArgs),
    /// Compare finished runs from their CSV files.
    Summary(SummaryArgs),
    /// Check a topology file and print its genie distance table.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Dsee,
    Genie,
    Egreedy,
    Thompson,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Dsee => Policy::Dsee,
            PolicyArg::Genie => Policy::Genie,
            PolicyArg::Egreedy => Policy::EGreedy,
            PolicyArg::Thompson => Policy::Thompson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BudgetModeArg {
    PerLink,
    PerHyperlink,
}

impl From<BudgetModeArg> for BudgetMode {
    fn from(m: BudgetModeArg) -> Self {
        match m {
            BudgetModeArg::PerLink => BudgetMode::PerLink,
            BudgetModeArg::PerHyperlink => BudgetMode::PerHyperlink,
        }
    }
}

/// `auto` or a nonnegative real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExploreCostArg(pub ExploreCost);

impl FromStr for ExploreCostArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(ExploreCostArg(ExploreCost::Auto));
        }
        let c: f64 = s
            .parse()
            .map_err(|_| format!("expected `auto` or a number, got {s:?}"))?;
        Ok(ExploreCostArg(ExploreCost::Fixed(c)))
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub topology: PathBuf,
    #[arg(long, default_value_t = 5000)]
    pub horizon: u64,
    #[arg(long, default_value_t = 100)]
    pub epochs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = PolicyArg::Dsee)]
    pub policy: PolicyArg,
    #[arg(long, default_value_t = anypath_core::experiment::DEFAULT_F_SCALE)]
    pub f_scale: f64,
    #[arg(long, value_enum, default_value_t = BudgetModeArg::PerLink)]
    pub budget_mode: BudgetModeArg,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"], default_values_t = [1.0, 1.0])]
    pub prior: Vec<f64>,
    #[arg(long, default_value_t = 0.001)]
    pub min_prob: f64,
    #[arg(long, default_value_t = 1000)]
    pub retry_cap: u32,
    #[arg(long, default_value = "auto")]
    pub explore_cost: ExploreCostArg,
    #[arg(long, default_value = "./out")]
    pub output: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Also write the per-slot trace of every epoch (trace.csv).
    #[arg(long)]
    pub per_epoch: bool,
}

impl RunArgs {
    pub fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            horizon: self.horizon,
            epochs: self.epochs,
            base_seed: self.seed,
            policy: self.policy.into(),
            f_scale: self.f_scale,
            budget_mode: self.budget_mode.into(),
            epsilon: self.epsilon,
            prior_alpha: self.prior[0],
            prior_beta: self.prior[1],
            min_prob: self.min_prob,
            retry_cap: self.retry_cap,
            explore_slot_cost: self.explore_cost.0,
        }
    }
}

#[derive(Debug, Args)]
pub struct SummaryArgs {
    /// Per-slot (trace.csv) or aggregated (aggregate.csv) result files.
    #[arg(required = true)]
    pub csv: Vec<PathBuf>,
    /// Write merged `t` vs. mean time-averaged regret per run to this file.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub topology: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn load_topology(path: &Path) -> Result<Topology, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    parse_topology(&text)
        .map_err(|e: TopologyError| CliError::Validation(format!("{}: {e}", path.display())))
}

fn csv_error(path: &Path, e: CsvError) -> CliError {
    let msg = format!("{}: {e}", path.display());
    if e.is_schema_error() {
        CliError::Validation(msg)
    } else {
        CliError::Runtime(msg)
    }
}

/// Executes a parsed command and returns what it prints on stdout.
pub fn execute(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Validate(args) => cmd_validate(&args.topology),
        Command::Run(args) => cmd_run(args),
        Command::Summary(args) => cmd_summary(args),
    }
}

pub fn cmd_validate(path: &Path) -> Result<String, CliError> {
    let topo = load_topology(path)?;
    let table = shortest_anypath_first(&topo.true_probs(), &topo)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut out = String::new();
    let _ = writeln!(out, "nodes: {}", topo.node_count());
    let _ = writeln!(out, "links: {}", topo.link_count());
    let _ = writeln!(out, "max out-degree: {}", topo.max_out_degree());
    let _ = writeln!(out, "source: {}", topo.source());
    let _ = writeln!(out, "destination: {}", topo.destination());
    let _ = writeln!(out, "genie distances:");
    let _ = writeln!(out, "{:<6}{:<16}forwarding set", "node", "distance");
    for entry in &table.entries {
        let d = if entry.distance.is_finite() {
            format!("{:.10}", entry.distance)
        } else {
            "inf".to_string()
        };
        let set: Vec<String> = entry
            .forwarding_set
            .iter()
            .map(ToString::to_string)
            .collect();
        let _ = writeln!(
            out,
            "{:<6}{:<16}{}",
            entry.node.to_string(),
            d,
            set.join(" ")
        );
    }
    Ok(out
        .lines()
        .map(str::trim_end)
        .collect::<Vec<_>>()
        .join("\n")
        + "\n")
}

pub fn cmd_run(args: &RunArgs) -> Result<String, CliError> {
    let config = args.config();
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let topo = load_topology(&args.topology)?;

    let outcome = run_experiment(&topo, &config, args.jobs).map_err(|e| match e {
        RunError::Experiment(ExperimentError::Config(c)) => CliError::Usage(c.to_string()),
        RunError::Experiment(ExperimentError::GenieUnreachable) => {
            CliError::Validation(e.to_string())
        }
        other => CliError::Runtime(other.to_string()),
    })?;

    let io = |e: std::io::Error| CliError::Runtime(format!("{}: {e}", args.output.display()));
    fs::create_dir_all(&args.output).map_err(io)?;
    let aggregate_path = args.output.join("aggregate.csv");
    let file = File::create(&aggregate_path).map_err(io)?;
    write_aggregate(&outcome.aggregate, BufWriter::new(file))
        .map_err(|e| csv_error(&aggregate_path, e))?;
    if args.per_epoch {
        let trace_path = args.output.join("trace.csv");
        let file = File::create(&trace_path).map_err(io)?;
        write_trace(&outcome.traces, BufWriter::new(file))
            .map_err(|e| csv_error(&trace_path, e))?;
    }

    let stats = run_stats(&outcome);
    let last = outcome.aggregate.last().expect("horizon is at least 1");
    let mut out = String::new();
    let _ = writeln!(out, "policy: {}", config.policy.name());
    let _ = writeln!(
        out,
        "epochs: {}  horizon: {}",
        config.epochs, config.horizon
    );
    let _ = writeln!(
        out,
        "final cumulative regret: {}",
        sig9(last.mean_cum_regret)
    );
    let _ = writeln!(
        out,
        "final time-averaged regret: {}",
        sig9(last.mean_avg_regret)
    );
    let _ = writeln!(
        out,
        "exploration fraction: {}",
        sig9(stats.explore_fraction)
    );
    match stats.delivery_rate {
        Some(rate) => {
            let _ = writeln!(out, "delivery rate: {}", sig9(rate));
        }
        None => {
            let _ = writeln!(out, "delivery rate: -");
        }
    }
    if stats.capped_slots > 0 {
        let _ = writeln!(out, "capped slots: {}", stats.capped_slots);
    }
    let _ = writeln!(out, "wrote {}", args.output.display());
    Ok(out)
}

pub fn cmd_summary(args: &SummaryArgs) -> Result<String, CliError> {
    let rows = args
        .csv
        .iter()
        .map(|p| summarize_file(p).map_err(|e| csv_error(p, e)))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = &args.plot_data {
        let file = File::create(path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        write_plot_data(&rows, BufWriter::new(file)).map_err(|e| csv_error(path, e))?;
    }
    Ok(render_table(&rows))
}

/// Parses `std::env::args`, runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("dsee-anypath").chain(args.iter().copied()))
    }

    #[test]
    fn run_defaults() {
        let cli = parse(&["run", "--topology", "t.topo"]).unwrap();
        let Command::Run(args) = cli.command else {
            panic!()
        };
        let cfg = args.config();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(args.output, PathBuf::from("./out"));
        assert_eq!(args.jobs, 1);
        assert!(!args.per_epoch);
    }

    #[test]
    fn run_flags() {
        let cli = parse(&[
            "run",
            "--topology",
            "t",
            "--policy",
            "egreedy",
            "--epsilon",
            "0.2",
            "--prior",
            "2",
            "3",
            "--budget-mode",
            "per-hyperlink",
            "--explore-cost",
            "4.5",
            "--f-scale",
            "0.5",
            "--per-epoch",
        ])
        .unwrap();
        let Command::Run(args) = cli.command else {
            panic!()
        };
        let cfg = args.config();
        assert_eq!(cfg.policy, Policy::EGreedy);
        assert_eq!((cfg.prior_alpha, cfg.prior_beta), (2.0, 3.0));
        assert_eq!(cfg.budget_mode, BudgetMode::PerHyperlink);
        assert_eq!(cfg.explore_slot_cost, ExploreCost::Fixed(4.5));
        assert_eq!(cfg.f_scale, 0.5);
        assert!(args.per_epoch);
    }

    #[test]
    fn usage_errors() {
        assert!(parse(&["run"]).is_err());
        assert!(parse(&["run", "--topology", "t", "--bogus"]).is_err());
        assert!(parse(&["run", "--topology", "t", "--policy", "ucb"]).is_err());
        assert!(parse(&["run", "--topology", "t", "--explore-cost", "lots"]).is_err());
        assert!(parse(&["summary"]).is_err());
        assert!(parse(&["validate"]).is_err());
        assert!(parse(&["frobnicate"]).unwrap_err().use_stderr());
    }
}

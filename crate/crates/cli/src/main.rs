//! `ipstab`: run, check and export hierarchical self-stabilizing IP-risk scenarios.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ipstab_core::PolicyKind;

/// Exit status when every run stabilized.
pub const EXIT_STABLE: u8 = 0;
/// Exit status for bad input or arguments.
pub const EXIT_INPUT: u8 = 1;
/// Exit status when some run used up its move budget.
pub const EXIT_BUDGET: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "ipstab", version, about = "Hierarchical self-stabilizing BW/MIS/MDS protocols for IP-risk scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario once or over a seed range and report the result.
    Run(RunArgs),
    /// Exhaustive oracles on a graph (or a scenario for `joint`).
    Oracle(OracleArgs),
    /// Show that equal priority livelocks where the hierarchy stabilizes.
    DemoNonconvergence(DemoArgs),
    /// Run a scenario and write one DOT graph per algorithm.
    ExportDot(ExportArgs),
    /// Parse and assemble a scenario or graph without running it.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitMode {
    AllOut,
    Random,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
struct ScenarioArgs {
    /// Scenario file, built-in name (multi-list, contention, three-tier) or `random:N[:SEED]`.
    #[arg(long)]
    scenario: String,
    /// Use the compacted supplier graph for MIS tiers.
    #[arg(long, conflicts_with = "full_supplier_graph")]
    compacted: bool,
    /// Use the full column-level supplier graph for MIS tiers.
    #[arg(long)]
    full_supplier_graph: bool,
    /// Treat a supplier as public (repeatable).
    #[arg(long = "public-supplier", value_name = "NAME")]
    public_supplier: Vec<String>,
    /// Give every algorithm equal priority on one shared variable per column.
    #[arg(long)]
    equal_priority: bool,
}

#[derive(Debug, Clone, Args)]
struct ExecArgs {
    #[arg(long, default_value = "central-random", value_parser = parse_policy)]
    scheduler: PolicyKind,
    /// Seed for the initial configuration and the scheduler.
    #[arg(long, default_value_t = 0, conflicts_with = "seeds")]
    seed: u64,
    /// Inclusive seed range `A..B` for a sweep.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<(u64, u64)>,
    #[arg(long, value_enum, default_value = "random")]
    init: InitMode,
    /// Initial values for `--init file`: lines of `<algorithm> <node> <state>`.
    #[arg(long, value_name = "PATH")]
    init_file: Option<PathBuf>,
    /// Move budget; defaults to ten times the combined bound.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_moves: Option<u64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    exec: ExecArgs,
    /// Write report, trace, bounds and DOT files here.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Worker threads for seed sweeps.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Chain,
    MisCheck,
    MdsCheck,
    Joint,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    which: Which,
    /// Graph file (text format) for chain, mis-check and mds-check.
    #[arg(long, value_name = "PATH", required_unless_present = "scenario")]
    graph: Option<PathBuf>,
    /// Scenario for `joint`.
    #[arg(long)]
    scenario: Option<String>,
    /// Comma-separated node names to check instead of enumerating.
    #[arg(long)]
    set: Option<String>,
    #[arg(long = "public-supplier", value_name = "NAME")]
    public_supplier: Vec<String>,
    /// Largest graph the enumeration accepts.
    #[arg(long, default_value_t = ipstab_core::oracles::DEFAULT_CAP)]
    cap: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct DemoArgs {
    /// Only run the prioritized system.
    #[arg(long)]
    hierarchical_only: bool,
    #[arg(long = "public-supplier", value_name = "NAME")]
    public_supplier: Vec<String>,
    /// Deterministic scheduler for the equal-priority run.
    #[arg(long, default_value = "central-adversarial-min-id", value_parser = parse_policy)]
    scheduler: PolicyKind,
    #[arg(long, default_value_t = 1_000_000)]
    max_moves: u64,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    exec: ExecArgs,
    /// Directory for `<algorithm>.dot`; prints to stdout when absent.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, required_unless_present = "graph")]
    scenario: Option<String>,
    #[arg(long, value_name = "PATH")]
    graph: Option<PathBuf>,
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse()
}

fn parse_seeds(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or("expected `A..B`")?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad start: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad end: {e}"))?;
    if a > b {
        return Err(format!("empty seed range {a}..{b}"));
    }
    Ok((a, b))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_STABLE });
        }
    };
    let result = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::DemoNonconvergence(a) => commands::demo(a),
        Command::ExportDot(a) => commands::export_dot(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

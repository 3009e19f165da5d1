//! `swarmtraj` — scenario generation, simulation runs, parameter sweeps and
//! single-primitive inspection.
//!
//! Exit codes: 0 success, 1 run failure (collision, timeout or deadlock),
//! 2 usage error, 3 internal error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "swarmtraj", version, about = "Decentralized multi-robot trajectory replanning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a scenario file.
    Scenario(ScenarioArgs),
    /// Simulate a scenario and write trajectories and metrics.
    Run(RunArgs),
    /// Repeat runs over seeds, robot counts and modes; one row per configuration.
    Sweep(SweepArgs),
    /// Solve a single minimum-time primitive.
    Primitive(PrimitiveArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GenerateArgs {
    /// Scenario family: circle8, hetero, density or random.
    #[arg(long = "preset", value_name = "NAME")]
    pub preset: Option<String>,
    /// Number of robots (defaults to the preset's).
    #[arg(long)]
    pub robots: Option<usize>,
    /// Occupancy fraction; the box is scaled to match it.
    #[arg(long)]
    pub occupancy: Option<f64>,
    /// Box extents. With --occupancy only the proportions are used.
    #[arg(long = "box", value_name = "X,Y,Z", value_parser = commands::parse_triple)]
    pub box_extents: Option<[f64; 3]>,
    /// Robot model(s), cycled: hummingbird, firefly, neo.
    #[arg(long, value_delimiter = ',')]
    pub model: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ScenarioArgs {
    #[command(flatten)]
    pub generate: GenerateArgs,
    /// Directory for scenario.toml; printed to stdout when omitted.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Overrides applied on top of the defaults or a --config file.
#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// Run configuration (TOML); flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Cost weights (TOML with q_dynm, q_obs, q_lim, k_t, k_p).
    #[arg(long, value_name = "FILE")]
    pub weights: Option<PathBuf>,
    /// shared or predicted.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long = "replan-hz")]
    pub replan_hz: Option<f64>,
    #[arg(long = "sim-hz")]
    pub sim_hz: Option<f64>,
    /// Simulated seconds before the run is stopped.
    #[arg(long = "time-budget")]
    pub time_budget: Option<f64>,
    #[arg(long = "goal-tol")]
    pub goal_tol: Option<f64>,
    /// perfect or lag.
    #[arg(long)]
    pub plant: Option<String>,
    /// Lag plant rate constant (1/s).
    #[arg(long = "lag-rate")]
    pub lag_rate: Option<f64>,
    /// Lag plant acceleration noise bound (m/s²).
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long = "q-dynm")]
    pub q_dynm: Option<f64>,
    #[arg(long = "q-obs")]
    pub q_obs: Option<f64>,
    #[arg(long = "q-lim")]
    pub q_lim: Option<f64>,
    #[arg(long = "k-t")]
    pub k_t: Option<f64>,
    #[arg(long = "k-p")]
    pub k_p: Option<f64>,
    /// Collision look-ahead (s).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Duration tolerance of the optimizer (s).
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Scenario file; generated from the flags below when omitted.
    #[arg(long, value_name = "FILE")]
    pub scenario: Option<PathBuf>,
    #[command(flatten)]
    pub generate: GenerateArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output directory for trajectories.csv, metrics.toml, timing.toml and
    /// events.toml.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Scenario family: circle8, hetero, density or random.
    #[arg(long = "preset", value_name = "NAME", default_value = "random")]
    pub preset: String,
    /// Robot counts, e.g. 2,4,8.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub robots: Vec<usize>,
    /// Occupancy fractions, e.g. 0.1,0.2.
    #[arg(long, value_delimiter = ',')]
    pub occupancy: Vec<f64>,
    /// Modes, e.g. shared,predicted.
    #[arg(long = "modes", value_delimiter = ',', default_value = "shared")]
    pub modes: Vec<String>,
    /// Number of seeds per configuration.
    #[arg(long, default_value_t = 25)]
    pub seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Directory for sweep.toml.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PrimitiveArgs {
    /// Start position.
    #[arg(long, value_name = "X,Y,Z", value_parser = commands::parse_triple, default_value = "0,0,0")]
    pub from: [f64; 3],
    #[arg(long, value_name = "X,Y,Z", value_parser = commands::parse_triple, default_value = "0,0,0")]
    pub vel: [f64; 3],
    #[arg(long, value_name = "X,Y,Z", value_parser = commands::parse_triple, default_value = "0,0,0")]
    pub acc: [f64; 3],
    /// Goal position.
    #[arg(long, value_name = "X,Y,Z", value_parser = commands::parse_triple)]
    pub to: [f64; 3],
    #[arg(long = "t-min")]
    pub t_min: Option<f64>,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Time this many solves and print timing statistics.
    #[arg(long, value_name = "N")]
    pub bench: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Scenario(a) => commands::scenario(a),
        Command::Run(a) => commands::run(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Primitive(a) => commands::primitive(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

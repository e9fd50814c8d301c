use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dpmeter_cli::config::load_config_file;
use dpmeter_cli::{cmd_ingest, cmd_simulate, cmd_sweep, cmd_verify_chain, CliError, Outcome, RunConfig};

/// Differentially private smart-meter reporting on a simulated ledger.
#[derive(Parser)]
#[command(name = "dpmeter", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate profile CSVs (or generate synthetic ones) and write normalized copies.
    Ingest(RunArgs),
    /// Run one day for every meter through the ledger; write chain.jsonl and protected.csv.
    Simulate(RunArgs),
    /// Run the MAE sweep and write mae.csv, mae.json and trace files.
    Sweep(RunArgs),
    /// Validate a JSONL chain export.
    VerifyChain { path: PathBuf },
}

/// Every config key as a flag. Lists are comma separated.
#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    meters: Option<String>,
    #[arg(long)]
    mean_wh: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    delta_reading: Option<String>,
    #[arg(long)]
    delta_db: Option<String>,
    #[arg(long)]
    mechanism: Option<String>,
    #[arg(long)]
    days: Option<String>,
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long)]
    stakes: Option<String>,
    #[arg(long)]
    slots_per_block: Option<String>,
    #[arg(long)]
    with_ground_truth: bool,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => load_config_file(path)?,
            None => BTreeMap::new(),
        };
        let pairs = [
            ("profile", self.profile),
            ("meters", self.meters),
            ("mean_wh", self.mean_wh),
            ("seed", self.seed),
            ("out", self.out),
            ("epsilon", self.epsilon),
            ("delta_reading", self.delta_reading),
            ("delta_db", self.delta_db),
            ("mechanism", self.mechanism),
            ("days", self.days),
            ("nodes", self.nodes),
            ("stakes", self.stakes),
            ("slots_per_block", self.slots_per_block),
            ("with_ground_truth", self.with_ground_truth.then(|| "true".to_string())),
        ];
        let flags = pairs
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect();
        RunConfig::resolve(&file, &flags)
    }
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Ingest(args) => cmd_ingest(&args.resolve()?),
        Command::Simulate(args) => cmd_simulate(&args.resolve()?),
        Command::Sweep(args) => cmd_sweep(&args.resolve()?),
        Command::VerifyChain { path } => cmd_verify_chain(&path),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dpmeter: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

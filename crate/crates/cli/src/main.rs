use std::path::PathBuf;

use clap::{Parser, Subcommand};

use jbb_cli::{commands, scenario, CliError, OutputFormat};

#[derive(Parser)]
#[command(name = "jbb", version, about = "Simultaneous beamformed service and broadcast coverage: rates, power curves and verification")]
struct Cli {
    /// Scenario file (JSON).
    #[arg(long, global = true, value_name = "path")]
    scenario: Option<PathBuf>,
    /// Overrides the Monte Carlo seed from the scenario.
    #[arg(long, global = true, value_name = "u64")]
    seed: Option<u64>,
    /// Worker threads for the parallel paths; default lets rayon decide.
    #[arg(long, global = true, value_name = "n")]
    threads: Option<usize>,
    /// Directory receiving the generated files.
    #[arg(long, global = true, default_value = ".", value_name = "dir")]
    out: PathBuf,
    /// Stdout format; files are always written in their native format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form rates at the scenario operating point.
    Rates,
    /// Constant-rate power curves with intersections and the power saving.
    Curves,
    /// Monte Carlo checks of the closed-form expressions.
    Verify,
    /// Required beamforming power across uplink pilot SNRs.
    Sweep,
    /// Operating point comparison at the curve intersections.
    Table1,
}

fn run(cli: &Cli) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("threads: {}", e)))?;
    }
    let path = cli
        .scenario
        .as_ref()
        .ok_or_else(|| CliError::Validation("scenario: --scenario <path> is required".into()))?;
    let prepared = scenario::load(path, cli.seed)?;
    match cli.command {
        Command::Rates => commands::cmd_rates(&prepared, &cli.out, cli.format),
        Command::Curves => commands::cmd_curves(&prepared, &cli.out, cli.format),
        Command::Verify => commands::cmd_verify(&prepared, &cli.out, cli.format),
        Command::Sweep => commands::cmd_sweep(&prepared, &cli.out, cli.format),
        Command::Table1 => commands::cmd_table1(&prepared, &cli.out, cli.format),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => print!("{}", text),
        Err(e) => {
            eprintln!("error: {}", e);
            std::process::exit(e.exit_code());
        }
    }
}

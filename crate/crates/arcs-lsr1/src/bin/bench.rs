use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use arcs_lsr1::bench::{cmd_check, cmd_compare, cmd_run, cmd_sweep, CheckLevel};

#[derive(Parser)]
#[command(
    name = "bench",
    about = "Optimization benchmark harness: single runs, comparisons, sweeps, and invariant checks"
)]
struct Cli {
    /// Overrides the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for trace CSVs (overrides the config file).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs one optimizer on one problem and writes a trace CSV.
    Run { config: PathBuf },
    /// Runs every optimizer in the config on the same problem and seed.
    Compare { config: PathBuf },
    /// Grid sweep over history size, per-batch iterations and batch size.
    Sweep { config: PathBuf },
    /// Runs the invariant and oracle check battery.
    Check {
        #[arg(long, value_enum, default_value_t = Level::Fast)]
        level: Level,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Fast,
    Full,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = cli.out_dir.as_deref();
    let result = match cli.command {
        Command::Run { config } => cmd_run(&config, cli.seed, out_dir).map(|_| ()),
        Command::Compare { config } => cmd_compare(&config, cli.seed, out_dir).map(|_| ()),
        Command::Sweep { config } => cmd_sweep(&config, cli.seed, out_dir).map(|_| ()),
        Command::Check { level } => {
            let level = match level {
                Level::Fast => CheckLevel::Fast,
                Level::Full => CheckLevel::Full,
            };
            let results = cmd_check(level);
            let mut failed = 0;
            for r in &results {
                match &r.outcome {
                    Ok(()) => println!("check {}: ok", r.name),
                    Err(msg) => {
                        failed += 1;
                        println!("check {}: FAILED ({msg})", r.name);
                    }
                }
            }
            println!("{} checks, {} failed", results.len(), failed);
            if failed > 0 {
                return ExitCode::FAILURE;
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use smoothing_lab::harness::{default_config, registry_listing, run_file};

#[derive(Parser)]
#[command(name = "smoothing-lab", version, about = "Local smoothing verification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment of a config; exit 0 if all pass, 1 on failures, 2 on config errors.
    Run {
        config: PathBuf,
        /// Overrides the config's `output_dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// List the experiment kinds and the relation each one checks.
    ListExperiments,
    /// Write a config with one experiment of every kind.
    EmitDefaultConfig { path: PathBuf },
}

const THREADS_VAR: &str = "SMOOTHING_LAB_THREADS";

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("{THREADS_VAR}: expected a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("{THREADS_VAR}: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListExperiments => {
            print!("{}", registry_listing());
            ExitCode::SUCCESS
        }
        Command::EmitDefaultConfig { path } => match std::fs::write(&path, default_config().to_toml()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                ExitCode::from(2)
            }
        },
        Command::Run { config, output_dir } => {
            if let Err(e) = configure_threads() {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
            match run_file(&config, output_dir.as_deref()) {
                Ok(run) => {
                    let summary = std::fs::read_to_string(&run.summary_path).unwrap_or_default();
                    print!("{summary}");
                    if !run.pass() {
                        for o in run.outcomes.iter().filter(|o| !o.pass()) {
                            eprintln!("failed: {} (see {})", o.name, o.csv.display());
                        }
                    }
                    ExitCode::from(run.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use decolab::scenario::{run_file, validate_file};

/// Run decoherence scenarios described in JSON.
///
/// DECOLAB_THREADS caps worker threads (0 or unset = one per core).
#[derive(Parser)]
#[command(name = "decolab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario and write its artifacts plus manifest.json.
    Run {
        file: PathBuf,
        /// Output directory (overrides the scenario's "out").
        #[arg(long)]
        out: Option<PathBuf>,
        /// RNG seed (overrides the scenario's "seed").
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a scenario without running it.
    Validate { file: PathBuf },
}

fn configure_threads() -> Result<(), String> {
    let threads = match std::env::var("DECOLAB_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| format!("DECOLAB_THREADS={v:?} is not a thread count"))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("decolab: {e}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::Run { file, out, seed } => match run_file(&file, out.as_deref(), seed) {
            Ok(manifest) => {
                for f in &manifest.files {
                    println!("{}  {}", f.sha256, f.path);
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("decolab: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::Validate { file } => match validate_file(&file) {
            Ok(diags) if diags.is_empty() => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Ok(diags) => {
                for d in &diags {
                    println!("{d}");
                }
                ExitCode::from(2)
            }
            Err(e) => {
                eprintln!("decolab: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use a2i_cli::{run, Experiment, Overrides};
use clap::Parser;

/// Runs one experiment from a TOML configuration file and writes
/// `<prefix>.csv` plus `<prefix>.meta.json`.
#[derive(Debug, Parser)]
#[command(name = "a2i", version)]
struct Args {
    /// coherence-sweep, phase-transition, rejection-sweep or measure-recover.
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output`.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, env = "A2I_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": "usage", "message": e.to_string().trim() })
            );
            return ExitCode::from(2);
        }
    };
    let experiment: Experiment = match args.experiment.parse() {
        Ok(e) => e,
        Err(msg) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": "config", "message": msg })
            );
            return ExitCode::from(2);
        }
    };
    let overrides = Overrides {
        seed: args.seed,
        out: args.out,
        threads: args.threads,
    };
    match run(experiment, &args.config, &overrides) {
        Ok(out) => {
            for f in &out.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

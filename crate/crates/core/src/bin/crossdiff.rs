use clap::{Parser, Subcommand};
use crossdiff::cli::{self, Command};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "crossdiff", version, about = "Experiments on degenerate cross-diffusion systems")]
struct Args {
    #[command(subcommand)]
    command: Sub,
    /// TOML experiment file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (created if missing)
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; results do not depend on this
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Integrate the regularized system and write snapshots and diagnostics
    Simulate,
    /// Evaluate the weighted GN-BMO integrals on a smooth corpus
    VerifyGnbmo,
    /// BMO seminorm of a snapshot file
    Bmo,
    /// Regularity diagnostics for every snapshot of a trajectory
    Diagnose,
    /// Two-solution deviation against the Grönwall envelope
    Uniqueness,
    /// Condition constant and L^∞–L^p ratio for the P-transform
    Diagonalize,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_USAGE as u8 } else { 0 });
        }
    };
    let command = match args.command {
        Sub::Simulate => Command::Simulate,
        Sub::VerifyGnbmo => Command::VerifyGnbmo,
        Sub::Bmo => Command::Bmo,
        Sub::Diagnose => Command::Diagnose,
        Sub::Uniqueness => Command::Uniqueness,
        Sub::Diagonalize => Command::Diagonalize,
    };
    let Some(path) = args.config else {
        eprintln!("error: `{}` needs --config <path>", command.name());
        return ExitCode::from(cli::EXIT_USAGE as u8);
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(cli::EXIT_USAGE as u8);
        }
    }
    let mut cfg = match cli::parse_config(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(cli::EXIT_USAGE as u8);
        }
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    match cli::run(command, &cfg, &args.out, &base) {
        Ok(outcome) => {
            // a closed stdout (e.g. piped into `head`) is not an error
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", outcome.message);
            for f in &outcome.files {
                let _ = writeln!(out, "  wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code_for(&e) as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polycap::cli::{error_exit_code, run, ExperimentConfig, ExperimentKind, RunOptions};

#[derive(Parser)]
#[command(name = "polycap", version, about = "Polyharmonic capacities and small-hole eigenvalue asymptotics")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Experiment file (TOML with [domain] [hole] [operator] [solver] [experiment]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; POLYCAP_OUT takes precedence.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the stiffness matrix as (row, col, value) triplets.
    #[arg(long, global = true)]
    dump_matrix: bool,
    /// Write capacitary potentials / eigenvectors as node tables.
    #[arg(long, global = true)]
    dump_potential: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Condenser capacities of the scaled holes.
    Cap,
    /// Eigenvalues with and without holes.
    Eig,
    /// Capacity and eigenvalue sweep over eps.
    Sweep,
    /// Sweep plus the full expansion checks.
    Expand,
    /// Sweep on the radial model.
    Radial,
    /// Property suite.
    Check,
}

impl From<Command> for ExperimentKind {
    fn from(c: Command) -> Self {
        match c {
            Command::Cap => ExperimentKind::Cap,
            Command::Eig => ExperimentKind::Eig,
            Command::Sweep => ExperimentKind::Sweep,
            Command::Expand => ExperimentKind::Expand,
            Command::Radial => ExperimentKind::Radial,
            Command::Check => ExperimentKind::Check,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let kind = ExperimentKind::from(args.command);
    let cfg = match &args.config {
        Some(path) => match ExperimentConfig::from_file(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(error_exit_code(&e) as u8);
            }
        },
        None if kind == ExperimentKind::Check => ExperimentConfig::default(),
        None => {
            eprintln!("--config is required for `{kind}`");
            return ExitCode::from(2);
        }
    };
    let out = std::env::var_os("POLYCAP_OUT").map(PathBuf::from).unwrap_or(args.out);
    let opts = RunOptions {
        out,
        dump_matrix: args.dump_matrix,
        dump_potential: args.dump_potential,
    };
    let threads = args.threads.or(cfg.solver.threads).unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("thread pool: {e}");
            return ExitCode::from(3);
        }
    };
    match pool.install(|| run(&cfg, kind, &opts)) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}

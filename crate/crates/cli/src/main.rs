use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};
use slc_cli::{run, CliError, Command, ExitCode, ExperimentConfig, Overrides};

/// Sampling-based learning control: train robust control fields for
/// fluctuating superconducting-qubit models and test them by Monte Carlo.
#[derive(Debug, Parser)]
#[command(name = "slc", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Experiment configuration (flat TOML).
    #[arg(long, global = true, env = "SLC_CONFIG")]
    config: Option<PathBuf>,

    #[arg(long, global = true, env = "SLC_SEED_TRAIN")]
    seed_train: Option<u64>,

    #[arg(long, global = true, env = "SLC_SEED_TEST")]
    seed_test: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, env = "SLC_OUT")]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "SLC_THREADS")]
    threads: Option<usize>,

    /// Also write per-sample fluctuation values and fidelities (`test`).
    #[arg(long, global = true, env = "SLC_DUMP_SAMPLES")]
    dump_samples: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Train a field on the configured training grid.
    Train,
    /// Monte-Carlo test of a saved field.
    Test {
        /// Field file written by `train`.
        #[arg(long)]
        field: PathBuf,
    },
    /// Train and test at every bound in `sweep_thetas`.
    SweepBound,
    /// Train and test for every grid size in `sweep_n_f`.
    SweepNf,
    /// Regenerate the data behind a figure (1, 2, 4, 5 or 6).
    Reproduce { figure: u32 },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitCode::Config as i32 } else { 0 };
            let _ = e.print();
            process::exit(code);
        }
    };
    process::exit(match execute(cli) {
        Ok(code) => code as i32,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as i32
        }
    });
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    let command = match cli.command {
        Cmd::Train => Command::Train,
        Cmd::Test { field } => Command::Test { field },
        Cmd::SweepBound => Command::SweepBound,
        Cmd::SweepNf => Command::SweepNf,
        Cmd::Reproduce { figure } => Command::Reproduce { figure },
    };
    let config = cli.config.as_deref().map(ExperimentConfig::load).transpose()?;
    let overrides = Overrides { seed_train: cli.seed_train, seed_test: cli.seed_test, out: cli.out, dump_samples: cli.dump_samples };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("threads: must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("threads: {e}")))?;
    let outcome = pool.install(|| run(&command, config, &overrides))?;
    for line in &outcome.summary {
        println!("{line}");
    }
    Ok(outcome.exit)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use specopt::experiment::config::SweepAxis;
use specopt::experiment::{self, CommandOutput, ExperimentError};
use specopt::par::Execution;

/// Spectral collaborative optimization experiments.
#[derive(Parser)]
#[command(name = "specopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config (for `decompose`, a graph file).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run independent trials on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Eigendecompose a graph's Laplacian and write basis.json.
    Decompose(Common),
    /// Train every configured variant and seed.
    Train(Common),
    /// Sweep one configuration axis over a list of values.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: Option<SweepAxis>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
    },
    /// Compare filtered and unfiltered reconstructions of noisy smooth fields.
    Denoise(Common),
}

fn run(cli: Cli) -> Result<CommandOutput, ExperimentError> {
    match cli.command {
        Command::Decompose(c) => experiment::cmd_decompose(&c.config, c.out.as_deref()),
        Command::Train(c) => experiment::cmd_train(&c.config, c.out.as_deref(), c.execution()),
        Command::Sweep {
            common,
            axis,
            values,
        } => experiment::cmd_sweep(
            &common.config,
            common.out.as_deref(),
            axis,
            values,
            common.execution(),
        ),
        Command::Denoise(c) => experiment::cmd_denoise(&c.config, c.out.as_deref(), c.execution()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            if out.failed {
                eprintln!("error: one or more runs diverged (see summary)");
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

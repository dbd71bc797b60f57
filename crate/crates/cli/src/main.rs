use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use it2fgp_cli::api::{serve, AppState};
use it2fgp_cli::commands::{self, SolveArgs, SolverArgs};
use it2fgp_cli::CliError;

/// Interactive interval type-2 fuzzy goal programming for signomial
/// multiobjective problems.
#[derive(Debug, Parser)]
#[command(name = "it2fgp", version, about)]
struct Cli {
    /// Treat trapezoid ordering problems as errors.
    #[arg(long, global = true)]
    strict_validation: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a problem file and report warnings.
    Validate { file: PathBuf },
    /// Replace fuzzy coefficients by their expected values.
    Defuzzify {
        file: PathBuf,
        /// Write the crisp program here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Individual optima of every objective and the resulting variable box.
    Payoff {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run a session non-interactively with scripted decisions.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Decision script: {"decisions":[{"verdict":"revise","targets":[0]}, …]}.
        #[arg(long, value_name = "FILE")]
        decisions: Option<PathBuf>,
        /// Print each goal LP to stderr.
        #[arg(long)]
        dump_lp: bool,
        /// Write the session trace here.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        /// Print the trace as JSON instead of a summary.
        #[arg(long)]
        json: bool,
    },
    /// Drive a session from the terminal.
    Interactive {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        dump_lp: bool,
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
    },
    /// Serve the session API over HTTP on localhost.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Persist each session's trace as <dir>/<id>.json.
        #[arg(long, value_name = "DIR")]
        trace_dir: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let strict = cli.strict_validation;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Validate { file } => commands::validate(&file, strict, &mut out)?,
        Command::Defuzzify { file, output } => commands::defuzzify(&file, strict, output.as_deref(), &mut out)?,
        Command::Payoff { file, solver, json } => commands::payoff(&file, strict, &solver, json, &mut out)?,
        Command::Solve { file, solver, decisions, dump_lp, trace, json } => {
            let args = SolveArgs { strict, solver, decisions, dump_lp, trace, json };
            commands::solve(&file, &args, &mut out)?;
        }
        Command::Interactive { file, solver, dump_lp, trace } => {
            let args = SolveArgs { strict, solver, dump_lp, trace, ..SolveArgs::default() };
            commands::interactive(&file, &args, &mut io::stdin().lock(), &mut out)?;
        }
        Command::Serve { port, trace_dir, solver } => {
            if let Some(dir) = &trace_dir {
                std::fs::create_dir_all(dir)?;
            }
            let state = AppState::new(solver.session(), trace_dir);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(state, port))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let filter = EnvFilter::try_from_env("IT2FGP_LOG").unwrap_or_else(|_| EnvFilter::new("warn"));
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(io::stderr).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Command-line front end for `gggp-core`.
//!
//! Every command renders its full report before anything is written, so a
//! run produces the same bytes regardless of thread count. [`execute`] is
//! the whole program minus process exit; the binary is a thin wrapper.

mod commands;
mod params;
mod render;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use params::ParamArgs;
pub use render::format_number;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_SUITE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gggp", version, about = "Threshold equilibria of the Gamma-Poisson global game")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    #[command(flatten)]
    pub params: ParamArgs,

    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub n_samples: u64,

    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for the estimators (default: all cores). Results do
    /// not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Potential maximizer, baseline thresholds and the existence condition.
    Threshold {
        /// Upper end of the threshold search range.
        #[arg(long)]
        tau_max: Option<u32>,
    },
    /// Recompute the nine reference rows and compare.
    Table,
    /// Mean-field potential curve for plotting.
    Potential {
        #[arg(long)]
        tau_max: Option<u32>,
    },
    /// Round-robin best-response dynamics with a final deviation audit.
    Dynamics {
        /// Initial thresholds: one value for every agent or a comma list.
        /// Values are integers, -1, `inf`, and `never` (low) or `always` (high).
        #[arg(long, default_value = "0")]
        init: String,
        #[arg(long, default_value_t = 50)]
        max_rounds: usize,
        /// Skip the Monte Carlo audit (the quadrature audit always runs).
        #[arg(long)]
        no_mc_audit: bool,
    },
    /// Run the invariant suites.
    Check {
        /// Restrict to these suites (repeatable).
        #[arg(long)]
        suite: Vec<String>,
        /// Test hook: flip the sign of the cost estimate.
        #[arg(long, hide = true)]
        inject_cost_sign_flip: bool,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<gggp_core::Error> for CliError {
    fn from(e: gggp_core::Error) -> Self {
        use gggp_core::Error as E;
        match e {
            E::QuadratureFailure { .. } | E::DegenerateBound(_) | E::NoSolution(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

/// A rendered report and the status it should exit with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub report: String,
    pub code: i32,
}

/// Result of a full invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs a parsed command and renders its report.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match cli.global.threads {
        Some(0) => Err(CliError::Validation("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?
            .install(|| commands::dispatch(cli)),
        None => commands::dispatch(cli),
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// `--out` if given. Never exits the process.
pub fn execute<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Invocation { code, stdout: text, stderr: String::new() }
            } else {
                Invocation { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let (outcome, stderr) = match run(&cli) {
        Ok(o) => (o, String::new()),
        Err(e) => {
            return Invocation { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") };
        }
    };
    match &cli.global.out {
        Some(path) => match std::fs::write(path, &outcome.report) {
            Ok(()) => Invocation { code: outcome.code, stdout: String::new(), stderr },
            Err(e) => Invocation {
                code: EXIT_VALIDATION,
                stdout: String::new(),
                stderr: format!("error: writing {}: {e}\n", path.display()),
            },
        },
        None => Invocation { code: outcome.code, stdout: outcome.report, stderr },
    }
}

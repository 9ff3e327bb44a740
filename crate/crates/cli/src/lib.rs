//! `walkline`: command-line front end for the walk <-> pinned-line
//! dictionary. Subcommands translate preset models across the dictionary,
//! draw exact seeded bridge samples, scan wetting phase grids, tabulate
//! wall potentials, and run the pinned verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 mathematical
//! infeasibility (positivity or convergence loss, vanishing bridges,
//! unstable fits), 3 I/O or configuration problems. Set `WALKLINE_LOG`
//! (e.g. `debug`) for diagnostics on stderr.

pub mod args;
pub mod commands;

pub use args::{Cli, Command, GlobalArgs, LambdaChoice, ResolvedPreset, RunConfig};
pub use commands::dispatch;

use clap::Parser;
use walkline_core::Error;

/// Errors where the requested computation does not exist or cannot be
/// reached, as opposed to a malformed request.
fn infeasible(e: &Error) -> bool {
    matches!(
        e,
        Error::PositivityFailure { .. }
            | Error::NoConvergence { .. }
            | Error::GroundStateMismatch { .. }
            | Error::ZeroBridgeProbability
            | Error::NonpositiveHoldMass { .. }
            | Error::CutoffTooSmall { .. }
            | Error::FitUnstable { .. }
            | Error::TooLarge { .. }
    )
}

/// Parse the process arguments, run, and map the outcome to an exit code.
pub fn run() -> i32 {
    let env = env_logger::Env::new().filter("WALKLINE_LOG");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let config = RunConfig::from_cli(cli);
    match dispatch(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if infeasible(&e) {
                2
            } else {
                3
            }
        }
    }
}

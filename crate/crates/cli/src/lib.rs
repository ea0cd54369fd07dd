//! Command-line front end for the converse solvers.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
mod input;
mod output;

pub use input::{parse_eps_schedule, parse_system};

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for I/O failures and other unexpected errors.
pub const EXIT_FAILURE: i32 = 1;
/// Exit code for inputs that violate a solver precondition.
pub const EXIT_PRECONDITION: i32 = 2;
/// Exit code when a solver exhausts its schedule without a verified solution.
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "converse", version, about = "Reparametrize circle functions and Hill potentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find a circle diffeomorphism making f orthogonal to a Chebyshev system.
    Shk(ShkArgs),
    /// Reparametrize a potential on [0, π] so the Hill curve closes up.
    Ghys(GhysArgs),
    /// Find a ±1 step function with few intervals orthogonal to a basis.
    HobbyRice(HobbyRiceArgs),
    /// Report the residuals and sign changes of f against a system.
    Verify(VerifyArgs),
    /// Build the step function of a sphere point, or the alternating step of a system.
    StepSpace(StepSpaceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output directory for report.json and the CSV/SVG artifacts.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ShkArgs {
    /// Expression in x, or @file.csv with columns x,value.
    #[arg(long)]
    pub f: String,
    /// trig:K or custom:@basis.json
    #[arg(long)]
    pub system: String,
    /// Target residual after normalization by the alternation level.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Comma-separated stretch parameters, tried in order.
    #[arg(long, default_value = "1e-2,1e-3,1e-4")]
    pub eps_schedule: String,
    /// Samples written to the CSV artifacts.
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct GhysArgs {
    /// Potential on [0, π]: expression in x, or @file.csv.
    #[arg(long)]
    pub k: String,
    /// Bound on the recovered Schwarzian potential residual.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[arg(long, default_value = "1e-2,1e-3,1e-4")]
    pub eps_schedule: String,
    /// Frame integration steps over [0, π]; verification uses four times as many.
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct HobbyRiceArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Starting points tried before giving up.
    #[arg(long, default_value_t = 32)]
    pub seeds: usize,
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub system: String,
    /// Residuals below this count as orthogonal.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct StepSpaceArgs {
    /// Comma-separated sphere coordinates; normalized before use.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Domain length used with --point when no system is given.
    #[arg(long, default_value_t = 1.0)]
    pub domain: f64,
    /// With --point, moments are reported against this system; alone, its alternating
    /// orthogonal step is computed.
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    #[command(flatten)]
    pub common: Common,
}

/// Maps an error to the documented exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<converse_core::Error>() {
        Some(converse_core::Error::ConvergenceFailure { .. }) => EXIT_CONVERGENCE,
        Some(e) if e.is_precondition() => EXIT_PRECONDITION,
        _ => EXIT_FAILURE,
    }
}

/// Runs one command, writing artifacts and a summary on stdout. Returns the exit code;
/// failures are described on stderr and, when possible, in `report.json`.
pub fn run(cli: Cli) -> i32 {
    let (out, name) = match &cli.command {
        Command::Shk(a) => (a.common.out.clone(), "shk"),
        Command::Ghys(a) => (a.common.out.clone(), "ghys"),
        Command::HobbyRice(a) => (a.common.out.clone(), "hobby-rice"),
        Command::Verify(a) => (a.common.out.clone(), "verify"),
        Command::StepSpace(a) => (a.common.out.clone(), "step-space"),
    };
    let result = match cli.command {
        Command::Shk(a) => commands::shk(&a),
        Command::Ghys(a) => commands::ghys(&a),
        Command::HobbyRice(a) => commands::hobby_rice(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::StepSpace(a) => commands::step_space(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(err) => {
            let code = exit_code(&err);
            eprintln!("error: {err:#}");
            let _ = output::write_failure(&out, name, code, &err);
            code
        }
    }
}

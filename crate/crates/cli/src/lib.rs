//! Command-line driver: convergence tables, single solves, VTK export and
//! the verification suites.

pub mod commands;
pub mod config;
pub mod vtk;

use clap::{Parser, Subcommand};

pub use commands::{run, CliError};
pub use config::{CommandKind, RawArgs, RunConfig, UsageError};

#[derive(Parser, Debug)]
#[command(
    name = "ssp4",
    version,
    about = "Robust solvers for eps^2 Δ²u - Δu = f on the unit square"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Error tables over a sequence of meshes
    Convergence(RawArgs),
    /// One solve, printing error norms
    Solve(RawArgs),
    /// Property and scheme-equivalence suites
    Verify(RawArgs),
    /// One solve, writing a legacy VTK file
    ExportField(RawArgs),
}

impl Command {
    pub fn split(&self) -> (CommandKind, &RawArgs) {
        match self {
            Command::Convergence(a) => (CommandKind::Convergence, a),
            Command::Solve(a) => (CommandKind::Solve, a),
            Command::Verify(a) => (CommandKind::Verify, a),
            Command::ExportField(a) => (CommandKind::ExportField, a),
        }
    }
}

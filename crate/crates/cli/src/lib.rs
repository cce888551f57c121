//! Experiment driver for the `monoreg` command-line tool.
//!
//! Each subcommand reads a JSON [`spec::RunSpec`], builds the problem and
//! writes either a JSON record (`solve`) or CSV (`sweep`, `phi-curve`).
//! All output is a pure function of the spec and seed.

pub mod commands;
pub mod spec;

use thiserror::Error;

pub use commands::{
    phi_curve_csv, run_phi_curve, run_solve, run_sweep, sweep_csv, verify_record, CurveRow,
    SolveOutput, SweepRow, VerifyReport, CURVE_HEADER, SWEEP_HEADER,
};
pub use spec::RunSpec;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver failed: {0}")]
    Solver(#[from] monoreg_core::Error),
}

impl CliError {
    /// Process exit code: 2 for bad input, 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) | CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

/// Reclassify core errors raised while interpreting a spec as spec errors.
pub(crate) trait SpecContext<T> {
    fn spec(self) -> Result<T, CliError>;
}

impl<T> SpecContext<T> for monoreg_core::Result<T> {
    fn spec(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Spec(e.to_string()))
    }
}

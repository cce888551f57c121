use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use monoreg_cli::{
    phi_curve_csv, run_phi_curve, run_solve, run_sweep, sweep_csv, verify_record, CliError,
    RunSpec, SolveOutput,
};

#[derive(Parser)]
#[command(
    name = "monoreg",
    version,
    about = "Discrepancy-principle regularization for monotone operator equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choose the regularization parameter for one noise level (JSON output).
    Solve(RunArgs),
    /// Solve over a list of noise levels (CSV output).
    Sweep(RunArgs),
    /// Tabulate the discrepancy and solution norm over a parameter grid (CSV output).
    PhiCurve(RunArgs),
    /// Re-check a `solve` record against its spec.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn load_spec(path: &Path) -> Result<RunSpec, CliError> {
    RunSpec::from_json(&std::fs::read_to_string(path)?)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Solve(args) => {
            let spec = load_spec(&args.spec)?;
            let seed = args.seed.unwrap_or(spec.seed);
            let out = run_solve(&spec, seed)?;
            let path = args.out.or_else(|| spec.output.as_ref().map(PathBuf::from));
            emit(&out.to_json(), path.as_deref())?;
            if !out.is_success() {
                eprintln!("warning: status {}", out.status);
                return Ok(1);
            }
            Ok(0)
        }
        Command::Sweep(args) => {
            let spec = load_spec(&args.spec)?;
            let seed = args.seed.unwrap_or(spec.seed);
            let rows = run_sweep(&spec, seed)?;
            for r in rows.iter().filter(|r| r.status != "Converged") {
                eprintln!("delta={:e}: status {}", r.delta, r.status);
            }
            let path = args.out.or_else(|| spec.output.as_ref().map(PathBuf::from));
            emit(&sweep_csv(&rows), path.as_deref())?;
            Ok(0)
        }
        Command::PhiCurve(args) => {
            let spec = load_spec(&args.spec)?;
            let seed = args.seed.unwrap_or(spec.seed);
            let rows = run_phi_curve(&spec, seed)?;
            let path = args.out.or_else(|| spec.output.as_ref().map(PathBuf::from));
            emit(&phi_curve_csv(&rows), path.as_deref())?;
            Ok(0)
        }
        Command::Verify { spec, result, seed } => {
            let spec = load_spec(&spec)?;
            let record: SolveOutput = serde_json::from_str(&std::fs::read_to_string(result)?)
                .map_err(|e| CliError::Spec(format!("result record: {e}")))?;
            let report = verify_record(&spec, &record, seed.unwrap_or(spec.seed))?;
            println!(
                "data_matches={} residual={:.6e} residual_ok={} phi={:.6e} band_ok={}",
                report.data_matches,
                report.residual,
                report.residual_ok,
                report.phi,
                report.band_ok
            );
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::fmt::Write as _;

use monoreg_core::{
    audit_result, phi_psi, solve_discrepancy, DiscrepancyResult, Operator, Status, SuiteProblem,
    Vector,
};
use serde::{Deserialize, Serialize};

use crate::spec::{CurveSolver, RunSpec};
use crate::{CliError, SpecContext};

pub const SWEEP_HEADER: &str = "delta,alpha,phi,psi,err_to_y,inner_iters";
pub const CURVE_HEADER: &str = "a,phi,psi,violation";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketOutput {
    pub alpha_low: Option<f64>,
    pub alpha_up: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOutput {
    pub target: f64,
    pub lower: f64,
    pub upper: f64,
    pub residual: f64,
}

/// Result record written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub status: String,
    pub delta: f64,
    /// `null` when the zero vector was accepted.
    pub alpha: Option<f64>,
    pub phi_value: f64,
    pub psi: f64,
    pub residual: f64,
    pub total_inner_iters: usize,
    pub n_trials: usize,
    pub bracket: BracketOutput,
    pub thresholds: ThresholdOutput,
    /// `‖v_δ − y‖` when the exact solution is known.
    pub error_to_y: Option<f64>,
    pub v_delta: Vec<f64>,
    pub f_delta: Vec<f64>,
}

impl SolveOutput {
    fn from_result(
        r: &DiscrepancyResult,
        delta: f64,
        f_delta: &Vector,
        y: Option<&Vector>,
    ) -> Self {
        Self {
            status: r.status.as_str().to_string(),
            delta,
            alpha: r.alpha.is_finite().then_some(r.alpha),
            phi_value: r.phi_value,
            psi: r.v_delta.norm(),
            residual: r.residual,
            total_inner_iters: r.total_inner_iters,
            n_trials: r.trials.len(),
            bracket: BracketOutput {
                alpha_low: r.bracket.low,
                alpha_up: r.bracket.up,
            },
            thresholds: ThresholdOutput {
                target: r.thresholds.target,
                lower: r.thresholds.lower,
                upper: r.thresholds.upper,
                residual: r.thresholds.residual,
            },
            error_to_y: y.map(|y| r.v_delta.distance(y)),
            v_delta: r.v_delta.to_vec(),
            f_delta: f_delta.to_vec(),
        }
    }

    pub fn is_success(&self) -> bool {
        self.status == Status::Converged.as_str()
            || self.status == Status::ZeroWithinDiscrepancy.as_str()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }
}

fn solve_one(spec: &RunSpec, delta: f64, seed: u64) -> Result<SolveOutput, CliError> {
    let problem = spec.problem.build()?;
    let inst = spec.instance(&problem, delta, seed)?;
    if inst.f_delta.dim() != problem.dim() {
        return Err(CliError::Spec(format!(
            "f_delta has {} entries, problem dimension is {}",
            inst.f_delta.dim(),
            problem.dim()
        )));
    }
    let result = solve_discrepancy(
        &problem,
        &inst.f_delta,
        delta,
        &spec.discrepancy_config(),
        &spec.solver_config(delta),
    )?;
    Ok(SolveOutput::from_result(
        &result,
        delta,
        &inst.f_delta,
        inst.y.as_ref(),
    ))
}

/// Single discrepancy-principle solve. The spec must carry exactly one `δ`.
pub fn run_solve(spec: &RunSpec, seed: u64) -> Result<SolveOutput, CliError> {
    spec.validate()?;
    let deltas = spec.delta.values();
    if deltas.len() != 1 {
        return Err(CliError::Spec(format!(
            "solve takes a single delta, got {}",
            deltas.len()
        )));
    }
    solve_one(spec, deltas[0], seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub alpha: f64,
    pub phi: f64,
    pub psi: f64,
    pub err_to_y: f64,
    pub inner_iters: usize,
    pub status: String,
}

/// One solve per noise level, in decreasing `δ`. Every level uses the same
/// seed, so the noise direction is shared across rows.
pub fn run_sweep(spec: &RunSpec, seed: u64) -> Result<Vec<SweepRow>, CliError> {
    spec.validate()?;
    if spec.f_delta.is_some() {
        return Err(CliError::Spec(
            "sweep needs the known solution; explicit f_delta is not allowed".into(),
        ));
    }
    let mut deltas = spec.delta.values();
    deltas.sort_by(|a, b| b.total_cmp(a));
    deltas
        .into_iter()
        .map(|delta| {
            let out = solve_one(spec, delta, seed)?;
            let err_to_y = out
                .error_to_y
                .ok_or_else(|| CliError::Spec("sweep needs a known solution".into()))?;
            Ok(SweepRow {
                delta,
                alpha: out.alpha.unwrap_or(f64::INFINITY),
                phi: out.phi_value,
                psi: out.psi,
                err_to_y,
                inner_iters: out.total_inner_iters,
                status: out.status,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.delta, r.alpha, r.phi, r.psi, r.err_to_y, r.inner_iters
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub a: f64,
    pub phi: f64,
    pub psi: f64,
    /// `φ` dropped or `ψ` rose against the previous grid point by more than
    /// the solve accuracy allows.
    pub violation: bool,
}

/// `φ(a)` and `ψ(a)` over the spec's grid, sorted ascending.
pub fn run_phi_curve(spec: &RunSpec, seed: u64) -> Result<Vec<CurveRow>, CliError> {
    spec.validate()?;
    let deltas = spec.delta.values();
    if deltas.len() != 1 {
        return Err(CliError::Spec("phi-curve takes a single delta".into()));
    }
    let delta = deltas[0];
    let mut grid = spec
        .a_grid
        .as_ref()
        .ok_or_else(|| CliError::Spec("phi-curve needs a_grid".into()))?
        .values()?;
    grid.sort_by(f64::total_cmp);
    let problem = spec.problem.build()?;
    let inst = spec.instance(&problem, delta, seed)?;
    let solver_cfg = spec.solver_config(delta);
    // Per-point accuracy of the computed V: residual ≤ tol.
    let tol = match spec.curve_solver {
        CurveSolver::Oracle => 1e-12 * (1.0 + inst.f_delta.norm()),
        CurveSolver::Iterative => solver_cfg.stop_tolerance(),
    };

    let mut rows: Vec<CurveRow> = Vec::with_capacity(grid.len());
    for a in grid {
        let v = match spec.curve_solver {
            CurveSolver::Oracle => problem.oracle_solution(a, &inst.f_delta)?,
            CurveSolver::Iterative => phi_psi(&problem, &inst.f_delta, a, &solver_cfg)?.v,
        };
        let phi = problem.apply(&v).distance(&inst.f_delta);
        let psi = v.norm();
        // |φ − φ_exact| ≤ 2·tol and |ψ − ψ_exact| ≤ tol/a.
        let violation = rows
            .last()
            .is_some_and(|p| phi < p.phi - 4.0 * tol || psi > p.psi + tol / a + tol / p.a);
        rows.push(CurveRow {
            a,
            phi,
            psi,
            violation,
        });
    }
    Ok(rows)
}

pub fn phi_curve_csv(rows: &[CurveRow]) -> String {
    let mut s = String::from(CURVE_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{}",
            r.a, r.phi, r.psi, r.violation as u8
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// The record's `f_δ` matches the spec's regenerated data bit for bit.
    pub data_matches: bool,
    pub residual: f64,
    pub phi: f64,
    pub residual_ok: bool,
    pub band_ok: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.data_matches && self.residual_ok && self.band_ok
    }
}

/// Re-check a `solve` record against the operator: the regularized residual
/// bound and the acceptance condition on `φ`. A zero-vector answer is checked
/// against the precondition instead.
pub fn verify_record(
    spec: &RunSpec,
    record: &SolveOutput,
    seed: u64,
) -> Result<VerifyReport, CliError> {
    spec.validate()?;
    let delta = record.delta;
    let problem = spec.problem.build()?;
    let inst = spec.instance(&problem, delta, seed)?;
    let f_delta = Vector::new(record.f_delta.clone()).spec()?;
    let v = Vector::new(record.v_delta.clone()).spec()?;
    let data_matches = f_delta.as_slice() == inst.f_delta.as_slice();
    let cfg = spec.discrepancy_config();
    let t = cfg.validate(delta).spec()?;

    match record.alpha {
        None => {
            let phi = problem.eval(&v).spec()?.distance(&f_delta);
            Ok(VerifyReport {
                data_matches,
                residual: 0.0,
                phi,
                residual_ok: v.norm() == 0.0,
                band_ok: phi <= t.target,
            })
        }
        Some(alpha) => {
            let audit = audit_result(&problem, &f_delta, delta, &cfg, alpha, &v).spec()?;
            let tol = spec.solver_config(delta).stop_tolerance();
            Ok(VerifyReport {
                data_matches,
                residual: audit.residual,
                phi: audit.phi,
                residual_ok: audit.residual <= tol,
                band_ok: audit.band_ok,
            })
        }
    }
}

//! Stable solution of ill-posed equations `F(u) = f` with monotone operators
//! from noisy data `f_δ`, `‖f − f_δ‖ ≤ δ`.
//!
//! The solution is regularized as `F(V) + aV = f_δ` and the parameter `a` is
//! picked by a discrepancy principle, `‖F(V_{δ,a}) − f_δ‖ ≈ Cδ^γ` with
//! `γ ∈ (0, 1)`. The regularized equation only has to be solved to residual
//! `θδ`, which is what [`discrepancy::solve_discrepancy`] does.
//!
//! ```
//! use monoreg_core::{
//!     build_diagonal, solve_discrepancy, Decay, DiscrepancyConfig, IterationConfig,
//!     SolutionSpec, Status, SuiteProblem,
//! };
//!
//! let problem = build_diagonal(20, Decay::Poly(2.0), &SolutionSpec::Harmonic(1.0)).unwrap();
//! let delta = 1e-3;
//! let f_delta = problem.noisy_data(delta, 0).unwrap();
//! let result = solve_discrepancy(
//!     &problem,
//!     &f_delta,
//!     delta,
//!     &DiscrepancyConfig::default(),
//!     &IterationConfig::default(),
//! )
//! .unwrap();
//! assert_eq!(result.status, Status::Converged);
//! ```

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discrepancy;
pub mod error;
pub mod problems;
pub mod regsolve;
pub mod space;

pub use discrepancy::{
    audit_result, bisect_discrepancy, find_alpha_low, find_alpha_up, phi_psi, precondition_check,
    solve_discrepancy, solve_discrepancy_shifted, Audit, Bracket, BracketOutcome,
    DiscrepancyConfig, DiscrepancyResult, Mode, PhiPsi, Precondition, ShiftedOperator, Status,
    Thresholds, Trial, TrialCache, TrialRecord,
};
pub use error::{Error, Result};
pub use problems::{
    build_cubic, build_diagonal, build_fredholm, build_fredholm_with, build_rank_one, oracle_alpha,
    CubicMatrix, CubicOperator, CubicProblem, Decay, DiagonalProblem, FredholmProblem,
    NoisyProblem, Problem, RankOneProblem, SolutionSpec, SuiteProblem,
};
pub use regsolve::{
    optimal_step, residual_norm, solve_auto, solve_regularized, solve_regularized_linear,
    InnerMethod, IterationConfig, SolveTrace, StepChoice,
};
pub use space::{
    check_monotonicity, check_monotonicity_about, estimate_lipschitz, inner, make_noisy, norm,
    DiagonalOperator, FnOperator, MatrixOperator, MonotonicityReport, Operator, Vector,
};

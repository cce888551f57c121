//! JSON run specification.

use monoreg_core::{
    build_cubic, build_diagonal, build_fredholm_with, build_rank_one, CubicMatrix, Decay,
    DiagonalProblem, DiscrepancyConfig, InnerMethod, IterationConfig, Mode, Problem, SolutionSpec,
    SuiteProblem, Vector,
};
use serde::Deserialize;

use crate::{CliError, SpecContext};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub problem: ProblemSpec,
    pub delta: DeltaSpec,
    #[serde(default)]
    pub discrepancy: DiscrepancySpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub seed: u64,
    /// Explicit noisy data, replacing the seeded perturbation of the exact data.
    #[serde(default)]
    pub f_delta: Option<Vec<f64>>,
    /// Parameter grid for `phi-curve`.
    #[serde(default)]
    pub a_grid: Option<GridSpec>,
    #[serde(default)]
    pub curve_solver: CurveSolver,
    /// Default output path (overridden by `--out`).
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Diagonal {
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        eigenvalues: Option<Vec<f64>>,
        #[serde(default)]
        decay: Option<DecaySpec>,
        #[serde(default)]
        y: Option<YSpec>,
    },
    Fredholm {
        n: usize,
        #[serde(default)]
        y: Option<YSpec>,
    },
    Cubic {
        n: usize,
        #[serde(default)]
        a: Option<CubicASpec>,
        #[serde(default)]
        y: Option<YSpec>,
    },
    RankOne {
        #[serde(default)]
        dim: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecaySpec {
    Poly(f64),
    Exp(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum YSpec {
    Values(Vec<f64>),
    Named(String),
    Scaled(ScaledY),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaledY {
    Constant(f64),
    Harmonic(f64),
    Sine(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CubicASpec {
    Named(String),
    Tagged(CubicATagged),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubicATagged {
    Diagonal(Vec<f64>),
    Dense(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DeltaSpec {
    One(f64),
    Many(Vec<f64>),
}

impl DeltaSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            DeltaSpec::One(d) => vec![*d],
            DeltaSpec::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscrepancySpec {
    #[serde(rename = "C", default = "d_c")]
    pub c: f64,
    #[serde(default = "d_gamma")]
    pub gamma: f64,
    #[serde(rename = "C1", default = "d_c1")]
    pub c1: f64,
    #[serde(rename = "C2", default = "d_c2")]
    pub c2: f64,
    #[serde(default = "d_theta")]
    pub theta: f64,
    #[serde(default = "d_eps")]
    pub eps: f64,
    #[serde(default = "d_a_init")]
    pub a_init: f64,
    #[serde(default = "d_max_bracket")]
    pub max_bracket_steps: usize,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default = "d_exact_tol")]
    pub exact_tol: f64,
    #[serde(default = "d_true")]
    pub audit: bool,
}

fn d_c() -> f64 {
    DiscrepancyConfig::default().c
}
fn d_gamma() -> f64 {
    DiscrepancyConfig::default().gamma
}
fn d_c1() -> f64 {
    DiscrepancyConfig::default().c1
}
fn d_c2() -> f64 {
    DiscrepancyConfig::default().c2
}
fn d_theta() -> f64 {
    DiscrepancyConfig::default().theta
}
fn d_eps() -> f64 {
    DiscrepancyConfig::default().eps
}
fn d_a_init() -> f64 {
    DiscrepancyConfig::default().a_init
}
fn d_max_bracket() -> usize {
    DiscrepancyConfig::default().max_bracket_steps
}
fn d_exact_tol() -> f64 {
    DiscrepancyConfig::default().exact_tol
}
fn d_true() -> bool {
    true
}

impl Default for DiscrepancySpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all discrepancy fields have defaults")
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    #[default]
    Band,
    Exact,
}

impl DiscrepancySpec {
    pub fn to_config(&self) -> DiscrepancyConfig {
        DiscrepancyConfig {
            c: self.c,
            gamma: self.gamma,
            c1: self.c1,
            c2: self.c2,
            theta: self.theta,
            eps: self.eps,
            a_init: self.a_init,
            max_bracket_steps: self.max_bracket_steps,
            mode: match self.mode {
                ModeSpec::Band => Mode::Band,
                ModeSpec::Exact => Mode::Exact,
            },
            exact_tol: self.exact_tol,
            audit_monotonicity: self.audit,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "d_tol_min")]
    pub tol_min: f64,
    #[serde(default = "d_max_iter")]
    pub max_iter: usize,
    #[serde(rename = "R", default = "d_radius")]
    pub radius: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub method: MethodSpec,
}

fn d_tol_min() -> f64 {
    IterationConfig::default().tol_min
}
fn d_max_iter() -> usize {
    IterationConfig::default().max_iter
}
fn d_radius() -> f64 {
    IterationConfig::default().radius
}

impl Default for SolverSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all solver fields have defaults")
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodSpec {
    #[default]
    Auto,
    FixedPoint,
    Cg,
}

impl SolverSpec {
    /// θ and δ are filled in by the discrepancy pipeline.
    pub fn to_config(&self, theta: f64, delta: f64) -> IterationConfig {
        IterationConfig {
            theta,
            delta,
            tol_min: self.tol_min,
            max_iter: self.max_iter,
            radius: self.radius,
            lambda_override: self.lambda,
            method: match self.method {
                MethodSpec::Auto => InnerMethod::Auto,
                MethodSpec::FixedPoint => InnerMethod::FixedPoint,
                MethodSpec::Cg => InnerMethod::ConjugateGradient,
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Log { logspace: (f64, f64, usize) },
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let grid = match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Log {
                logspace: (lo, hi, n),
            } => {
                if !(*lo > 0.0 && *hi > 0.0) {
                    return Err(CliError::Spec("logspace bounds must be positive".into()));
                }
                let (l0, l1) = (lo.log10(), hi.log10());
                match n {
                    0 => vec![],
                    1 => vec![*lo],
                    _ => (0..*n)
                        .map(|i| 10f64.powf(l0 + (l1 - l0) * i as f64 / (*n - 1) as f64))
                        .collect(),
                }
            }
        };
        if let Some(bad) = grid.iter().find(|a| !a.is_finite() || **a <= 0.0) {
            return Err(CliError::Spec(format!(
                "grid entries must be positive, got {bad}"
            )));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CurveSolver {
    #[default]
    Oracle,
    Iterative,
}

fn solution_spec(y: &Option<YSpec>, default: SolutionSpec) -> Result<SolutionSpec, CliError> {
    Ok(match y {
        None => default,
        Some(YSpec::Values(v)) => SolutionSpec::Values(v.clone()),
        Some(YSpec::Named(name)) => match name.as_str() {
            "ones" => SolutionSpec::Constant(1.0),
            "harmonic" => SolutionSpec::Harmonic(1.0),
            "sine" => SolutionSpec::Sine(1.0),
            other => return Err(CliError::Spec(format!("unknown solution shape {other:?}"))),
        },
        Some(YSpec::Scaled(ScaledY::Constant(c))) => SolutionSpec::Constant(*c),
        Some(YSpec::Scaled(ScaledY::Harmonic(c))) => SolutionSpec::Harmonic(*c),
        Some(YSpec::Scaled(ScaledY::Sine(c))) => SolutionSpec::Sine(*c),
    })
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Problem, CliError> {
        let problem: Problem = match self {
            ProblemSpec::Diagonal {
                n,
                eigenvalues,
                decay,
                y,
            } => match (eigenvalues, decay) {
                (Some(eig), None) => {
                    if n.is_some_and(|n| n != eig.len()) {
                        return Err(CliError::Spec("n disagrees with eigenvalues".into()));
                    }
                    let y = solution_spec(y, SolutionSpec::Constant(0.0))?
                        .build(eig.len())
                        .spec()?;
                    DiagonalProblem::new(eig.clone(), y).spec()?.into()
                }
                (None, decay) => {
                    let n = n.ok_or_else(|| CliError::Spec("diagonal problem needs n".into()))?;
                    let decay = match decay.unwrap_or(DecaySpec::Poly(2.0)) {
                        DecaySpec::Poly(p) => Decay::Poly(p),
                        DecaySpec::Exp(r) => Decay::Exp(r),
                    };
                    build_diagonal(n, decay, &solution_spec(y, SolutionSpec::Harmonic(1.0))?)
                        .spec()?
                        .into()
                }
                (Some(_), Some(_)) => {
                    return Err(CliError::Spec(
                        "give either eigenvalues or decay, not both".into(),
                    ))
                }
            },
            ProblemSpec::Fredholm { n, y } => {
                build_fredholm_with(*n, &solution_spec(y, SolutionSpec::Sine(1.0))?)
                    .spec()?
                    .into()
            }
            ProblemSpec::Cubic { n, a, y } => {
                let matrix = match a {
                    None => CubicMatrix::InverseIndex,
                    Some(CubicASpec::Named(s)) if s == "inverse_index" => CubicMatrix::InverseIndex,
                    Some(CubicASpec::Named(s)) => {
                        return Err(CliError::Spec(format!("unknown cubic matrix {s:?}")))
                    }
                    Some(CubicASpec::Tagged(CubicATagged::Diagonal(d))) => {
                        CubicMatrix::Diagonal(d.clone())
                    }
                    Some(CubicASpec::Tagged(CubicATagged::Dense(rows))) => {
                        CubicMatrix::from_rows(rows).spec()?
                    }
                };
                build_cubic(*n, &matrix, &solution_spec(y, SolutionSpec::Harmonic(0.5))?)
                    .spec()?
                    .into()
            }
            ProblemSpec::RankOne { dim } => build_rank_one(dim.unwrap_or(2)).spec()?.into(),
        };
        Ok(problem)
    }
}

/// A concrete instance: operator plus data at one noise level.
pub struct Instance {
    pub problem: Problem,
    pub f_delta: Vector,
    pub delta: f64,
    /// Known solution, absent when the data were given explicitly.
    pub y: Option<Vector>,
}

impl RunSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Spec(e.to_string()))
    }

    pub fn discrepancy_config(&self) -> DiscrepancyConfig {
        self.discrepancy.to_config()
    }

    pub fn solver_config(&self, delta: f64) -> IterationConfig {
        self.solver.to_config(self.discrepancy.theta, delta)
    }

    /// Validate every noise level against the configuration before solving.
    pub fn validate(&self) -> Result<(), CliError> {
        let deltas = self.delta.values();
        if deltas.is_empty() {
            return Err(CliError::Spec("delta list is empty".into()));
        }
        let cfg = self.discrepancy_config();
        for d in deltas {
            cfg.validate(d).spec()?;
            self.solver_config(d).validate().spec()?;
        }
        Ok(())
    }

    pub fn instance(&self, problem: &Problem, delta: f64, seed: u64) -> Result<Instance, CliError> {
        match &self.f_delta {
            Some(values) => Ok(Instance {
                problem: problem.clone(),
                f_delta: Vector::new(values.clone()).spec()?,
                delta,
                y: None,
            }),
            None => Ok(Instance {
                problem: problem.clone(),
                f_delta: problem.noisy_data(delta, seed).spec()?,
                delta,
                y: Some(problem.solution().clone()),
            }),
        }
    }
}

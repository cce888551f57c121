//! Discrepancy-principle choice of the regularization parameter.
//!
//! With `V_{δ,a}` the solution of `F(V) + aV = f_δ`, the discrepancy
//! `φ(a) = ‖F(V_{δ,a}) − f_δ‖` is strictly increasing in `a` and the norm
//! `ψ(a) = ‖V_{δ,a}‖` strictly decreasing. The parameter is chosen so that
//! `φ(a)` hits the target `Cδ^γ`:
//!
//! * [`Mode::Band`] accepts any approximate solve `v` with
//!   `‖F(v) + αv − f_δ‖ ≤ θδ` and `C₁δ^γ ≤ ‖F(v) − f_δ‖ ≤ C₂δ^γ`. Brackets
//!   are found by doubling ([`find_alpha_up`]) and halving
//!   ([`find_alpha_low`]) from an initial guess, then bisected
//!   ([`bisect_discrepancy`]).
//! * [`Mode::Exact`] drives `|φ(α) − Cδ^γ|` below `exact_tol`, with inner
//!   solves tightened to that tolerance.
//!
//! All trial solves in one run share a [`TrialCache`]; each new solve is
//! warm-started from the cached solution at the nearest `a`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::regsolve::{solve_auto, IterationConfig, SolveTrace};
use crate::space::{check_monotonicity, Operator, Vector, MONOTONICITY_SLACK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Band,
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyConfig {
    /// Target multiplier `C`.
    pub c: f64,
    /// Exponent `γ ∈ (0, 1]`.
    pub gamma: f64,
    /// Lower band multiplier `C₁`.
    pub c1: f64,
    /// Upper band multiplier `C₂`.
    pub c2: f64,
    /// Inner stopping multiplier `θ`.
    pub theta: f64,
    /// Bisection stops once the bracket half-width drops below this.
    pub eps: f64,
    pub a_init: f64,
    pub max_bracket_steps: usize,
    pub mode: Mode,
    pub exact_tol: f64,
    /// Sample the operator for monotonicity before solving.
    pub audit_monotonicity: bool,
}

impl Default for DiscrepancyConfig {
    fn default() -> Self {
        Self {
            c: 1.5,
            gamma: 0.9,
            c1: 1.0,
            c2: 2.0,
            theta: 0.4,
            eps: 1e-6,
            a_init: 1.0,
            max_bracket_steps: 200,
            mode: Mode::Band,
            exact_tol: 1e-8,
            audit_monotonicity: true,
        }
    }
}

/// Monotonicity audit sample size used by [`solve_discrepancy`].
pub const AUDIT_PAIRS: usize = 200;

/// The discrepancy levels for one noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub delta: f64,
    /// `Cδ^γ`
    pub target: f64,
    /// `C₁δ^γ`
    pub lower: f64,
    /// `C₂δ^γ`
    pub upper: f64,
    /// `θδ`
    pub residual: f64,
}

impl DiscrepancyConfig {
    /// Check the constants against the noise level in use and return the
    /// derived thresholds.
    pub fn validate(&self, delta: f64) -> Result<Thresholds> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, value) in [
            ("C", self.c),
            ("C1", self.c1),
            ("C2", self.c2),
            ("theta", self.theta),
            ("eps", self.eps),
            ("a_init", self.a_init),
            ("exact_tol", self.exact_tol),
            ("delta", delta),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return bad(format!("{name} must be positive and finite, got {value}"));
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(self.c1 < self.c && self.c < self.c2) {
            return bad(format!(
                "need 0 < C1 < C < C2, got C1={}, C={}, C2={}",
                self.c1, self.c, self.c2
            ));
        }
        if self.max_bracket_steps == 0 {
            return bad("max_bracket_steps must be at least 1".into());
        }
        let scale = delta.powf(self.gamma);
        let t = Thresholds {
            delta,
            target: self.c * scale,
            lower: self.c1 * scale,
            upper: self.c2 * scale,
            residual: self.theta * delta,
        };
        if !(t.target > delta) {
            return bad(format!("need C·δ^γ > δ, got {:e} <= {delta:e}", t.target));
        }
        if !(t.lower + t.residual < t.target) {
            return bad(format!(
                "need C1·δ^γ + θδ < C·δ^γ, got {:e} >= {:e}",
                t.lower + t.residual,
                t.target
            ));
        }
        if !(t.target < t.upper - t.residual) {
            return bad(format!(
                "need C·δ^γ < C2·δ^γ − θδ, got {:e} >= {:e}",
                t.target,
                t.upper - t.residual
            ));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    /// `‖F(0) − f_δ‖ ≤ Cδ^γ`: the zero vector already meets the target.
    ZeroWithinDiscrepancy,
    /// The bracket shrank below `eps` without acceptance; the returned
    /// iterate is the trial closest to the target.
    NarrowIntervalWarning,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "Converged",
            Status::ZeroWithinDiscrepancy => "ZeroWithinDiscrepancy",
            Status::NarrowIntervalWarning => "NarrowIntervalWarning",
        }
    }

    pub fn is_success(&self) -> bool {
        !matches!(self, Status::NarrowIntervalWarning)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One approximate solve of the regularized equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub a: f64,
    pub v: Vector,
    /// `‖F(v) − f_δ‖`
    pub phi: f64,
    /// `‖v‖`
    pub psi: f64,
    /// `‖F(v) + a·v − f_δ‖`
    pub residual: f64,
    pub inner_iters: usize,
}

/// Trial solves keyed by `a`, shared between bracketing and bisection.
#[derive(Debug, Clone, Default)]
pub struct TrialCache {
    // Positive finite f64 bit patterns sort like the values.
    trials: BTreeMap<u64, Trial>,
    total_iters: usize,
}

impl TrialCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, a: f64) -> Option<&Trial> {
        self.trials.get(&a.to_bits())
    }

    pub fn insert(&mut self, trial: Trial) {
        self.total_iters += trial.inner_iters;
        self.trials.insert(trial.a.to_bits(), trial);
    }

    /// Trials in increasing order of `a`.
    pub fn iter(&self) -> impl Iterator<Item = &Trial> {
        self.trials.values()
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn total_inner_iters(&self) -> usize {
        self.total_iters
    }

    /// Cached trial with `a` closest on a log scale.
    pub fn nearest(&self, a: f64) -> Option<&Trial> {
        let la = a.ln();
        self.trials
            .values()
            .min_by(|x, y| (x.a.ln() - la).abs().total_cmp(&(y.a.ln() - la).abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub a: f64,
    pub phi: f64,
    pub psi: f64,
    pub residual: f64,
    pub inner_iters: usize,
}

impl From<&Trial> for TrialRecord {
    fn from(t: &Trial) -> Self {
        Self {
            a: t.a,
            phi: t.phi,
            psi: t.psi,
            residual: t.residual,
            inner_iters: t.inner_iters,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bracket {
    pub low: Option<f64>,
    pub up: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyResult {
    /// Chosen parameter; `+∞` for [`Status::ZeroWithinDiscrepancy`].
    pub alpha: f64,
    pub v_delta: Vector,
    /// `‖F(v_δ) − f_δ‖`
    pub phi_value: f64,
    /// `‖F(v_δ) + α·v_δ − f_δ‖` (zero for the zero-vector answer)
    pub residual: f64,
    pub total_inner_iters: usize,
    pub bracket: Bracket,
    pub status: Status,
    pub thresholds: Thresholds,
    /// Every trial solve, in increasing `a`.
    pub trials: Vec<TrialRecord>,
}

/// `φ(a)`, `ψ(a)` and the approximate solution they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiPsi {
    pub phi: f64,
    pub psi: f64,
    pub v: Vector,
    pub trace: SolveTrace,
}

/// Solve the regularized equation at `a` (cold start) and evaluate the
/// discrepancy and solution norm.
pub fn phi_psi<O: Operator + ?Sized>(
    op: &O,
    f_delta: &Vector,
    a: f64,
    solver_cfg: &IterationConfig,
) -> Result<PhiPsi> {
    let (v, trace) = solve_auto(op, f_delta, a, None, solver_cfg)?;
    let phi = op.apply(&v).distance(f_delta);
    let psi = v.norm();
    Ok(PhiPsi { phi, psi, v, trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precondition {
    Proceed,
    ZeroWithinDiscrepancy,
}

/// `Proceed` iff `‖F(0) − f_δ‖ > Cδ^γ`. Fails when the constants are
/// inconsistent with `delta`.
pub fn precondition_check<O: Operator + ?Sized>(
    op: &O,
    f_delta: &Vector,
    delta: f64,
    cfg: &DiscrepancyConfig,
) -> Result<Precondition> {
    let t = cfg.validate(delta)?;
    let zero = Vector::zeros(op.dim());
    let gap = op.eval(&zero)?.distance(f_delta);
    Ok(if gap > t.target {
        Precondition::Proceed
    } else {
        Precondition::ZeroWithinDiscrepancy
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum BracketOutcome {
    Bracket(f64),
    EarlyAccept(Box<DiscrepancyResult>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Position {
    Below,
    Accept,
    Above,
}

/// Shared state of one discrepancy run.
struct Session<'a, O: ?Sized> {
    op: &'a O,
    f_delta: &'a Vector,
    cfg: &'a DiscrepancyConfig,
    solver: IterationConfig,
    t: Thresholds,
}

impl<'a, O: Operator + ?Sized> Session<'a, O> {
    fn new(
        op: &'a O,
        f_delta: &'a Vector,
        delta: f64,
        cfg: &'a DiscrepancyConfig,
        solver_cfg: &IterationConfig,
    ) -> Result<Self> {
        if f_delta.dim() != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                found: f_delta.dim(),
            });
        }
        let t = cfg.validate(delta)?;
        let mut solver = solver_cfg.clone();
        solver.delta = delta;
        solver.theta = match cfg.mode {
            Mode::Band => cfg.theta,
            // inner accuracy must not be coarser than the root tolerance
            Mode::Exact => cfg.theta.min(cfg.exact_tol / delta),
        };
        solver.validate()?;
        Ok(Self {
            op,
            f_delta,
            cfg,
            solver,
            t,
        })
    }

    fn classify(&self, phi: f64) -> Position {
        match self.cfg.mode {
            Mode::Band => {
                if phi > self.t.upper {
                    Position::Above
                } else if phi < self.t.lower {
                    Position::Below
                } else {
                    Position::Accept
                }
            }
            Mode::Exact => {
                if (phi - self.t.target).abs() <= self.cfg.exact_tol {
                    Position::Accept
                } else if phi > self.t.target {
                    Position::Above
                } else {
                    Position::Below
                }
            }
        }
    }

    fn trial(&self, cache: &mut TrialCache, a: f64) -> Result<Trial> {
        if let Some(t) = cache.get(a) {
            return Ok(t.clone());
        }
        let warm = cache.nearest(a).map(|t| t.v.clone());
        let (v, trace) = solve_auto(self.op, self.f_delta, a, warm.as_ref(), &self.solver)?;
        let fv = self.op.apply(&v);
        let phi = fv.distance(self.f_delta);
        let trial = Trial {
            a,
            psi: v.norm(),
            phi,
            residual: trace.final_residual(),
            inner_iters: trace.total_iters(),
            v,
        };
        cache.insert(trial.clone());
        Ok(trial)
    }

    fn result(
        &self,
        cache: &TrialCache,
        trial: Trial,
        bracket: Bracket,
        status: Status,
    ) -> DiscrepancyResult {
        DiscrepancyResult {
            alpha: trial.a,
            phi_value: trial.phi,
            residual: trial.residual,
            v_delta: trial.v,
            total_inner_iters: cache.total_inner_iters(),
            bracket,
            status,
            thresholds: self.t,
            trials: cache.iter().map(TrialRecord::from).collect(),
        }
    }

    /// Double `a` until the discrepancy exceeds the band.
    fn find_up(&self, cache: &mut TrialCache, start: f64) -> Result<BracketOutcome> {
        let mut a = start;
        let mut low = None;
        for _ in 0..self.cfg.max_bracket_steps {
            let trial = self.trial(cache, a)?;
            match self.classify(trial.phi) {
                Position::Accept => {
                    let bracket = Bracket { low, up: None };
                    return Ok(BracketOutcome::EarlyAccept(Box::new(self.result(
                        cache,
                        trial,
                        bracket,
                        Status::Converged,
                    ))));
                }
                Position::Above => return Ok(BracketOutcome::Bracket(a)),
                Position::Below => {
                    low = Some(a);
                    a *= 2.0;
                }
            }
        }
        Err(Error::MaxBracketSteps {
            steps: self.cfg.max_bracket_steps,
            alpha: a,
        })
    }

    /// Halve `a` until the discrepancy falls below the band.
    fn find_low(&self, cache: &mut TrialCache, start: f64) -> Result<BracketOutcome> {
        let mut a = start;
        let mut up = None;
        for _ in 0..self.cfg.max_bracket_steps {
            let trial = self.trial(cache, a)?;
            match self.classify(trial.phi) {
                Position::Accept => {
                    let bracket = Bracket { low: None, up };
                    return Ok(BracketOutcome::EarlyAccept(Box::new(self.result(
                        cache,
                        trial,
                        bracket,
                        Status::Converged,
                    ))));
                }
                Position::Below => return Ok(BracketOutcome::Bracket(a)),
                Position::Above => {
                    up = Some(a);
                    a *= 0.5;
                }
            }
        }
        Err(Error::MaxBracketSteps {
            steps: self.cfg.max_bracket_steps,
            alpha: a,
        })
    }

    fn bisect(
        &self,
        cache: &mut TrialCache,
        mut low: f64,
        mut up: f64,
    ) -> Result<DiscrepancyResult> {
        if !(low > 0.0) || !low.is_finite() || !up.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bracket must be positive and finite, got [{low}, {up}]"
            )));
        }
        if !(low < up) {
            let trial = self.trial(cache, low)?;
            let bracket = Bracket {
                low: Some(low),
                up: Some(up),
            };
            return Ok(self.result(cache, trial, bracket, Status::NarrowIntervalWarning));
        }
        loop {
            let a = 0.5 * (low + up);
            if !(a > low && a < up) {
                break;
            }
            let trial = self.trial(cache, a)?;
            match self.classify(trial.phi) {
                Position::Accept => {
                    let bracket = Bracket {
                        low: Some(low),
                        up: Some(up),
                    };
                    return Ok(self.result(cache, trial, bracket, Status::Converged));
                }
                Position::Above => up = a,
                Position::Below => low = a,
            }
            if 0.5 * (up - low) < self.cfg.eps {
                break;
            }
        }
        let best = cache
            .iter()
            .filter(|t| t.a >= low && t.a <= up)
            .min_by(|x, y| {
                (x.phi - self.t.target)
                    .abs()
                    .total_cmp(&(y.phi - self.t.target).abs())
            })
            .cloned();
        let best = match best {
            Some(t) => t,
            None => self.trial(cache, low)?,
        };
        let bracket = Bracket {
            low: Some(low),
            up: Some(up),
        };
        Ok(self.result(cache, best, bracket, Status::NarrowIntervalWarning))
    }

    fn zero_result(&self, cache: &TrialCache) -> DiscrepancyResult {
        let zero = Vector::zeros(self.op.dim());
        let phi = self.op.apply(&zero).distance(self.f_delta);
        DiscrepancyResult {
            alpha: f64::INFINITY,
            v_delta: zero,
            phi_value: phi,
            residual: 0.0,
            total_inner_iters: cache.total_inner_iters(),
            bracket: Bracket::default(),
            status: Status::ZeroWithinDiscrepancy,
            thresholds: self.t,
            trials: Vec::new(),
        }
    }

    fn run(&self) -> Result<DiscrepancyResult> {
        if self.cfg.audit_monotonicity {
            let report = check_monotonicity(self.op, AUDIT_PAIRS, self.solver.radius, 0)?;
            if report.min_ratio < -MONOTONICITY_SLACK {
                return Err(Error::NotMonotone {
                    min_ratio: report.min_ratio,
                });
            }
        }
        let mut cache = TrialCache::new();
        let zero = Vector::zeros(self.op.dim());
        if self.op.eval(&zero)?.distance(self.f_delta) <= self.t.target {
            return Ok(self.zero_result(&cache));
        }

        let first_up = match self.find_up(&mut cache, self.cfg.a_init)? {
            BracketOutcome::EarlyAccept(r) => return Ok(*r),
            BracketOutcome::Bracket(a) => a,
        };
        let below_up = |cache: &TrialCache, up: f64| {
            cache
                .iter()
                .filter(|t| t.a < up && self.classify(t.phi) == Position::Below)
                .map(|t| t.a)
                .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))))
        };
        let low = match below_up(&cache, first_up) {
            Some(low) => low,
            None => match self.find_low(&mut cache, self.cfg.a_init)? {
                BracketOutcome::EarlyAccept(r) => return Ok(*r),
                BracketOutcome::Bracket(a) => a,
            },
        };
        // halving may have produced tighter upper ends
        let up = cache
            .iter()
            .filter(|t| t.a > low && self.classify(t.phi) == Position::Above)
            .map(|t| t.a)
            .fold(first_up, f64::min);
        self.bisect(&mut cache, low, up)
    }
}

/// Doubling search for `α_up` starting from `cfg.a_init`, recording trials
/// in `cache`.
pub fn find_alpha_up<O: Operator + ?Sized>(
    op: &O,
    f_delta: &Vector,
    delta: f64,
    cfg: &DiscrepancyConfig,
    solver_cfg: &IterationConfig,
    cache: &mut TrialCache,
) -> Result<BracketOutcome> {
    Session::new(op, f_delta, delta, cfg, solver_cfg)?.find_up(cache, cfg.a_init)
}

/// Halving search for `α_low` starting from `cfg.a_init`, recording trials
/// in `cache`.
pub fn find_alpha_low<O: Operator + ?Sized>(
    op: &O,
    f_delta: &Vector,
    delta: f64,
    cfg: &DiscrepancyConfig,
    solver_cfg: &IterationConfig,
    cache: &mut TrialCache,
) -> Result<BracketOutcome> {
    Session::new(op, f_delta, delta, cfg, solver_cfg)?.find_low(cache, cfg.a_init)
}

/// Bisection on `[alpha_low, alpha_up]`.
///
/// In band mode the first midpoint whose discrepancy lands in
/// `[C₁δ^γ, C₂δ^γ]` is accepted (both band edges are checked). In exact
/// mode bisection follows the sign of `φ − Cδ^γ` until it is within
/// `exact_tol`. A bracket narrower than `eps` ends the search with
/// [`Status::NarrowIntervalWarning`].
pub fn bisect_discrepancy<O: Operator + ?Sized>(
    op: &O,
    f_delta: &Vector,
    delta: f64,
    cfg: &DiscrepancyConfig,
    solver_cfg: &IterationConfig,
    alpha_low: f64,
    alpha_up: f64,
) -> Result<DiscrepancyResult> {
    let mut cache = TrialCache::new();
    Session::new(op, f_delta, delta, cfg, solver_cfg)?.bisect(&mut cache, alpha_low, alpha_up)
}

/// Full pipeline: monotonicity audit (unless disabled), precondition,
/// bracketing with a shared trial cache, bisection.
pub fn solve_discrepancy<O: Operator + ?Sized>(
    op: &O,
    f_delta: &Vector,
    delta: f64,
    cfg: &DiscrepancyConfig,
    solver_cfg: &IterationConfig,
) -> Result<DiscrepancyResult> {
    Session::new(op, f_delta, delta, cfg, solver_cfg)?.run()
}

/// `u ↦ F(u + ū)`.
pub struct ShiftedOperator<'a, O: ?Sized> {
    inner: &'a O,
    shift: Vector,
    shift_norm: f64,
}

impl<'a, O: Operator + ?Sized> ShiftedOperator<'a, O> {
    pub fn new(inner: &'a O, shift: Vector) -> Result<Self> {
        if shift.dim() != inner.dim() {
            return Err(Error::DimensionMismatch {
                expected: inner.dim(),
                found: shift.dim(),
            });
        }
        let shift_norm = shift.norm();
        Ok(Self {
            inner,
            shift,
            shift_norm,
        })
    }
}

impl<O: Operator + ?Sized> Operator for ShiftedOperator<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, u: &Vector) -> Vector {
        self.inner.apply(&(u + &self.shift))
    }
    fn lipschitz_bound(&self, radius: f64) -> Option<f64> {
        self.inner.lipschitz_bound(radius + self.shift_norm)
    }
}

/// Discrepancy principle for `F(V) + a(V − ū) = f_δ`, selecting in the limit
/// the solution closest to `ū`.
///
/// Runs the pipeline on `F₁(u) = F(u + ū)` and shifts back. For linear `F`
/// this is the unshifted problem with data `f_δ − F(ū)`, which keeps the
/// conjugate-gradient path available.
pub fn solve_discrepancy_shifted<O: Operator + ?Sized>(
    op: &O,
    f_delta: &Vector,
    delta: f64,
    u_bar: &Vector,
    cfg: &DiscrepancyConfig,
    solver_cfg: &IterationConfig,
) -> Result<DiscrepancyResult> {
    let shifted = ShiftedOperator::new(op, u_bar.clone())?;
    let mut result = if op.is_linear() {
        let data = f_delta - &op.eval(u_bar)?;
        solve_discrepancy(op, &data, delta, cfg, solver_cfg)?
    } else {
        solve_discrepancy(&shifted, f_delta, delta, cfg, solver_cfg)?
    };
    result.v_delta = &result.v_delta + u_bar;
    Ok(result)
}

/// Outcome of re-checking a result against the acceptance conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Audit {
    pub residual: f64,
    pub phi: f64,
    pub residual_ok: bool,
    pub band_ok: bool,
}

impl Audit {
    pub fn passed(&self) -> bool {
        self.residual_ok && self.band_ok
    }
}

/// Independently re-evaluate `‖F(v)+αv−f_δ‖ ≤ θδ` and the mode's acceptance
/// condition on `φ` for a given `(α, v)`.
pub fn audit_result<O: Operator + ?Sized>(
    op: &O,
    f_delta: &Vector,
    delta: f64,
    cfg: &DiscrepancyConfig,
    alpha: f64,
    v: &Vector,
) -> Result<Audit> {
    let t = cfg.validate(delta)?;
    let fv = op.eval(v)?;
    let phi = fv.distance(f_delta);
    let mut r = fv;
    r.axpy(alpha, v);
    r.axpy(-1.0, f_delta);
    let residual = r.norm();
    let band_ok = match cfg.mode {
        Mode::Band => t.lower <= phi && phi <= t.upper,
        Mode::Exact => (phi - t.target).abs() <= cfg.exact_tol,
    };
    Ok(Audit {
        residual,
        phi,
        residual_ok: residual <= t.residual,
        band_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::DiagonalOperator;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    fn identity_cfg() -> DiscrepancyConfig {
        DiscrepancyConfig {
            c: 1.5,
            gamma: 0.5,
            c1: 1.0,
            c2: 2.0,
            theta: 0.4,
            ..Default::default()
        }
    }

    #[test]
    fn phi_psi_identity() {
        let id = DiagonalOperator::identity(2);
        let cfg = IterationConfig::default();
        let r = phi_psi(&id, &v(&[1.0, 0.0]), 1.0, &cfg).unwrap();
        assert_relative_eq!(r.phi, 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.psi, 0.5, epsilon = 1e-12);
        let r = phi_psi(&id, &v(&[1.0, 0.0]), 1000.0, &cfg).unwrap();
        assert_relative_eq!(r.phi, 1000.0 / 1001.0, epsilon = 1e-12);
    }

    #[test]
    fn precondition_examples() {
        let id = DiagonalOperator::identity(2);
        let cfg = identity_cfg();
        assert_eq!(
            precondition_check(&id, &v(&[1.0, 0.0]), 0.01, &cfg).unwrap(),
            Precondition::Proceed
        );
        assert_eq!(
            precondition_check(&id, &v(&[0.1, 0.0]), 0.01, &cfg).unwrap(),
            Precondition::ZeroWithinDiscrepancy
        );
    }

    #[test]
    fn config_boundary_case() {
        // C·δ^γ = 0.909 > δ = 0.9
        let cfg = DiscrepancyConfig {
            c: 1.01,
            gamma: 1.0,
            c1: 0.5,
            c2: 2.0,
            theta: 0.4,
            ..Default::default()
        };
        let t = cfg.validate(0.9).unwrap();
        assert_relative_eq!(t.target, 0.909, epsilon = 1e-12);
        let too_small = DiscrepancyConfig {
            c: 0.99,
            c1: 0.5,
            ..cfg.clone()
        };
        assert!(too_small.validate(0.9).is_err());
    }

    #[test]
    fn config_rejects_band_violations() {
        let base = identity_cfg();
        let cases = [
            DiscrepancyConfig {
                c1: 1.6,
                ..base.clone()
            },
            DiscrepancyConfig {
                c2: 1.4,
                ..base.clone()
            },
            DiscrepancyConfig {
                gamma: 0.0,
                ..base.clone()
            },
            DiscrepancyConfig {
                gamma: 1.5,
                ..base.clone()
            },
            DiscrepancyConfig {
                theta: 10.0,
                ..base.clone()
            },
            DiscrepancyConfig {
                eps: 0.0,
                ..base.clone()
            },
        ];
        for cfg in cases {
            let err = cfg.validate(0.01).unwrap_err();
            assert!(matches!(err, Error::InvalidConfig(_)), "{cfg:?}");
        }
        // θδ eats the band: C1δ^γ + θδ ≥ Cδ^γ
        let err = DiscrepancyConfig { theta: 6.0, ..base }
            .validate(0.01)
            .unwrap_err();
        assert!(err.to_string().contains("C1"));
    }

    #[test]
    fn alpha_up_doubling() {
        let id = DiagonalOperator::identity(2);
        let f = v(&[1.0, 0.0]);
        let solver = IterationConfig::default();
        // band [0.1, 0.2]; C1 low enough that 0.2 does not early-accept
        let cfg = DiscrepancyConfig {
            c1: 0.5,
            a_init: 0.1,
            ..identity_cfg()
        };
        let mut cache = TrialCache::new();
        let out = find_alpha_up(&id, &f, 0.01, &cfg, &solver, &mut cache).unwrap();
        // φ(0.1)=0.0909 and φ(0.2)=0.1667 lie in [0.05, 0.2]: 0.1 accepts at once
        assert!(matches!(out, BracketOutcome::EarlyAccept(_)));

        let cfg = DiscrepancyConfig {
            c1: 1.0,
            a_init: 0.1,
            ..identity_cfg()
        };
        let mut cache = TrialCache::new();
        match find_alpha_up(&id, &f, 0.01, &cfg, &solver, &mut cache).unwrap() {
            BracketOutcome::EarlyAccept(r) => {
                assert_eq!(r.alpha, 0.2);
                assert!((r.phi_value - 0.2 / 1.2).abs() < 1e-9);
            }
            other => panic!("expected early accept, got {other:?}"),
        }

        let cfg = DiscrepancyConfig {
            a_init: 1.0,
            ..identity_cfg()
        };
        let mut cache = TrialCache::new();
        assert_eq!(
            find_alpha_up(&id, &f, 0.01, &cfg, &solver, &mut cache).unwrap(),
            BracketOutcome::Bracket(1.0)
        );
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn alpha_up_visits_doubling_sequence() {
        // narrow band [0.17, 0.2] so that 0.1 and 0.2 fall outside it
        let id = DiagonalOperator::identity(2);
        let f = v(&[1.0, 0.0]);
        let cfg = DiscrepancyConfig {
            c: 1.8,
            c1: 1.7,
            c2: 2.0,
            theta: 0.01,
            a_init: 0.1,
            ..identity_cfg()
        };
        let mut cache = TrialCache::new();
        let out =
            find_alpha_up(&id, &f, 0.01, &cfg, &IterationConfig::default(), &mut cache).unwrap();
        assert_eq!(out, BracketOutcome::Bracket(0.4));
        let visited: Vec<f64> = cache.iter().map(|t| t.a).collect();
        assert_eq!(visited, vec![0.1, 0.2, 0.4]);
    }

    #[test]
    fn alpha_low_halving() {
        let id = DiagonalOperator::identity(2);
        let f = v(&[1.0, 0.0]);
        let solver = IterationConfig::default();
        let mut cache = TrialCache::new();
        let cfg = DiscrepancyConfig {
            a_init: 0.05,
            ..identity_cfg()
        };
        assert_eq!(
            find_alpha_low(&id, &f, 0.01, &cfg, &solver, &mut cache).unwrap(),
            BracketOutcome::Bracket(0.05)
        );

        let cfg = DiscrepancyConfig {
            a_init: 0.4,
            ..identity_cfg()
        };
        let mut cache = TrialCache::new();
        match find_alpha_low(&id, &f, 0.01, &cfg, &solver, &mut cache).unwrap() {
            BracketOutcome::EarlyAccept(r) => assert_eq!(r.alpha, 0.2),
            other => panic!("expected early accept, got {other:?}"),
        }

        let cfg = DiscrepancyConfig {
            a_init: 0.15,
            ..identity_cfg()
        };
        let mut cache = TrialCache::new();
        match find_alpha_low(&id, &f, 0.01, &cfg, &solver, &mut cache).unwrap() {
            BracketOutcome::EarlyAccept(r) => {
                assert_eq!(r.alpha, 0.15);
                assert_eq!(cache.len(), 1);
            }
            other => panic!("expected early accept, got {other:?}"),
        }
    }

    #[test]
    fn bisect_identity_band() {
        let id = DiagonalOperator::identity(2);
        let f = v(&[1.0, 0.0]);
        let r = bisect_discrepancy(
            &id,
            &f,
            0.01,
            &identity_cfg(),
            &IterationConfig::default(),
            0.05,
            0.4,
        )
        .unwrap();
        assert_eq!(r.status, Status::Converged);
        assert_eq!(r.alpha, 0.225);
        assert_relative_eq!(r.phi_value, 0.225 / 1.225, epsilon = 1e-3);
        assert!(r.v_delta.distance(&v(&[1.0 / 1.225, 0.0])) <= 0.004 / 0.225);
    }

    #[test]
    fn bisect_degenerate_bracket() {
        let id = DiagonalOperator::identity(2);
        let f = v(&[1.0, 0.0]);
        let r = bisect_discrepancy(
            &id,
            &f,
            0.01,
            &identity_cfg(),
            &IterationConfig::default(),
            0.3,
            0.3,
        )
        .unwrap();
        assert_eq!(r.status, Status::NarrowIntervalWarning);
        assert!(bisect_discrepancy(
            &id,
            &f,
            0.01,
            &identity_cfg(),
            &IterationConfig::default(),
            0.0,
            0.3
        )
        .is_err());
    }

    #[test]
    fn bisect_narrow_interval_without_band_hit() {
        // both ends above the band: bisection shrinks toward the low end
        let id = DiagonalOperator::identity(2);
        let f = v(&[1.0, 0.0]);
        let cfg = DiscrepancyConfig {
            eps: 1e-3,
            ..identity_cfg()
        };
        let r =
            bisect_discrepancy(&id, &f, 0.01, &cfg, &IterationConfig::default(), 0.5, 0.6).unwrap();
        assert_eq!(r.status, Status::NarrowIntervalWarning);
        let b = r.bracket;
        assert!(b.up.unwrap() - b.low.unwrap() < 2e-3);
    }

    #[test]
    fn pipeline_identity() {
        let id = DiagonalOperator::identity(2);
        let r = solve_discrepancy(
            &id,
            &v(&[1.0, 0.0]),
            0.01,
            &identity_cfg(),
            &IterationConfig::default(),
        )
        .unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!(r.phi_value >= 0.1 && r.phi_value <= 0.2);
        let audit = audit_result(
            &id,
            &v(&[1.0, 0.0]),
            0.01,
            &identity_cfg(),
            r.alpha,
            &r.v_delta,
        )
        .unwrap();
        assert!(audit.passed());

        let r = solve_discrepancy(
            &id,
            &v(&[0.1, 0.0]),
            0.01,
            &identity_cfg(),
            &IterationConfig::default(),
        )
        .unwrap();
        assert_eq!(r.status, Status::ZeroWithinDiscrepancy);
        assert_eq!(r.v_delta, Vector::zeros(2));
        assert!(r.alpha.is_infinite());
    }

    #[test]
    fn pipeline_rejects_non_monotone() {
        let op = DiagonalOperator::new(vec![1.0, -1.0]).unwrap();
        let err = solve_discrepancy(
            &op,
            &v(&[1.0, 1.0]),
            0.01,
            &identity_cfg(),
            &IterationConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotMonotone { .. }));
    }

    #[test]
    fn shifted_zero_matches_unshifted() {
        let op = DiagonalOperator::new(vec![1.0, 0.5, 0.1]).unwrap();
        let f = v(&[1.0, 0.4, 0.05]);
        let cfg = identity_cfg();
        let solver = IterationConfig::default();
        let a = solve_discrepancy(&op, &f, 0.01, &cfg, &solver).unwrap();
        let b = solve_discrepancy_shifted(&op, &f, 0.01, &Vector::zeros(3), &cfg, &solver).unwrap();
        assert_eq!(a.alpha, b.alpha);
        assert_eq!(a.v_delta, b.v_delta);
    }

    #[test]
    fn shifted_operator_regularized_closed_form() {
        // F = I, shift ū: F(U+ū) + aU = f  ⇒  Ṽ = U + ū = (f + aū)/(1+a)
        let id = DiagonalOperator::identity(2);
        let u_bar = v(&[1.0, 0.0]);
        let shifted = ShiftedOperator::new(&id, u_bar.clone()).unwrap();
        let f = v(&[0.3, 0.7]);
        let a = 0.6;
        let (u, _) = crate::regsolve::solve_regularized(
            &shifted,
            &f,
            a,
            &Vector::zeros(2),
            &IterationConfig::default(),
        )
        .unwrap();
        let tilde = &u + &u_bar;
        let expect = (1.0 / (1.0 + a)) * &(&f + &(a * &u_bar));
        assert!(tilde.distance(&expect) <= 1e-11);
    }

    #[test]
    fn trial_cache_nearest_is_log_scale() {
        let mut cache = TrialCache::new();
        for a in [0.01, 1.0] {
            cache.insert(Trial {
                a,
                v: Vector::zeros(1),
                phi: 0.0,
                psi: 0.0,
                residual: 0.0,
                inner_iters: 3,
            });
        }
        assert_eq!(cache.nearest(0.2).unwrap().a, 1.0);
        assert_eq!(cache.nearest(0.05).unwrap().a, 0.01);
        assert_eq!(cache.total_inner_iters(), 6);
    }
}

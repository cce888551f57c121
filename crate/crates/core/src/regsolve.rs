//! Solvers for the regularized equation `F(V) + aV = f_δ`.
//!
//! Two routes are provided: the contraction iteration
//! `u_{n+1} = u_n − λ[F(u_n) + a·u_n − f_δ]` for monotone, locally Lipschitz
//! `F`, and conjugate gradients on `(A + aI)u = f_δ` for linear monotone `A`.
//! Both stop at the first iterate whose residual is at most
//! `max(θδ, tol_min)`. Since `a‖u − v‖ ≤ ‖F(u) − F(v) + a(u − v)‖` for
//! monotone `F`, the returned iterate is within `max(θδ, tol_min)/a` of the
//! exact solution.

use crate::error::{Error, Result};
use crate::space::{estimate_lipschitz, Operator, Vector};

/// Number of consecutive non-decreasing residuals treated as stagnation.
pub const STAGNATION_WINDOW: usize = 5;
/// How many times the Lipschitz estimate is doubled after stagnation.
pub const MAX_LIPSCHITZ_RETRIES: usize = 5;
/// Pairs sampled when the operator does not declare a Lipschitz bound.
pub const LIPSCHITZ_PROBE_PAIRS: usize = 50;
const LIPSCHITZ_PROBE_SEED: u64 = 0x4c49_5053;

/// Step size of the contraction iteration and the contraction factor it buys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepChoice {
    pub lambda: f64,
    pub q: f64,
}

impl StepChoice {
    /// Contraction factor of an arbitrary step `lambda` for the pair `(a, L)`.
    /// Fails unless `0 < lambda < 2a/(a+L)²`.
    pub fn with_lambda(a: f64, lipschitz: f64, lambda: f64) -> Result<Self> {
        check_a_l(a, lipschitz)?;
        let upper = 2.0 * a / (a + lipschitz).powi(2);
        if !(lambda > 0.0 && lambda < upper) {
            return Err(Error::InvalidArgument(format!(
                "step {lambda} outside contraction interval (0, {upper})"
            )));
        }
        let q2 = 1.0 - 2.0 * lambda * a + (lambda * (a + lipschitz)).powi(2);
        Ok(Self {
            lambda,
            q: q2.max(0.0).sqrt(),
        })
    }
}

fn check_a_l(a: f64, lipschitz: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "regularization parameter must be positive and finite, got {a}"
        )));
    }
    if !(lipschitz >= 0.0) || !lipschitz.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Lipschitz constant must be non-negative and finite, got {lipschitz}"
        )));
    }
    Ok(())
}

/// Step minimizing the contraction bound `1 − 2λa + λ²(a+L)²`:
/// `λ = a/(a+L)²`, `q = sqrt(1 − a²/(a+L)²)`.
pub fn optimal_step(a: f64, lipschitz: f64) -> Result<StepChoice> {
    check_a_l(a, lipschitz)?;
    let s = a + lipschitz;
    let ratio = a / s;
    Ok(StepChoice {
        lambda: a / (s * s),
        q: (1.0 - ratio * ratio).max(0.0).sqrt(),
    })
}

/// Which inner solver the pipeline uses for `F(V) + aV = f_δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerMethod {
    /// Conjugate gradients for linear operators, the contraction iteration otherwise.
    #[default]
    Auto,
    FixedPoint,
    ConjugateGradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationConfig {
    /// Stopping multiplier θ.
    pub theta: f64,
    /// Noise level δ.
    pub delta: f64,
    /// Absolute residual floor, used when θδ is smaller (in particular δ = 0).
    pub tol_min: f64,
    pub max_iter: usize,
    /// Radius passed to [`Operator::lipschitz_bound`].
    pub radius: f64,
    pub lambda_override: Option<f64>,
    pub method: InnerMethod,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            theta: 0.4,
            delta: 0.0,
            tol_min: 1e-12,
            max_iter: 100_000,
            radius: 10.0,
            lambda_override: None,
            method: InnerMethod::Auto,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return bad(format!("theta must be positive, got {}", self.theta));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return bad(format!("delta must be non-negative, got {}", self.delta));
        }
        if !(self.tol_min > 0.0) {
            return bad(format!("tol_min must be positive, got {}", self.tol_min));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if !(self.radius > 0.0) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        if let Some(l) = self.lambda_override {
            if !(l > 0.0) || !l.is_finite() {
                return bad(format!("lambda_override must be positive, got {l}"));
            }
        }
        Ok(())
    }

    /// `max(θδ, tol_min)`.
    pub fn stop_tolerance(&self) -> f64 {
        (self.theta * self.delta).max(self.tol_min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    /// Iterations performed in the accepted run.
    pub n_stop: usize,
    /// `‖F(u_n) + a·u_n − f_δ‖` for `n = 0..=n_stop`.
    pub residuals: Vec<f64>,
    /// Geometric-mean residual ratio `(r_n / r_0)^(1/n)`.
    pub q_hat: f64,
    /// Step used by the contraction iteration (absent for CG and for
    /// overridden steps without a Lipschitz constant).
    pub step: Option<StepChoice>,
    /// Lipschitz constant the accepted run was based on.
    pub lipschitz: Option<f64>,
    /// Runs abandoned because of stagnation.
    pub retries: usize,
    /// Iterations spent in abandoned runs.
    pub discarded_iters: usize,
}

impl SolveTrace {
    fn new(residuals: Vec<f64>) -> Self {
        let n_stop = residuals.len() - 1;
        let q_hat = if n_stop == 0 || residuals[0] == 0.0 {
            0.0
        } else {
            (residuals[n_stop] / residuals[0]).powf(1.0 / n_stop as f64)
        };
        Self {
            n_stop,
            residuals,
            q_hat,
            step: None,
            lipschitz: None,
            retries: 0,
            discarded_iters: 0,
        }
    }

    pub fn final_residual(&self) -> f64 {
        *self
            .residuals
            .last()
            .expect("trace holds the initial residual")
    }

    /// Total work, counting abandoned runs.
    pub fn total_iters(&self) -> usize {
        self.n_stop + self.discarded_iters
    }
}

fn check_problem<O: Operator + ?Sized>(op: &O, f_delta: &Vector, a: f64) -> Result<()> {
    if f_delta.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: f_delta.dim(),
        });
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "regularization parameter must be positive and finite, got {a}"
        )));
    }
    Ok(())
}

fn regularized_residual<O: Operator + ?Sized>(
    op: &O,
    u: &Vector,
    a: f64,
    f_delta: &Vector,
) -> Vector {
    let mut r = op.apply(u);
    r.axpy(a, u);
    r.axpy(-1.0, f_delta);
    r
}

/// `‖F(u) + a·u − f_δ‖`.
pub fn residual_norm<O: Operator + ?Sized>(
    op: &O,
    u: &Vector,
    a: f64,
    f_delta: &Vector,
) -> Result<f64> {
    for d in [u.dim(), f_delta.dim()] {
        if d != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                found: d,
            });
        }
    }
    Ok(regularized_residual(op, u, a, f_delta).norm())
}

enum RunOutcome {
    Converged(Vector, Vec<f64>),
    Stagnated { best: Vector, iters: usize },
}

fn contraction_run<O: Operator + ?Sized>(
    op: &O,
    f_delta: &Vector,
    a: f64,
    start: Vector,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<RunOutcome> {
    let mut u = start;
    let mut r = regularized_residual(op, &u, a, f_delta);
    let mut res = r.norm();
    let mut residuals = vec![res];
    let mut best = (res, u.clone());
    let mut streak = 0;
    loop {
        if !res.is_finite() || !u.is_finite() {
            return Err(Error::NonFinite(format!(
                "contraction iterate {} (residual {res})",
                residuals.len() - 1
            )));
        }
        if res <= tol {
            return Ok(RunOutcome::Converged(u, residuals));
        }
        let n = residuals.len() - 1;
        if n >= max_iter {
            return Err(Error::MaxIterExceeded {
                max_iter,
                residual: best.0,
            });
        }
        u.axpy(-lambda, &r);
        r = regularized_residual(op, &u, a, f_delta);
        let next = r.norm();
        if next >= res {
            streak += 1;
        } else {
            streak = 0;
        }
        res = next;
        residuals.push(res);
        if res < best.0 {
            best = (res, u.clone());
        }
        if streak >= STAGNATION_WINDOW {
            return Ok(RunOutcome::Stagnated {
                best: best.1,
                iters: residuals.len() - 1,
            });
        }
    }
}

/// Contraction iteration for `F(V) + aV = f_δ` started from `u0`.
///
/// The step is `a/(a+L)²` with `L = F.lipschitz_bound(cfg.radius)`, or a
/// sampled estimate when the operator declares none. A run whose residual
/// stops decreasing is taken as evidence that `L` is too small: `L` is
/// doubled and the iteration restarts from the best iterate so far, at most
/// [`MAX_LIPSCHITZ_RETRIES`] times.
pub fn solve_regularized<O: Operator + ?Sized>(
    op: &O,
    f_delta: &Vector,
    a: f64,
    u0: &Vector,
    cfg: &IterationConfig,
) -> Result<(Vector, SolveTrace)> {
    check_problem(op, f_delta, a)?;
    cfg.validate()?;
    if u0.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: u0.dim(),
        });
    }
    let tol = cfg.stop_tolerance();

    if let Some(lambda) = cfg.lambda_override {
        let lipschitz = op.lipschitz_bound(cfg.radius);
        return match contraction_run(op, f_delta, a, u0.clone(), lambda, tol, cfg.max_iter)? {
            RunOutcome::Converged(v, residuals) => {
                let mut trace = SolveTrace::new(residuals);
                trace.lipschitz = lipschitz;
                trace.step = lipschitz.and_then(|l| StepChoice::with_lambda(a, l, lambda).ok());
                Ok((v, trace))
            }
            RunOutcome::Stagnated { .. } => Err(Error::Stagnation {
                retries: 0,
                lipschitz: lipschitz.unwrap_or(f64::NAN),
            }),
        };
    }

    let mut lipschitz = match op.lipschitz_bound(cfg.radius) {
        Some(l) => l,
        None => estimate_lipschitz(
            op,
            u0,
            cfg.radius,
            LIPSCHITZ_PROBE_PAIRS,
            LIPSCHITZ_PROBE_SEED,
        )?,
    };
    let mut start = u0.clone();
    let mut discarded = 0;
    for retry in 0..=MAX_LIPSCHITZ_RETRIES {
        let step = optimal_step(a, lipschitz)?;
        let budget = cfg.max_iter.saturating_sub(discarded).max(1);
        match contraction_run(op, f_delta, a, start, step.lambda, tol, budget)? {
            RunOutcome::Converged(v, residuals) => {
                let mut trace = SolveTrace::new(residuals);
                trace.step = Some(step);
                trace.lipschitz = Some(lipschitz);
                trace.retries = retry;
                trace.discarded_iters = discarded;
                return Ok((v, trace));
            }
            RunOutcome::Stagnated { best, iters } => {
                discarded += iters;
                start = best;
                lipschitz = if lipschitz > 0.0 {
                    2.0 * lipschitz
                } else {
                    1.0
                };
            }
        }
    }
    Err(Error::Stagnation {
        retries: MAX_LIPSCHITZ_RETRIES,
        lipschitz,
    })
}

/// Conjugate gradients on `(A + aI)u = f_δ` for linear `A`, started from
/// `u0` (zero when absent).
///
/// The recursive residual drives the iteration; the true residual is
/// recomputed before accepting, and CG restarts from the current iterate if
/// the two disagree.
pub fn solve_regularized_linear<O: Operator + ?Sized>(
    op: &O,
    f_delta: &Vector,
    a: f64,
    u0: Option<&Vector>,
    cfg: &IterationConfig,
) -> Result<(Vector, SolveTrace)> {
    check_problem(op, f_delta, a)?;
    cfg.validate()?;
    if !op.is_linear() {
        return Err(Error::InvalidArgument(
            "conjugate gradients require a linear operator".into(),
        ));
    }
    let mut x = match u0 {
        Some(u) if u.dim() != op.dim() => {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                found: u.dim(),
            })
        }
        Some(u) => u.clone(),
        None => Vector::zeros(op.dim()),
    };
    let tol = cfg.stop_tolerance();
    let shifted = |p: &Vector| {
        let mut out = op.apply(p);
        out.axpy(a, p);
        out
    };

    let mut r = f_delta - &shifted(&x);
    let mut rr = r.dot(&r);
    let mut residuals = vec![rr.sqrt()];
    let mut p = r.clone();
    let mut iter = 0;
    loop {
        let res = *residuals.last().unwrap();
        if !res.is_finite() || !x.is_finite() {
            return Err(Error::NonFinite(format!("CG iterate {iter}")));
        }
        if res <= tol {
            let true_r = f_delta - &shifted(&x);
            let true_res = true_r.norm();
            *residuals.last_mut().unwrap() = true_res;
            if true_res <= tol {
                return Ok((x, SolveTrace::new(residuals)));
            }
            r = true_r;
            rr = r.dot(&r);
            p = r.clone();
        }
        if iter >= cfg.max_iter {
            return Err(Error::MaxIterExceeded {
                max_iter: cfg.max_iter,
                residual: res,
            });
        }
        let ap = shifted(&p);
        let curvature = p.dot(&ap);
        if !(curvature > 0.0) {
            if curvature.is_nan() {
                return Err(Error::NonFinite(format!(
                    "CG curvature at iteration {iter}"
                )));
            }
            return Err(Error::IndefinitenessDetected {
                iteration: iter,
                curvature,
            });
        }
        let alpha = rr / curvature;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        let rr_next = r.dot(&r);
        let beta = rr_next / rr;
        rr = rr_next;
        p = &r + &(beta * &p);
        iter += 1;
        residuals.push(rr.sqrt());
    }
}

/// Dispatch on [`IterationConfig::method`]. `u0` defaults to the zero vector.
pub fn solve_auto<O: Operator + ?Sized>(
    op: &O,
    f_delta: &Vector,
    a: f64,
    u0: Option<&Vector>,
    cfg: &IterationConfig,
) -> Result<(Vector, SolveTrace)> {
    let use_cg = match cfg.method {
        InnerMethod::Auto => op.is_linear(),
        InnerMethod::FixedPoint => false,
        InnerMethod::ConjugateGradient => true,
    };
    if use_cg {
        solve_regularized_linear(op, f_delta, a, u0, cfg)
    } else {
        match u0 {
            Some(u) => solve_regularized(op, f_delta, a, u, cfg),
            None => solve_regularized(op, f_delta, a, &Vector::zeros(op.dim()), cfg),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{DiagonalOperator, FnOperator};
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn optimal_step_values() {
        let s = optimal_step(1.0, 1.0).unwrap();
        assert_relative_eq!(s.lambda, 0.25);
        assert_relative_eq!(s.q, 0.75_f64.sqrt(), epsilon = 1e-15);

        let s = optimal_step(1.0, 0.0).unwrap();
        assert_eq!((s.lambda, s.q), (1.0, 0.0));

        let s = optimal_step(2.0, 2.0).unwrap();
        assert_relative_eq!(s.lambda, 0.125);
        assert_relative_eq!(s.q, 0.75_f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn optimal_step_minimizes_contraction_bound() {
        // brute-force scan of the admissible interval
        for &(a, l) in &[(1.0, 1.0), (0.1, 3.0), (5.0, 0.5)] {
            let best = optimal_step(a, l).unwrap();
            let upper = 2.0 * a / (a + l) * 1.0 / (a + l);
            assert!(best.lambda > 0.0 && best.lambda < upper);
            let bound = |lam: f64| 1.0 - 2.0 * lam * a + lam * lam * (a + l) * (a + l);
            let scan_min = (1..10_000)
                .map(|k| bound(upper * k as f64 / 10_000.0))
                .fold(f64::INFINITY, f64::min);
            assert!(best.q * best.q <= scan_min + 1e-12);
            assert_relative_eq!(best.q * best.q, bound(best.lambda), epsilon = 1e-14);
        }
    }

    #[test]
    fn optimal_step_rejects_bad_a() {
        assert!(optimal_step(0.0, 1.0).is_err());
        assert!(optimal_step(-1.0, 1.0).is_err());
        assert!(optimal_step(1.0, -1.0).is_err());
    }

    #[test]
    fn with_lambda_checks_interval() {
        assert!(StepChoice::with_lambda(1.0, 1.0, 0.5).is_err());
        let s = StepChoice::with_lambda(1.0, 1.0, 0.25).unwrap();
        assert_relative_eq!(s.q, 0.75_f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn identity_closed_form_iteration() {
        // u_{n+1} = u_n/2 + f/4, residual_n = 2^-n
        let op = DiagonalOperator::identity(2);
        let cfg = IterationConfig {
            theta: 1.0,
            delta: 1e-3,
            lambda_override: Some(0.25),
            ..Default::default()
        };
        let (u, trace) =
            solve_regularized(&op, &v(&[1.0, 0.0]), 1.0, &Vector::zeros(2), &cfg).unwrap();
        assert_eq!(trace.n_stop, 10);
        for (n, r) in trace.residuals.iter().enumerate() {
            assert_relative_eq!(*r, 0.5_f64.powi(n as i32), epsilon = 1e-15);
        }
        assert!((u.as_slice()[0] - 0.5).abs() <= 1e-3);
        assert_eq!(u.as_slice()[1], 0.0);
    }

    #[test]
    fn exact_start_stops_immediately() {
        let op = DiagonalOperator::identity(2);
        let cfg = IterationConfig::default();
        let (u, trace) =
            solve_regularized(&op, &v(&[1.0, 0.0]), 1.0, &v(&[0.5, 0.0]), &cfg).unwrap();
        assert_eq!(trace.n_stop, 0);
        assert_eq!(u, v(&[0.5, 0.0]));
    }

    #[test]
    fn identity_large_a() {
        let op = DiagonalOperator::identity(2);
        let cfg = IterationConfig {
            delta: 0.01,
            ..Default::default()
        };
        let (u, _) =
            solve_regularized(&op, &v(&[1.0, 0.0]), 10.0, &Vector::zeros(2), &cfg).unwrap();
        assert!(u.distance(&v(&[1.0 / 11.0, 0.0])) <= cfg.stop_tolerance() / 10.0);
    }

    #[test]
    fn unknown_lipschitz_is_estimated() {
        let op = FnOperator::new(2, |u: &Vector| 3.0 * u);
        let cfg = IterationConfig::default();
        let (u, trace) =
            solve_regularized(&op, &v(&[4.0, 8.0]), 1.0, &Vector::zeros(2), &cfg).unwrap();
        assert!(u.distance(&v(&[1.0, 2.0])) <= 1e-11);
        assert_relative_eq!(trace.lipschitz.unwrap(), 3.0, max_relative = 1e-9);
    }

    #[test]
    fn understated_lipschitz_triggers_doubling() {
        // declared L = 0.1 while the true constant is 20: the first step
        // overshoots and the residual grows until L is doubled enough
        let op = DiagonalOperator::new(vec![20.0, 1.0]).unwrap();
        let lying = FnOperator::new(2, move |u: &Vector| op.apply(u)).with_lipschitz(|_| 0.1);
        let cfg = IterationConfig::default();
        let (u, trace) =
            solve_regularized(&lying, &v(&[21.0, 2.0]), 1.0, &Vector::zeros(2), &cfg).unwrap();
        assert!(trace.retries > 0);
        assert!(u.distance(&v(&[1.0, 1.0])) <= 1e-11);
    }

    #[test]
    fn hopeless_lipschitz_gives_stagnation() {
        let lying = FnOperator::new(1, |u: &Vector| 1e6 * u).with_lipschitz(|_| 0.0);
        let cfg = IterationConfig::default();
        let err = solve_regularized(&lying, &v(&[1.0]), 1.0, &Vector::zeros(1), &cfg).unwrap_err();
        assert!(matches!(err, Error::Stagnation { .. }), "{err:?}");
    }

    #[test]
    fn max_iter_exceeded() {
        let op = DiagonalOperator::identity(1);
        let cfg = IterationConfig {
            max_iter: 3,
            lambda_override: Some(0.01),
            ..Default::default()
        };
        let err = solve_regularized(&op, &v(&[1.0]), 1.0, &Vector::zeros(1), &cfg).unwrap_err();
        assert!(matches!(err, Error::MaxIterExceeded { max_iter: 3, .. }));
    }

    #[test]
    fn diverging_step_reports_stagnation_or_nonfinite() {
        let op = DiagonalOperator::identity(1);
        let cfg = IterationConfig {
            lambda_override: Some(10.0),
            ..Default::default()
        };
        let err = solve_regularized(&op, &v(&[1.0]), 1.0, &Vector::zeros(1), &cfg).unwrap_err();
        assert!(matches!(
            err,
            Error::Stagnation { .. } | Error::NonFinite(_)
        ));
    }

    #[test]
    fn cg_examples() {
        let cfg = IterationConfig::default();
        let (u, _) = solve_regularized_linear(
            &DiagonalOperator::identity(2),
            &v(&[1.0, 0.0]),
            1.0,
            None,
            &cfg,
        )
        .unwrap();
        assert!(u.distance(&v(&[0.5, 0.0])) <= 1e-12);

        let a = DiagonalOperator::new(vec![1.0, 2.0]).unwrap();
        let (u, _) = solve_regularized_linear(&a, &v(&[1.0, 1.0]), 1.0, None, &cfg).unwrap();
        assert!(u.distance(&v(&[0.5, 1.0 / 3.0])) <= 1e-12);

        let zero = DiagonalOperator::scaled_identity(2, 0.0);
        let (u, _) = solve_regularized_linear(&zero, &v(&[4.0, 2.0]), 2.0, None, &cfg).unwrap();
        assert!(u.distance(&v(&[2.0, 1.0])) <= 1e-12);
    }

    #[test]
    fn cg_detects_indefiniteness() {
        let a = DiagonalOperator::new(vec![1.0, -5.0]).unwrap();
        let err =
            solve_regularized_linear(&a, &v(&[1.0, 1.0]), 1.0, None, &IterationConfig::default())
                .unwrap_err();
        assert!(
            matches!(err, Error::IndefinitenessDetected { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn cg_requires_linear() {
        let op = FnOperator::new(1, |u: &Vector| u.map(|x| x * x * x));
        assert!(
            solve_regularized_linear(&op, &v(&[1.0]), 1.0, None, &IterationConfig::default())
                .is_err()
        );
    }

    #[test]
    fn residual_norm_examples() {
        let id = DiagonalOperator::identity(2);
        let f = v(&[1.0, 0.0]);
        assert_eq!(residual_norm(&id, &v(&[0.5, 0.0]), 1.0, &f).unwrap(), 0.0);
        assert_eq!(residual_norm(&id, &Vector::zeros(2), 1.0, &f).unwrap(), 1.0);
        let d = DiagonalOperator::new(vec![1.0, 2.0]).unwrap();
        assert_relative_eq!(
            residual_norm(&d, &v(&[1.0, 1.0]), 0.0, &Vector::zeros(2)).unwrap(),
            5.0_f64.sqrt()
        );
        assert!(residual_norm(&d, &v(&[1.0]), 0.0, &Vector::zeros(2)).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let op = DiagonalOperator::identity(1);
        let cfg = IterationConfig {
            theta: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            solve_regularized(&op, &v(&[1.0]), 1.0, &Vector::zeros(1), &cfg),
            Err(Error::InvalidConfig(_))
        ));
        assert!(solve_regularized(
            &op,
            &v(&[1.0]),
            0.0,
            &Vector::zeros(1),
            &IterationConfig::default()
        )
        .is_err());
    }
}

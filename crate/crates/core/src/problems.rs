//! Canonical monotone test problems with known minimal-norm solutions and
//! independent oracles for the regularized solution.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::space::{make_noisy, DiagonalOperator, MatrixOperator, Operator, Vector};

/// Spectrum of a [`DiagonalProblem`], indexed from `i = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// `λ_i = i^(-p)`
    Poly(f64),
    /// `λ_i = exp(-r (i-1))`
    Exp(f64),
}

impl Decay {
    fn eigenvalue(&self, i: usize) -> f64 {
        match *self {
            Decay::Poly(p) => (i as f64).powf(-p),
            Decay::Exp(r) => (-r * (i as f64 - 1.0)).exp(),
        }
    }
}

/// How the exact solution is sampled, indexed from `i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum SolutionSpec {
    Constant(f64),
    /// `y_i = c / i`
    Harmonic(f64),
    /// `y_i = c · sin(π (i − ½)/n)`
    Sine(f64),
    Values(Vec<f64>),
}

impl SolutionSpec {
    pub fn build(&self, n: usize) -> Result<Vector> {
        check_size(n)?;
        let values = match self {
            SolutionSpec::Constant(c) => vec![*c; n],
            SolutionSpec::Harmonic(c) => (1..=n).map(|i| c / i as f64).collect(),
            SolutionSpec::Sine(c) => (1..=n).map(|i| c * (PI * midpoint(i, n)).sin()).collect(),
            SolutionSpec::Values(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: v.len(),
                    });
                }
                v.clone()
            }
        };
        Vector::new(values)
    }
}

fn midpoint(i: usize, n: usize) -> f64 {
    (i as f64 - 0.5) / n as f64
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "problem size must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Operator, exact data, known solution and an oracle for the regularized
/// solution `V_{δ,a}` (the exact solution of `F(V) + aV = f_δ`).
pub trait SuiteProblem: Operator {
    fn name(&self) -> &'static str;

    /// Exact right-hand side `f = F(y)`.
    fn exact_data(&self) -> &Vector;

    /// Minimal-norm solution `y`.
    fn solution(&self) -> &Vector;

    fn oracle_solution(&self, a: f64, f_delta: &Vector) -> Result<Vector>;

    /// Noisy data at level `delta`. The default draws a seeded random direction.
    fn noisy_data(&self, delta: f64, seed: u64) -> Result<Vector> {
        make_noisy(self.exact_data(), delta, seed)
    }
}

fn check_oracle_args(dim: usize, a: f64, f_delta: &Vector) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "regularization parameter must be positive, got {a}"
        )));
    }
    if f_delta.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: f_delta.dim(),
        });
    }
    Ok(())
}

/// `F = diag(λ)` with `λ_i ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalProblem {
    op: DiagonalOperator,
    y: Vector,
    f: Vector,
}

impl DiagonalProblem {
    /// Components of `y` in the null space (`λ_i = 0`) are dropped, so the
    /// stored solution is the minimal-norm one.
    pub fn new(eigenvalues: Vec<f64>, y: Vector) -> Result<Self> {
        if let Some(bad) = eigenvalues.iter().find(|l| !(**l >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "diagonal entries must be non-negative for monotonicity, got {bad}"
            )));
        }
        let op = DiagonalOperator::new(eigenvalues)?;
        if y.dim() != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                found: y.dim(),
            });
        }
        let y = Vector::new(
            op.diagonal()
                .iter()
                .zip(y.as_slice())
                .map(|(l, yi)| if *l > 0.0 { *yi } else { 0.0 })
                .collect(),
        )?;
        let f = op.apply(&y);
        Ok(Self { op, y, f })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.op.diagonal()
    }
}

pub fn build_diagonal(n: usize, decay: Decay, y: &SolutionSpec) -> Result<DiagonalProblem> {
    check_size(n)?;
    match decay {
        Decay::Poly(p) | Decay::Exp(p) if !p.is_finite() || p < 0.0 => {
            return Err(Error::InvalidArgument(format!(
                "decay rate must be finite and non-negative, got {p}"
            )))
        }
        _ => {}
    }
    let eig = (1..=n).map(|i| decay.eigenvalue(i)).collect();
    DiagonalProblem::new(eig, y.build(n)?)
}

impl Operator for DiagonalProblem {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, u: &Vector) -> Vector {
        self.op.apply(u)
    }
    fn lipschitz_bound(&self, radius: f64) -> Option<f64> {
        self.op.lipschitz_bound(radius)
    }
    fn is_linear(&self) -> bool {
        true
    }
}

impl SuiteProblem for DiagonalProblem {
    fn name(&self) -> &'static str {
        "diagonal"
    }
    fn exact_data(&self) -> &Vector {
        &self.f
    }
    fn solution(&self) -> &Vector {
        &self.y
    }
    fn oracle_solution(&self, a: f64, f_delta: &Vector) -> Result<Vector> {
        check_oracle_args(self.dim(), a, f_delta)?;
        Vector::new(
            self.eigenvalues()
                .iter()
                .zip(f_delta.as_slice())
                .map(|(l, f)| f / (l + a))
                .collect(),
        )
    }
}

/// Midpoint discretization of `(Ku)(s) = ∫₀¹ min(s,t) u(t) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct FredholmProblem {
    op: MatrixOperator,
    y: Vector,
    f: Vector,
}

/// `K_ij = min(s_i, s_j)/n` at midpoints `s_i = (i − ½)/n`.
pub fn fredholm_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        midpoint(i + 1, n).min(midpoint(j + 1, n)) / n as f64
    })
}

/// Source `y(t) = sin(πt)` sampled at the quadrature nodes.
pub fn build_fredholm(n: usize) -> Result<FredholmProblem> {
    build_fredholm_with(n, &SolutionSpec::Sine(1.0))
}

pub fn build_fredholm_with(n: usize, y: &SolutionSpec) -> Result<FredholmProblem> {
    check_size(n)?;
    let op = MatrixOperator::new(fredholm_matrix(n))?;
    let y = y.build(n)?;
    let f = op.apply(&y);
    Ok(FredholmProblem { op, y, f })
}

impl FredholmProblem {
    pub fn matrix(&self) -> &DMatrix<f64> {
        self.op.matrix()
    }
}

impl Operator for FredholmProblem {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, u: &Vector) -> Vector {
        self.op.apply(u)
    }
    fn lipschitz_bound(&self, radius: f64) -> Option<f64> {
        self.op.lipschitz_bound(radius)
    }
    fn is_linear(&self) -> bool {
        true
    }
}

/// Dense direct solve of `(M + aI)u = rhs` for symmetric PSD `M`.
fn shifted_direct_solve(m: &DMatrix<f64>, a: f64, rhs: &Vector) -> Result<Vector> {
    let n = m.nrows();
    let shifted = m + DMatrix::identity(n, n) * a;
    let sol = match shifted.clone().cholesky() {
        Some(ch) => ch.solve(rhs.as_dvector()),
        None => shifted
            .lu()
            .solve(rhs.as_dvector())
            .ok_or_else(|| Error::Singular(format!("M + {a}·I")))?,
    };
    Vector::from_dvector(sol)
}

impl SuiteProblem for FredholmProblem {
    fn name(&self) -> &'static str {
        "fredholm"
    }
    fn exact_data(&self) -> &Vector {
        &self.f
    }
    fn solution(&self) -> &Vector {
        &self.y
    }
    fn oracle_solution(&self, a: f64, f_delta: &Vector) -> Result<Vector> {
        check_oracle_args(self.dim(), a, f_delta)?;
        shifted_direct_solve(self.matrix(), a, f_delta)
    }
}

/// `F(u) = A u + u³` (componentwise cube) with symmetric PSD `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicOperator {
    a: MatrixOperator,
}

impl CubicOperator {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        check_symmetric_psd(&a)?;
        Ok(Self {
            a: MatrixOperator::new(a)?,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.a.matrix()
    }
}

fn check_symmetric_psd(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return Err(Error::InvalidArgument("matrix must be symmetric".into()));
    }
    let min_eig = m
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |lo, e| lo.min(*e));
    if min_eig < -1e-12 * scale {
        return Err(Error::InvalidArgument(format!(
            "matrix must be positive semidefinite, smallest eigenvalue {min_eig:e}"
        )));
    }
    Ok(())
}

impl Operator for CubicOperator {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn apply(&self, u: &Vector) -> Vector {
        let mut out = self.a.apply(u);
        out.axpy(1.0, &u.map(|x| x * x * x));
        out
    }
    /// `‖A‖ + 3R²` on `B(0, R)`.
    fn lipschitz_bound(&self, radius: f64) -> Option<f64> {
        Some(self.a.spectral_norm() + 3.0 * radius * radius)
    }
}

/// Linear part of a [`CubicProblem`].
#[derive(Debug, Clone, PartialEq)]
pub enum CubicMatrix {
    /// `diag(1/i)`
    InverseIndex,
    Diagonal(Vec<f64>),
    Dense(DMatrix<f64>),
}

impl CubicMatrix {
    /// Dense matrix from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.len(),
            });
        }
        Ok(CubicMatrix::Dense(DMatrix::from_fn(n, n, |i, j| {
            rows[i][j]
        })))
    }

    fn build(&self, n: usize) -> Result<DMatrix<f64>> {
        match self {
            CubicMatrix::InverseIndex => {
                Ok(DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
                    1.0 / (i + 1) as f64
                })))
            }
            CubicMatrix::Diagonal(d) if d.len() == n => {
                Ok(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
            }
            CubicMatrix::Dense(m) if m.nrows() == n && m.ncols() == n => Ok(m.clone()),
            CubicMatrix::Diagonal(d) => Err(Error::DimensionMismatch {
                expected: n,
                found: d.len(),
            }),
            CubicMatrix::Dense(m) => Err(Error::DimensionMismatch {
                expected: n,
                found: m.nrows(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubicProblem {
    op: CubicOperator,
    y: Vector,
    f: Vector,
}

/// The cubic map is injective (strictly monotone), so `y` is the unique
/// solution and in particular the minimal-norm one.
pub fn build_cubic(n: usize, a: &CubicMatrix, y: &SolutionSpec) -> Result<CubicProblem> {
    check_size(n)?;
    let op = CubicOperator::new(a.build(n)?)?;
    let y = y.build(n)?;
    let f = op.apply(&y);
    Ok(CubicProblem { op, y, f })
}

impl CubicProblem {
    pub fn matrix(&self) -> &DMatrix<f64> {
        self.op.matrix()
    }
}

impl Operator for CubicProblem {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, u: &Vector) -> Vector {
        self.op.apply(u)
    }
    fn lipschitz_bound(&self, radius: f64) -> Option<f64> {
        self.op.lipschitz_bound(radius)
    }
}

impl SuiteProblem for CubicProblem {
    fn name(&self) -> &'static str {
        "cubic"
    }
    fn exact_data(&self) -> &Vector {
        &self.f
    }
    fn solution(&self) -> &Vector {
        &self.y
    }

    /// Damped Newton on `Au + u³ + au − f_δ = 0`. The Jacobian
    /// `A + diag(3u²) + aI` is symmetric positive definite for `a > 0`.
    fn oracle_solution(&self, a: f64, f_delta: &Vector) -> Result<Vector> {
        check_oracle_args(self.dim(), a, f_delta)?;
        let m = self.matrix();
        let target = 1e-14 * (1.0 + f_delta.norm());
        let residual = |u: &DVector<f64>| -> DVector<f64> {
            m * u + u.map(|x| x * x * x) + u * a - f_delta.as_dvector()
        };
        let mut u = DVector::zeros(self.dim());
        let mut r = residual(&u);
        let mut res = r.norm();
        for _ in 0..200 {
            if res <= target {
                break;
            }
            let jac = m + DMatrix::from_diagonal(&u.map(|x| 3.0 * x * x + a));
            let step = jac
                .cholesky()
                .ok_or_else(|| Error::Singular("Newton Jacobian".into()))?
                .solve(&r);
            let mut t = 1.0;
            let mut improved = false;
            while t > 1e-12 {
                let cand = &u - &step * t;
                let cand_r = residual(&cand);
                let cand_res = cand_r.norm();
                if cand_res < (1.0 - 1e-4 * t) * res {
                    u = cand;
                    r = cand_r;
                    res = cand_res;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if res > 1e-12 * (1.0 + f_delta.norm()) {
            return Err(Error::Singular(format!(
                "cubic oracle stalled at residual {res:e}"
            )));
        }
        Vector::from_dvector(u)
    }
}

/// `F(u) = ⟨u,p⟩p` with `f = p` and noisy data `p + δq`, `q ⊥ p`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneProblem {
    p: Vector,
    q: Vector,
}

/// `p = e₁`, `q = e₂`.
pub fn build_rank_one(dim: usize) -> Result<RankOneProblem> {
    if dim < 2 {
        return Err(Error::InvalidArgument(
            "rank-one problem needs dimension at least 2".into(),
        ));
    }
    RankOneProblem::new(Vector::basis(dim, 0)?, Vector::basis(dim, 1)?)
}

impl RankOneProblem {
    pub fn new(p: Vector, q: Vector) -> Result<Self> {
        if p.dim() != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                found: q.dim(),
            });
        }
        if (p.norm() - 1.0).abs() > 1e-12
            || (q.norm() - 1.0).abs() > 1e-12
            || p.dot(&q).abs() > 1e-12
        {
            return Err(Error::InvalidArgument("p and q must be orthonormal".into()));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> &Vector {
        &self.p
    }

    pub fn q(&self) -> &Vector {
        &self.q
    }

    /// `V_{δ,a} = (δ/a) q + p/(1+a)` for data `p + δq`.
    pub fn closed_form_solution(&self, a: f64, delta: f64) -> Vector {
        let mut v = (delta / a) * &self.q;
        v.axpy(1.0 / (1.0 + a), &self.p);
        v
    }

    /// Limit `p + q/c` of the discrepancy-principle solutions when `γ = 1`.
    pub fn gamma_one_limit(&self, c_target: f64) -> Result<Vector> {
        let c = rank_one_c(c_target)?;
        let mut v = self.p.clone();
        v.axpy(1.0 / c, &self.q);
        Ok(v)
    }
}

fn rank_one_c(c_target: f64) -> Result<f64> {
    if !(c_target > 1.0) || !c_target.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "discrepancy multiplier must exceed 1, got {c_target}"
        )));
    }
    Ok((c_target * c_target - 1.0).sqrt())
}

/// Closed-form regularization parameter `cδ/(1−cδ)`, `c = sqrt(C² − 1)`, for
/// the rank-one problem with `γ = 1`.
pub fn oracle_alpha(_problem: &RankOneProblem, delta: f64, c_target: f64) -> Result<f64> {
    let c = rank_one_c(c_target)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise level must be positive, got {delta}"
        )));
    }
    let cd = c * delta;
    if cd >= 1.0 {
        return Err(Error::InvalidArgument(format!("need c·δ < 1, got {cd}")));
    }
    Ok(cd / (1.0 - cd))
}

impl Operator for RankOneProblem {
    fn dim(&self) -> usize {
        self.p.dim()
    }
    fn apply(&self, u: &Vector) -> Vector {
        u.dot(&self.p) * &self.p
    }
    fn lipschitz_bound(&self, _radius: f64) -> Option<f64> {
        Some(1.0)
    }
    fn is_linear(&self) -> bool {
        true
    }
}

impl SuiteProblem for RankOneProblem {
    fn name(&self) -> &'static str {
        "rank_one"
    }
    fn exact_data(&self) -> &Vector {
        &self.p
    }
    fn solution(&self) -> &Vector {
        &self.p
    }
    fn oracle_solution(&self, a: f64, f_delta: &Vector) -> Result<Vector> {
        check_oracle_args(self.dim(), a, f_delta)?;
        let along = f_delta.dot(&self.p);
        let mut v = (1.0 / a) * f_delta;
        v.axpy(along * (1.0 / (1.0 + a) - 1.0 / a), &self.p);
        Ok(v)
    }
    /// `p + δq`; the seed is ignored.
    fn noisy_data(&self, delta: f64, _seed: u64) -> Result<Vector> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise level must be finite and non-negative, got {delta}"
            )));
        }
        let mut f = self.p.clone();
        f.axpy(delta, &self.q);
        Ok(f)
    }
}

/// Any suite problem, for callers that pick the kind at runtime.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Diagonal(DiagonalProblem),
    Fredholm(FredholmProblem),
    Cubic(CubicProblem),
    RankOne(RankOneProblem),
}

macro_rules! dispatch {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            Problem::Diagonal($p) => $e,
            Problem::Fredholm($p) => $e,
            Problem::Cubic($p) => $e,
            Problem::RankOne($p) => $e,
        }
    };
}

impl Operator for Problem {
    fn dim(&self) -> usize {
        dispatch!(self, p => p.dim())
    }
    fn apply(&self, u: &Vector) -> Vector {
        dispatch!(self, p => p.apply(u))
    }
    fn lipschitz_bound(&self, radius: f64) -> Option<f64> {
        dispatch!(self, p => p.lipschitz_bound(radius))
    }
    fn is_linear(&self) -> bool {
        dispatch!(self, p => p.is_linear())
    }
}

impl SuiteProblem for Problem {
    fn name(&self) -> &'static str {
        dispatch!(self, p => p.name())
    }
    fn exact_data(&self) -> &Vector {
        dispatch!(self, p => p.exact_data())
    }
    fn solution(&self) -> &Vector {
        dispatch!(self, p => p.solution())
    }
    fn oracle_solution(&self, a: f64, f_delta: &Vector) -> Result<Vector> {
        dispatch!(self, p => p.oracle_solution(a, f_delta))
    }
    fn noisy_data(&self, delta: f64, seed: u64) -> Result<Vector> {
        dispatch!(self, p => p.noisy_data(delta, seed))
    }
}

impl From<DiagonalProblem> for Problem {
    fn from(p: DiagonalProblem) -> Self {
        Problem::Diagonal(p)
    }
}

impl From<FredholmProblem> for Problem {
    fn from(p: FredholmProblem) -> Self {
        Problem::Fredholm(p)
    }
}

impl From<CubicProblem> for Problem {
    fn from(p: CubicProblem) -> Self {
        Problem::Cubic(p)
    }
}

impl From<RankOneProblem> for Problem {
    fn from(p: RankOneProblem) -> Self {
        Problem::RankOne(p)
    }
}

/// An operator together with the data it is to be inverted on.
#[derive(Clone)]
pub struct NoisyProblem {
    pub operator: Arc<dyn Operator>,
    pub f: Option<Vector>,
    pub f_delta: Vector,
    pub delta: f64,
    pub y: Option<Vector>,
}

impl std::fmt::Debug for NoisyProblem {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("NoisyProblem")
            .field("dim", &self.operator.dim())
            .field("f", &self.f)
            .field("f_delta", &self.f_delta)
            .field("delta", &self.delta)
            .field("y", &self.y)
            .finish()
    }
}

impl NoisyProblem {
    pub fn new(
        operator: Arc<dyn Operator>,
        f: Option<Vector>,
        f_delta: Vector,
        delta: f64,
        y: Option<Vector>,
    ) -> Result<Self> {
        let dim = operator.dim();
        for v in f.iter().chain(Some(&f_delta)).chain(y.iter()) {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
        }
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise level must be finite and non-negative, got {delta}"
            )));
        }
        if let Some(f) = &f {
            let dist = f.distance(&f_delta);
            if dist > delta * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::InvalidArgument(format!(
                    "‖f − f_δ‖ = {dist:e} exceeds the noise level {delta:e}"
                )));
            }
            if let Some(y) = &y {
                let miss = operator.apply(y).distance(f);
                if miss > 1e-10 * (1.0 + f.norm()) {
                    return Err(Error::InvalidArgument(format!(
                        "‖F(y) − f‖ = {miss:e}: y does not solve the exact equation"
                    )));
                }
            }
        }
        Ok(Self {
            operator,
            f,
            f_delta,
            delta,
            y,
        })
    }

    /// Noisy instance of a suite problem at level `delta`.
    pub fn from_suite<P>(problem: P, delta: f64, seed: u64) -> Result<Self>
    where
        P: SuiteProblem + 'static,
    {
        let f_delta = problem.noisy_data(delta, seed)?;
        let f = problem.exact_data().clone();
        let y = problem.solution().clone();
        Self::new(Arc::new(problem), Some(f), f_delta, delta, Some(y))
    }
}

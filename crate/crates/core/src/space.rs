//! Finite-dimensional real inner-product space and the operator contract.
//!
//! Everything downstream works with [`Vector`] (a dense, finite, non-empty
//! coordinate vector with the Euclidean inner product) and with types that
//! implement [`Operator`]. Monotonicity of an operator is never taken on
//! faith: [`check_monotonicity`] samples it and reports the worst pair.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Dense real coordinate vector.
///
/// Constructed through [`Vector::new`] the components are guaranteed finite
/// and non-empty. Arithmetic results are not re-validated; solvers check
/// [`Vector::is_finite`] on their iterates instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(DVector<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(components))
    }

    pub fn from_dvector(v: DVector<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("component {i} is {}", v[i])));
        }
        Ok(Self(v))
    }

    pub(crate) fn from_raw(v: DVector<f64>) -> Self {
        Self(v)
    }

    /// Zero vector of the given dimension.
    ///
    /// # Panics
    /// If `dim` is zero.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Self(DVector::zeros(dim))
    }

    /// Canonical basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut v = Self::zeros(dim);
        v.0[index] = 1.0;
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.as_slice().to_vec()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_dvector(self) -> DVector<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Euclidean inner product. Panics on dimension mismatch; see [`inner`]
    /// for the checked form.
    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// `self + alpha * x`, in place.
    pub fn axpy(&mut self, alpha: f64, x: &Vector) {
        self.0.axpy(alpha, &x.0, 1.0);
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Vector {
        Vector(self.0.map(f))
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0.as_slice().to_vec()
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl TryFrom<&[f64]> for Vector {
    type Error = Error;

    fn try_from(v: &[f64]) -> Result<Self> {
        Vector::new(v.to_vec())
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(&self.0 + &rhs.0)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, rhs: f64) -> Vector {
        Vector(&self.0 * rhs)
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        Vector(&rhs.0 * self)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(-&self.0)
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Checked Euclidean inner product.
pub fn inner(u: &Vector, v: &Vector) -> Result<f64> {
    check_dims(u.dim(), v.dim())?;
    Ok(u.dot(v))
}

pub fn norm(u: &Vector) -> f64 {
    u.norm()
}

/// A (possibly nonlinear) map of a finite-dimensional space into itself.
///
/// Implementations must be reentrant: solvers may evaluate one operator from
/// several threads at once.
pub trait Operator: Send + Sync {
    fn dim(&self) -> usize;

    /// Evaluate without dimension checks.
    fn apply(&self, u: &Vector) -> Vector;

    /// Lipschitz constant valid on the ball of radius `radius` about the origin.
    fn lipschitz_bound(&self, _radius: f64) -> Option<f64> {
        None
    }

    fn is_linear(&self) -> bool {
        false
    }

    fn eval(&self, u: &Vector) -> Result<Vector> {
        check_dims(self.dim(), u.dim())?;
        let out = self.apply(u);
        check_dims(self.dim(), out.dim())?;
        Ok(out)
    }
}

impl<T: Operator + ?Sized> Operator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, u: &Vector) -> Vector {
        (**self).apply(u)
    }
    fn lipschitz_bound(&self, radius: f64) -> Option<f64> {
        (**self).lipschitz_bound(radius)
    }
    fn is_linear(&self) -> bool {
        (**self).is_linear()
    }
}

impl<T: Operator + ?Sized> Operator for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, u: &Vector) -> Vector {
        (**self).apply(u)
    }
    fn lipschitz_bound(&self, radius: f64) -> Option<f64> {
        (**self).lipschitz_bound(radius)
    }
    fn is_linear(&self) -> bool {
        (**self).is_linear()
    }
}

impl<T: Operator + ?Sized> Operator for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, u: &Vector) -> Vector {
        (**self).apply(u)
    }
    fn lipschitz_bound(&self, radius: f64) -> Option<f64> {
        (**self).lipschitz_bound(radius)
    }
    fn is_linear(&self) -> bool {
        (**self).is_linear()
    }
}

/// `u ↦ diag(d) u`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    diag: DVector<f64>,
}

impl DiagonalOperator {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        let v = Vector::new(diag)?;
        Ok(Self {
            diag: v.into_dvector(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            diag: DVector::from_element(dim, 1.0),
        }
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        Self {
            diag: DVector::from_element(dim, scale),
        }
    }

    pub fn diagonal(&self) -> &[f64] {
        self.diag.as_slice()
    }
}

impl Operator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }
    fn apply(&self, u: &Vector) -> Vector {
        Vector::from_raw(self.diag.component_mul(u.as_dvector()))
    }
    fn lipschitz_bound(&self, _radius: f64) -> Option<f64> {
        Some(self.diag.iter().fold(0.0_f64, |m, d| m.max(d.abs())))
    }
    fn is_linear(&self) -> bool {
        true
    }
}

/// Dense square matrix operator. The spectral norm is computed once at
/// construction and serves as the global Lipschitz bound.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOperator {
    matrix: DMatrix<f64>,
    spectral_norm: f64,
}

impl MatrixOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "operator matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("operator matrix".into()));
        }
        let spectral_norm = matrix
            .clone()
            .singular_values()
            .iter()
            .fold(0.0_f64, |m, s| m.max(*s));
        Ok(Self {
            matrix,
            spectral_norm,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn spectral_norm(&self) -> f64 {
        self.spectral_norm
    }
}

impl Operator for MatrixOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn apply(&self, u: &Vector) -> Vector {
        Vector::from_raw(&self.matrix * u.as_dvector())
    }
    fn lipschitz_bound(&self, _radius: f64) -> Option<f64> {
        Some(self.spectral_norm)
    }
    fn is_linear(&self) -> bool {
        true
    }
}

type LipschitzFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Operator backed by a closure.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
    lipschitz: Option<LipschitzFn>,
    linear: bool,
}

impl<F> FnOperator<F>
where
    F: Fn(&Vector) -> Vector + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self {
            dim,
            f,
            lipschitz: None,
            linear: false,
        }
    }

    pub fn with_lipschitz(mut self, bound: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.lipschitz = Some(Box::new(bound));
        self
    }

    pub fn linear(mut self) -> Self {
        self.linear = true;
        self
    }
}

impl<F> Operator for FnOperator<F>
where
    F: Fn(&Vector) -> Vector + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, u: &Vector) -> Vector {
        (self.f)(u)
    }
    fn lipschitz_bound(&self, radius: f64) -> Option<f64> {
        self.lipschitz.as_ref().map(|l| l(radius))
    }
    fn is_linear(&self) -> bool {
        self.linear
    }
}

fn gaussian_vector(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    loop {
        let g = gaussian_vector(rng, dim);
        let n = g.norm();
        if n > 0.0 {
            return g / n;
        }
    }
}

/// Uniform sample from the closed ball `B(center, radius)`.
pub(crate) fn sample_ball(rng: &mut ChaCha8Rng, center: &Vector, radius: f64) -> Vector {
    let dim = center.dim();
    let dir = unit_vector(rng, dim);
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    Vector::from_raw(center.as_dvector() + dir * r)
}

/// `f + delta * e` with `e` a unit vector drawn from `seed`.
///
/// The direction is uniform on the sphere (normalized Gaussian draw), so
/// `‖f_δ − f‖ = delta` up to rounding.
pub fn make_noisy(f: &Vector, delta: f64, seed: u64) -> Result<Vector> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise level must be finite and non-negative, got {delta}"
        )));
    }
    if delta == 0.0 {
        return Ok(f.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = unit_vector(&mut rng, f.dim());
    Vector::from_dvector(f.as_dvector() + e * delta)
}

/// Result of a sampled monotonicity audit.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    /// Minimum of `⟨F(u)−F(v), u−v⟩ / ‖u−v‖²` over the sampled pairs.
    pub min_ratio: f64,
    /// Worst pair, present only when `min_ratio` is below `-MONOTONICITY_SLACK`.
    pub witness: Option<(Vector, Vector)>,
    pub pairs: usize,
}

impl MonotonicityReport {
    pub fn is_monotone(&self) -> bool {
        self.witness.is_none()
    }
}

pub const MONOTONICITY_SLACK: f64 = 1e-10;

/// Sample `n_pairs` pairs uniformly in `B(0, radius)` and report the smallest
/// normalized monotonicity ratio.
pub fn check_monotonicity<O: Operator + ?Sized>(
    op: &O,
    n_pairs: usize,
    radius: f64,
    seed: u64,
) -> Result<MonotonicityReport> {
    check_monotonicity_about(op, &Vector::zeros(op.dim()), n_pairs, radius, seed)
}

pub fn check_monotonicity_about<O: Operator + ?Sized>(
    op: &O,
    center: &Vector,
    n_pairs: usize,
    radius: f64,
    seed: u64,
) -> Result<MonotonicityReport> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("n_pairs must be at least 1".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {radius}"
        )));
    }
    check_dims(op.dim(), center.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_ratio = f64::INFINITY;
    let mut worst = None;
    let mut pairs = 0;
    for _ in 0..n_pairs {
        let u = sample_ball(&mut rng, center, radius);
        let v = sample_ball(&mut rng, center, radius);
        let d = &u - &v;
        let d2 = d.dot(&d);
        if d2 == 0.0 {
            continue;
        }
        let fu = op.eval(&u)?;
        let fv = op.eval(&v)?;
        let ratio = (&fu - &fv).dot(&d) / d2;
        pairs += 1;
        if ratio < min_ratio {
            min_ratio = ratio;
            worst = Some((u, v));
        }
    }
    let witness = if min_ratio < -MONOTONICITY_SLACK {
        worst
    } else {
        None
    };
    Ok(MonotonicityReport {
        min_ratio,
        witness,
        pairs,
    })
}

/// Largest sampled difference quotient `‖F(u)−F(v)‖ / ‖u−v‖` over pairs in
/// `B(center, radius)`. A lower bound on the true Lipschitz constant.
pub fn estimate_lipschitz<O: Operator + ?Sized>(
    op: &O,
    center: &Vector,
    radius: f64,
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    check_dims(op.dim(), center.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0_f64;
    for _ in 0..n_pairs {
        let u = sample_ball(&mut rng, center, radius);
        let v = sample_ball(&mut rng, center, radius);
        let d = u.distance(&v);
        if d == 0.0 {
            continue;
        }
        let q = op.eval(&u)?.distance(&op.eval(&v)?) / d;
        if !q.is_finite() {
            return Err(Error::NonFinite("operator difference quotient".into()));
        }
        best = best.max(q);
    }
    Ok(best)
}

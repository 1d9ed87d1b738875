//! Dense complex matrix helpers and the [`Operator`] carrier.

use std::ops::{Add, Mul, Sub};

use faer::{c64, Mat, MatRef, Scale};

use crate::error::{invalid, Error, Result};

/// A square complex matrix acting on the model Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: Mat<c64>,
}

impl Operator {
    pub fn new(m: Mat<c64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(invalid("operator dimension must be positive"));
        }
        if !all_finite(m.as_ref()) {
            return Err(Error::NonFinite {
                stage: "operator",
                index: 0,
            });
        }
        Ok(Self { m })
    }

    pub(crate) fn from_mat_unchecked(m: Mat<c64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self { m }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_mat_unchecked(Mat::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_mat_unchecked(Mat::zeros(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self::from_mat_unchecked(Mat::from_fn(dim, dim, f))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn mat(&self) -> MatRef<'_, c64> {
        self.m.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.m[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_mat_unchecked(self.m.adjoint().to_owned())
    }

    pub fn scale(&self, s: c64) -> Self {
        Self::from_mat_unchecked(Scale(s) * &self.m)
    }

    pub fn kron(&self, other: &Operator) -> Self {
        Self::from_mat_unchecked(kron(self.mat(), other.mat()))
    }

    /// `[self, x] = self·x − x·self`.
    pub fn commutator(&self, x: &Operator) -> Result<Operator> {
        self.check_dim(x)?;
        Ok(Self::from_mat_unchecked(&self.m * &x.m - &x.m * &self.m))
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.m[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(self.mat())
    }

    /// `‖X − X†‖_max / max(‖X‖_max, tiny)`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst / self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub(crate) fn check_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator::from_mat_unchecked(&self.m + &rhs.m)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator::from_mat_unchecked(&self.m - &rhs.m)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator::from_mat_unchecked(&self.m * &rhs.m)
    }
}

pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Mat::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// `Tr(x·y)` without forming the product.
pub fn trace_of_product(x: MatRef<'_, c64>, y: MatRef<'_, c64>) -> c64 {
    let n = x.nrows();
    let mut acc = c64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc
}

pub fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

/// Induced 1-norm (largest absolute column sum).
pub fn one_norm(m: MatRef<'_, c64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn all_finite(m: MatRef<'_, c64>) -> bool {
    (0..m.ncols())
        .all(|j| (0..m.nrows()).all(|i| m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()))
}

pub fn is_real(m: MatRef<'_, c64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].im == 0.0))
}

/// Singular values in decreasing order.
pub fn singular_values(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let s = m
        .singular_values()
        .map_err(|e| Error::Verification(format!("SVD did not converge: {e:?}")))?;
    let mut s: Vec<f64> = s.into_iter().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// 2-norm condition number; infinite for numerically singular input.
pub fn condition_number(m: MatRef<'_, c64>) -> Result<f64> {
    let s = singular_values(m)?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numerical_rank(m: MatRef<'_, c64>, rel_tol: f64) -> Result<usize> {
    let s = singular_values(m)?;
    let cut = s.first().copied().unwrap_or(0.0) * rel_tol;
    Ok(s.iter().filter(|&&x| x > cut).count())
}

/// Orthonormal basis of the full space whose first `k` columns span the
/// columns of `m` (`k = m.ncols()`), from a Householder QR factorization.
pub fn orthonormal_completion(m: MatRef<'_, c64>) -> Mat<c64> {
    m.qr().compute_Q()
}

pub fn spectral_norm(m: MatRef<'_, c64>) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

pub fn real(x: f64) -> c64 {
    c64::new(x, 0.0)
}

pub const I: c64 = c64 { re: 0.0, im: 1.0 };

//! Spectral stabilization of the hierarchy generator.
//!
//! The generator is diagonalized, its eigenvalues are split by the sign of
//! their real part, and the generator is compressed with the orthogonal
//! projector onto the span of the stable and neutral eigenvectors:
//! `M_S = P_S M P_S`. The projector is formed from a Householder QR
//! factorization of the selected eigenvectors, which yields the same
//! `V_S (V_S† V_S)^{−1} V_S†` without forming the Gram matrix. When the
//! selected eigenvectors are nearly parallel, the same subspace is taken
//! from a reordered complex Schur factorization instead.

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat, MatRef};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hierarchy::{GeneratorMatrix, ScalingScheme};
use crate::linalg::{
    all_finite, condition_number, is_real, max_abs, numerical_rank, orthonormal_completion, real,
    singular_values, spectral_norm,
};
use crate::propagator::MODAL_CONDITION_LIMIT;

/// Maximum accepted `max_i ‖M v_i − λ_i v_i‖ / ‖M‖`.
pub const RESIDUAL_THRESHOLD: f64 = 1e-8;
/// Largest accepted condition number of `V_S† V_S` before falling back to
/// Schur vectors.
pub const MAX_GRAM_CONDITION: f64 = 1e12;
/// Tolerance for projector idempotency and self-adjointness.
pub const PROJECTOR_TOLERANCE: f64 = 1e-10;
/// Relative singular-value threshold for rank decisions.
pub const RANK_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: Vec<c64>,
    eigenvectors: Mat<c64>,
    residual: f64,
    real_input: bool,
}

impl EigenDecomposition {
    pub fn eigenvalues(&self) -> &[c64] {
        &self.eigenvalues
    }

    /// Unit-norm eigenvectors, one per column.
    pub fn eigenvectors(&self) -> &Mat<c64> {
        &self.eigenvectors
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub fn spectral_decompose(g: &GeneratorMatrix) -> Result<EigenDecomposition> {
    decompose(g.entries().as_ref())
}

/// Residual-certified eigendecomposition of a general complex matrix.
pub fn decompose(m: MatRef<'_, c64>) -> Result<EigenDecomposition> {
    let n = m.nrows();
    if !all_finite(m) {
        return Err(Error::NonFinite {
            stage: "generator",
            index: 0,
        });
    }
    let eig = m
        .eigen()
        .map_err(|e| Error::Verification(format!("eigensolver did not converge: {e:?}")))?;
    let eigenvalues: Vec<c64> = eig.S().column_vector().iter().copied().collect();
    let mut eigenvectors = eig.U().to_owned();
    for j in 0..n {
        let norm = eigenvectors.col(j).norm_l2();
        if norm > 0.0 {
            for i in 0..n {
                eigenvectors[(i, j)] /= norm;
            }
        }
    }
    let scale = spectral_norm(m)?;
    let mv = m * &eigenvectors;
    let residual = (0..n)
        .map(|j| {
            let r: f64 = (0..n)
                .map(|i| (mv[(i, j)] - eigenvalues[j] * eigenvectors[(i, j)]).norm_sqr())
                .sum();
            r.sqrt()
        })
        .fold(0.0, f64::max)
        / scale.max(f64::MIN_POSITIVE);
    let residual = if scale == 0.0 { 0.0 } else { residual };
    if !(residual <= RESIDUAL_THRESHOLD) {
        return Err(Error::Decomposition {
            residual,
            threshold: RESIDUAL_THRESHOLD,
        });
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        residual,
        real_input: is_real(m),
    })
}

/// How the classification tolerance `ε_stab` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TolerancePolicy {
    /// `max(1e-12, 1e-10 · max_i |λ_i|)`.
    #[default]
    Auto,
    Fixed(f64),
}

impl TolerancePolicy {
    pub fn resolve(&self, eigenvalues: &[c64]) -> f64 {
        match *self {
            TolerancePolicy::Auto => {
                let radius = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
                (1e-10 * radius).max(1e-12)
            }
            TolerancePolicy::Fixed(t) => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Class {
    Stable,
    Neutral,
    Unstable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSplit {
    pub stable: Vec<usize>,
    pub neutral: Vec<usize>,
    pub unstable: Vec<usize>,
    pub tol: f64,
}

impl SpectralSplit {
    /// Indices of the retained (stable and neutral) eigenpairs, ascending.
    pub fn retained(&self) -> Vec<usize> {
        let mut keep: Vec<usize> = self.stable.iter().chain(&self.neutral).copied().collect();
        keep.sort_unstable();
        keep
    }
}

pub fn classify(e: &EigenDecomposition, policy: TolerancePolicy) -> SpectralSplit {
    let tol = policy.resolve(&e.eigenvalues);
    let of = |l: c64| {
        if l.re < -tol {
            Class::Stable
        } else if l.re > tol {
            Class::Unstable
        } else {
            Class::Neutral
        }
    };
    let mut classes: Vec<Class> = e.eigenvalues.iter().map(|&l| of(l)).collect();

    if e.real_input {
        // Conjugate partners share a class; a split pair takes the more
        // conservative (larger) class.
        let n = e.eigenvalues.len();
        let mut paired = vec![false; n];
        for i in 0..n {
            if paired[i] || e.eigenvalues[i].im <= 0.0 {
                continue;
            }
            let target = e.eigenvalues[i].conj();
            let partner = (0..n)
                .filter(|&j| j != i && !paired[j] && e.eigenvalues[j].im < 0.0)
                .min_by(|&a, &b| {
                    (e.eigenvalues[a] - target)
                        .norm()
                        .total_cmp(&(e.eigenvalues[b] - target).norm())
                });
            if let Some(j) = partner {
                paired[i] = true;
                paired[j] = true;
                let c = classes[i].max(classes[j]);
                classes[i] = c;
                classes[j] = c;
            }
        }
    }

    let pick = |c: Class| -> Vec<usize> {
        classes
            .iter()
            .enumerate()
            .filter(|(_, &k)| k == c)
            .map(|(i, _)| i)
            .collect()
    };
    SpectralSplit {
        stable: pick(Class::Stable),
        neutral: pick(Class::Neutral),
        unstable: pick(Class::Unstable),
        tol,
    }
}

/// How the retained subspace basis was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectorMethod {
    Eigenvectors,
    /// Reordered complex Schur vectors, used when the eigenvectors are too
    /// close to parallel.
    Schur,
}

/// Orthogonal projector onto the span of the retained eigenvectors.
#[derive(Debug, Clone)]
pub struct Projector {
    matrix: Mat<c64>,
    subspace_dim: usize,
    gram_condition: f64,
    method: ProjectorMethod,
    /// Unitary whose first `subspace_dim` columns span the range.
    frame: Mat<c64>,
}

impl Projector {
    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn subspace_dim(&self) -> usize {
        self.subspace_dim
    }

    /// Condition number of `V_S† V_S`.
    pub fn gram_condition(&self) -> f64 {
        self.gram_condition
    }

    pub fn method(&self) -> ProjectorMethod {
        self.method
    }

    pub fn range_basis(&self) -> MatRef<'_, c64> {
        self.frame.subcols(0, self.subspace_dim)
    }

    pub fn complement_basis(&self) -> MatRef<'_, c64> {
        let n = self.frame.ncols();
        self.frame.subcols(self.subspace_dim, n - self.subspace_dim)
    }

    /// `‖P² − P‖_max / ‖P‖_max`.
    pub fn idempotency_defect(&self) -> f64 {
        let p = &self.matrix;
        max_abs((p * p - p).as_ref()) / max_abs(p.as_ref()).max(f64::MIN_POSITIVE)
    }

    /// `‖P − P†‖_max / ‖P‖_max`.
    pub fn adjointness_defect(&self) -> f64 {
        let p = &self.matrix;
        max_abs((p - p.adjoint()).as_ref()) / max_abs(p.as_ref()).max(f64::MIN_POSITIVE)
    }
}

pub fn build_projector(e: &EigenDecomposition, s: &SpectralSplit) -> Result<Projector> {
    let keep = s.retained();
    projector_from_columns(e.eigenvectors.as_ref(), &keep)
}

fn projector_from_columns(vectors: MatRef<'_, c64>, keep: &[usize]) -> Result<Projector> {
    let n = vectors.nrows();
    let k = keep.len();
    if k == 0 {
        return Err(Error::EmptyStableSet);
    }
    let vs = Mat::<c64>::from_fn(n, k, |i, j| vectors[(i, keep[j])]);
    let sv = singular_values(vs.as_ref())?;
    let basis_cond = match sv.last() {
        Some(&lo) if lo > 0.0 => sv[0] / lo,
        _ => f64::INFINITY,
    };
    let gram_condition = basis_cond * basis_cond;
    if !(gram_condition <= MAX_GRAM_CONDITION) {
        return Err(Error::IllConditionedBasis {
            condition: gram_condition,
        });
    }
    let frame = orthonormal_completion(vs.as_ref());
    finish_projector(frame, k, gram_condition, ProjectorMethod::Eigenvectors)
}

fn finish_projector(
    frame: Mat<c64>,
    k: usize,
    gram_condition: f64,
    method: ProjectorMethod,
) -> Result<Projector> {
    let q = frame.subcols(0, k);
    let matrix = q * q.adjoint();
    let p = Projector {
        matrix,
        subspace_dim: k,
        gram_condition,
        method,
        frame,
    };
    let (idem, adj) = (p.idempotency_defect(), p.adjointness_defect());
    if idem > PROJECTOR_TOLERANCE || adj > PROJECTOR_TOLERANCE {
        return Err(Error::Verification(format!(
            "projector defects: idempotency {idem:e}, self-adjointness {adj:e}"
        )));
    }
    let rank = numerical_rank(p.matrix.as_ref(), RANK_THRESHOLD)?;
    if rank != k {
        return Err(Error::Verification(format!(
            "projector rank {rank} differs from subspace dimension {k}"
        )));
    }
    Ok(p)
}

/// Projector onto the retained invariant subspace from an ordered complex
/// Schur form `M = Q T Q†`, with the retained eigenvalues moved to the
/// leading block of `T`.
pub fn schur_projector(
    m: MatRef<'_, c64>,
    e: &EigenDecomposition,
    s: &SpectralSplit,
) -> Result<Projector> {
    let n = m.nrows();
    let keep = s.retained();
    let k = keep.len();
    if k == 0 {
        return Err(Error::EmptyStableSet);
    }
    let (mut q, mut t) = complex_schur(m)?;
    let diag: Vec<c64> = (0..n).map(|i| t[(i, i)]).collect();
    let retained = label_schur_diagonal(&diag, e.eigenvalues(), &keep);
    let mut next = 0;
    for i in 0..n {
        if retained[i] {
            for j in (next..i).rev() {
                swap_schur_pair(&mut t, &mut q, j);
            }
            next += 1;
        }
    }

    let scale = spectral_norm(m)?.max(f64::MIN_POSITIVE);
    let rebuilt = &q * &t * q.adjoint();
    let backward = max_abs((rebuilt - m).as_ref()) / scale;
    if backward > RESIDUAL_THRESHOLD {
        return Err(Error::Verification(format!(
            "reordered Schur factorization residual {backward:e}"
        )));
    }
    let gram_condition = {
        let vs = Mat::<c64>::from_fn(n, k, |i, j| e.eigenvectors[(i, keep[j])]);
        let sv = singular_values(vs.as_ref())?;
        match sv.last() {
            Some(&lo) if lo > 0.0 => (sv[0] / lo).powi(2),
            _ => f64::INFINITY,
        }
    };
    let p = finish_projector(q, k, gram_condition, ProjectorMethod::Schur)?;
    let leak = {
        let pm = p.matrix();
        let id = Mat::<c64>::identity(n, n);
        spectral_norm(((id - pm) * m * pm).as_ref())? / scale
    };
    if leak > RESIDUAL_THRESHOLD {
        return Err(Error::IllConditionedBasis {
            condition: gram_condition,
        });
    }
    Ok(p)
}

fn complex_schur(m: MatRef<'_, c64>) -> Result<(Mat<c64>, Mat<c64>)> {
    let n = m.nrows();
    let dm = nalgebra::DMatrix::<c64>::from_fn(n, n, |i, j| m[(i, j)]);
    let schur = nalgebra::Schur::try_new(dm, f64::EPSILON, 100 * n.max(1))
        .ok_or_else(|| Error::Verification("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let q = Mat::<c64>::from_fn(n, n, |i, j| q[(i, j)]);
    let mut t = Mat::<c64>::from_fn(n, n, |i, j| t[(i, j)]);
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = real(0.0);
        }
    }
    Ok((q, t))
}

/// Marks which Schur diagonal entries belong to the retained set by greedy
/// nearest matching against the classified eigenvalues.
fn label_schur_diagonal(diag: &[c64], eigenvalues: &[c64], keep: &[usize]) -> Vec<bool> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(diag.len() * eigenvalues.len());
    for (i, d) in diag.iter().enumerate() {
        for (j, l) in eigenvalues.iter().enumerate() {
            pairs.push(((d - l).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_d = vec![false; diag.len()];
    let mut used_e = vec![false; eigenvalues.len()];
    let mut retained = vec![false; diag.len()];
    for (_, i, j) in pairs {
        if used_d[i] || used_e[j] {
            continue;
        }
        used_d[i] = true;
        used_e[j] = true;
        retained[i] = keep.contains(&j);
    }
    retained
}

/// Exchanges the diagonal entries `k` and `k + 1` of the upper triangular
/// `t` with a unitary rotation, updating `q` so that `q t q†` is unchanged.
fn swap_schur_pair(t: &mut Mat<c64>, q: &mut Mat<c64>, k: usize) {
    let n = t.nrows();
    let (a, b, c) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k + 1)]);
    let (x1, x2) = (b, c - a);
    let norm = (x1.norm_sqr() + x2.norm_sqr()).sqrt();
    if norm == 0.0 {
        return;
    }
    // Columns of the rotation: g1 = (x1, x2) / |x|, g2 = (−x2*, x1*) / |x|.
    let (g11, g21) = (x1 / norm, x2 / norm);
    let (g12, g22) = (-x2.conj() / norm, x1.conj() / norm);
    for j in 0..n {
        let (r0, r1) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = g11.conj() * r0 + g21.conj() * r1;
        t[(k + 1, j)] = g12.conj() * r0 + g22.conj() * r1;
    }
    for i in 0..n {
        let (c0, c1) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = c0 * g11 + c1 * g21;
        t[(i, k + 1)] = c0 * g12 + c1 * g22;
        let (q0, q1) = (q[(i, k)], q[(i, k + 1)]);
        q[(i, k)] = q0 * g11 + q1 * g21;
        q[(i, k + 1)] = q0 * g12 + q1 * g22;
    }
    t[(k + 1, k)] = real(0.0);
}

/// Stability summary of one generator, before and after projection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub order: usize,
    pub n_stable: usize,
    pub n_neutral: usize,
    pub n_unstable: usize,
    pub max_re_unstable: Option<f64>,
    pub min_re_unstable: Option<f64>,
    pub post_max_re: f64,
    pub tol: f64,
    pub gram_condition: f64,
    pub projector_method: ProjectorMethod,
    pub basis_condition: f64,
    pub residual: f64,
    /// Largest distance between the compressed spectrum on the retained
    /// subspace and the retained eigenvalues, relative to the spectral radius.
    pub ritz_mismatch: f64,
}

#[derive(Debug, Clone)]
pub struct StabilizedGenerator {
    matrix: Mat<c64>,
    scheme: Option<ScalingScheme>,
    decomposition: EigenDecomposition,
    split: SpectralSplit,
    projector: Projector,
    /// `[V_S, complement]`: eigenvectors of `M_S`.
    eigenbasis: Mat<c64>,
    /// Eigenvalues matching the columns of `eigenbasis` (zeros on the complement).
    modal_eigenvalues: Vec<c64>,
    basis_condition: f64,
    spectrum: Vec<c64>,
    ritz_mismatch: f64,
}

impl StabilizedGenerator {
    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn scheme(&self) -> Option<ScalingScheme> {
        self.scheme
    }

    pub fn decomposition(&self) -> &EigenDecomposition {
        &self.decomposition
    }

    pub fn split(&self) -> &SpectralSplit {
        &self.split
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn eigenbasis(&self) -> &Mat<c64> {
        &self.eigenbasis
    }

    pub fn modal_eigenvalues(&self) -> &[c64] {
        &self.modal_eigenvalues
    }

    /// Condition number of the eigenbasis of `M_S`.
    pub fn basis_condition(&self) -> f64 {
        self.basis_condition
    }

    /// Upper bound for `‖exp(M_S t)‖₂`, `t ≥ 0`.
    pub fn exp_bound(&self) -> f64 {
        2.0 * self.basis_condition
    }

    /// Numerically computed eigenvalues of `M_S`.
    pub fn spectrum(&self) -> &[c64] {
        &self.spectrum
    }

    pub fn report(&self) -> StabilityReport {
        let e = &self.decomposition.eigenvalues;
        let unstable_re: Vec<f64> = self.split.unstable.iter().map(|&i| e[i].re).collect();
        StabilityReport {
            order: self.order(),
            n_stable: self.split.stable.len(),
            n_neutral: self.split.neutral.len(),
            n_unstable: self.split.unstable.len(),
            max_re_unstable: unstable_re.iter().copied().reduce(f64::max),
            min_re_unstable: unstable_re.iter().copied().reduce(f64::min),
            post_max_re: self
                .spectrum
                .iter()
                .map(|l| l.re)
                .fold(f64::NEG_INFINITY, f64::max),
            tol: self.split.tol,
            gram_condition: self.projector.gram_condition,
            projector_method: self.projector.method,
            basis_condition: self.basis_condition,
            residual: self.decomposition.residual,
            ritz_mismatch: self.ritz_mismatch,
        }
    }
}

pub fn stabilize(g: &GeneratorMatrix) -> Result<StabilizedGenerator> {
    stabilize_with(g, TolerancePolicy::Auto)
}

pub fn stabilize_with(g: &GeneratorMatrix, policy: TolerancePolicy) -> Result<StabilizedGenerator> {
    stabilize_inner(g.entries(), Some(g.scheme()), policy)
}

/// Stabilizes an arbitrary square matrix.
pub fn stabilize_matrix(m: &Mat<c64>, policy: TolerancePolicy) -> Result<StabilizedGenerator> {
    stabilize_inner(m, None, policy)
}

fn stabilize_inner(
    m: &Mat<c64>,
    scheme: Option<ScalingScheme>,
    policy: TolerancePolicy,
) -> Result<StabilizedGenerator> {
    let n = m.nrows();
    let decomposition = decompose(m.as_ref())?;
    let split = classify(&decomposition, policy);
    let projector = match build_projector(&decomposition, &split) {
        Err(Error::IllConditionedBasis { condition }) => {
            log::info!("eigenvector basis condition {condition:e}, using Schur vectors");
            schur_projector(m.as_ref(), &decomposition, &split)?
        }
        other => other?,
    };
    let p = projector.matrix();
    let matrix = p * m * p;

    let keep = split.retained();
    let k = keep.len();
    let eigenbasis = Mat::<c64>::from_fn(n, n, |i, j| {
        if j < k {
            decomposition.eigenvectors[(i, keep[j])]
        } else {
            projector.complement_basis()[(i, j - k)]
        }
    });
    let modal_eigenvalues: Vec<c64> = (0..n)
        .map(|j| {
            if j < k {
                decomposition.eigenvalues[keep[j]]
            } else {
                real(0.0)
            }
        })
        .collect();
    let basis_condition = condition_number(eigenbasis.as_ref())?;

    let scale = spectral_norm(m.as_ref())?.max(f64::MIN_POSITIVE);
    let modal_residual = {
        let lhs = &matrix * &eigenbasis;
        let rhs = Mat::<c64>::from_fn(n, n, |i, j| eigenbasis[(i, j)] * modal_eigenvalues[j]);
        max_abs((lhs - rhs).as_ref()) / scale
    };
    if basis_condition <= MODAL_CONDITION_LIMIT && modal_residual > RESIDUAL_THRESHOLD {
        return Err(Error::Verification(format!(
            "stabilized eigenbasis residual {modal_residual:e}"
        )));
    }

    let spectrum: Vec<c64> = matrix
        .eigenvalues()
        .map_err(|e| Error::Verification(format!("eigensolver did not converge: {e:?}")))?;
    let tol = split.tol;
    if let Some(bad) = spectrum.iter().find(|l| l.re > tol) {
        return Err(Error::Verification(format!(
            "stabilized spectrum has Re λ = {:e} above tolerance {tol:e}",
            bad.re
        )));
    }
    check_neutral_semisimple(&matrix, &spectrum, tol, scale)?;

    let ritz_mismatch = {
        let q = projector.range_basis();
        let compressed = q.adjoint() * m * q;
        let ritz = compressed
            .eigenvalues()
            .map_err(|e| Error::Verification(format!("eigensolver did not converge: {e:?}")))?;
        let target: Vec<c64> = keep.iter().map(|&i| decomposition.eigenvalues[i]).collect();
        let radius = target.iter().map(|l| l.norm()).fold(1.0, f64::max);
        multiset_distance(&ritz, &target) / radius
    };

    Ok(StabilizedGenerator {
        matrix,
        scheme,
        decomposition,
        split,
        projector,
        eigenbasis,
        modal_eigenvalues,
        basis_condition,
        spectrum,
        ritz_mismatch,
    })
}

/// Neutral eigenvalues of `m` must have geometric multiplicity equal to
/// their algebraic multiplicity.
fn check_neutral_semisimple(m: &Mat<c64>, spectrum: &[c64], tol: f64, scale: f64) -> Result<()> {
    let n = m.nrows();
    let radius = tol.max(1e-8 * scale);
    let mut seen = vec![false; spectrum.len()];
    for i in 0..spectrum.len() {
        if seen[i] || spectrum[i].re.abs() > tol {
            continue;
        }
        let center = spectrum[i];
        let members: Vec<usize> = (0..spectrum.len())
            .filter(|&j| (spectrum[j] - center).norm() <= radius)
            .collect();
        for &j in &members {
            seen[j] = true;
        }
        let shifted = Mat::<c64>::from_fn(n, n, |r, c| {
            m[(r, c)] - if r == c { center } else { real(0.0) }
        });
        let sv = singular_values(shifted.as_ref())?;
        let nullity = sv.iter().filter(|&&s| s <= RANK_THRESHOLD * scale).count();
        if nullity < members.len() {
            return Err(Error::Verification(format!(
                "neutral eigenvalue {center} is defective: algebraic {}, geometric {nullity}",
                members.len()
            )));
        }
    }
    Ok(())
}

/// Greedy nearest-neighbour matching distance between two multisets.
fn multiset_distance(a: &[c64], b: &[c64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for &x in a {
        let best = (0..b.len())
            .filter(|&j| !used[j])
            .min_by(|&i, &j| (b[i] - x).norm().total_cmp(&(b[j] - x).norm()));
        if let Some(j) = best {
            used[j] = true;
            worst = worst.max((b[j] - x).norm());
        }
    }
    worst
}

/// `‖exp(M_S t)‖₂` evaluated through the modal decomposition.
pub fn exp_norm(ms: &StabilizedGenerator, t: f64) -> Result<f64> {
    let w = ms.eigenbasis();
    let w_inv = w.partial_piv_lu().inverse();
    let n = w.nrows();
    let scaled = Mat::<c64>::from_fn(n, n, |i, j| w[(i, j)] * (ms.modal_eigenvalues[j] * t).exp());
    spectral_norm((scaled * w_inv).as_ref())
}

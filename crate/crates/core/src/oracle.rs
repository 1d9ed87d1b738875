//! Exact Liouville-space references for small models.
//!
//! Operators are vectorized row-major, `vec(X)[i·d + j] = X_{ij}`, so that
//! `vec(A X B) = (A ⊗ Bᵀ) vec(X)`.

use faer::{c64, Col, Mat, Row};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::gqme::CorrelationTrajectory;
use crate::linalg::{all_finite, kron, real, Operator, I};
use crate::model::ModelSystem;
use crate::moments::PairingContext;
use crate::propagator::TimeGrid;

/// Cap on the superoperator dimension `d²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct OracleBudget {
    pub max_dim_squared: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_dim_squared: 4096,
        }
    }
}

impl OracleBudget {
    /// Checks a Hilbert dimension `d` against the cap on `d²`.
    pub fn check(&self, dim: usize) -> Result<()> {
        let sq = dim.saturating_mul(dim);
        if sq > self.max_dim_squared {
            return Err(Error::BudgetExceeded {
                dim_squared: sq,
                cap: self.max_dim_squared,
            });
        }
        Ok(())
    }
}

pub fn vectorize(x: &Operator) -> Col<c64> {
    let d = x.dim();
    Col::from_fn(d * d, |k| x.get(k / d, k % d))
}

pub fn unvectorize(v: &Col<c64>) -> Result<Operator> {
    let d = (v.nrows() as f64).sqrt().round() as usize;
    if d * d != v.nrows() {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: v.nrows(),
        });
    }
    Ok(Operator::from_fn(d, |i, j| v[i * d + j]))
}

#[derive(Debug, Clone)]
pub struct LiouvilleRep {
    /// Hilbert-space dimension `d`.
    hilbert_dim: usize,
    /// `i(H ⊗ 1 − 1 ⊗ Hᵀ)`: the map `X ↦ i[H, X]`.
    il: Mat<c64>,
    /// Row functional `X ↦ Tr(X Â ρ_ss)`.
    functional: Row<c64>,
    a_vec: Col<c64>,
    norm: c64,
}

impl LiouvilleRep {
    pub fn new(h: &Operator, ctx: &PairingContext, budget: &OracleBudget) -> Result<Self> {
        let d = h.dim();
        budget.check(d)?;
        h.check_dim(ctx.observable())?;
        let id = Mat::<c64>::identity(d, d);
        let ht = h.mat().transpose().to_owned();
        let comm = kron(h.mat(), id.as_ref()) - kron(id.as_ref(), ht.as_ref());
        let il = comm * faer::Scale(I);
        let a_rho = ctx.observable().mat() * ctx.rho_ss().mat();
        let functional = Row::from_fn(d * d, |k| a_rho[(k % d, k / d)]);
        Ok(LiouvilleRep {
            hilbert_dim: d,
            il,
            functional,
            a_vec: vectorize(ctx.observable()),
            norm: ctx.norm(),
        })
    }

    pub fn for_model(
        model: &ModelSystem,
        ctx: &PairingContext,
        budget: &OracleBudget,
    ) -> Result<Self> {
        Self::new(&model.h_total, ctx, budget)
    }

    /// Superoperator dimension `d²`.
    pub fn dim(&self) -> usize {
        self.hilbert_dim * self.hilbert_dim
    }

    pub fn il_matrix(&self) -> &Mat<c64> {
        &self.il
    }

    /// `⟨X Â⟩ / ⟨Â Â⟩` on a vectorized `X`.
    pub fn project_coefficient(&self, x: &Col<c64>) -> c64 {
        (&self.functional * x) / self.norm
    }

    /// Dense rank-one `P = vec(Â) ℓᵀ / ⟨Â Â⟩`.
    pub fn p_super(&self) -> Mat<c64> {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| self.a_vec[i] * self.functional[j] / self.norm)
    }

    pub fn q_super(&self) -> Mat<c64> {
        let n = self.dim();
        let p = self.p_super();
        Mat::from_fn(
            n,
            n,
            |i, j| if i == j { real(1.0) } else { real(0.0) } - p[(i, j)],
        )
    }

    /// `Q ∘ iL` as a rank-one update of `iL`.
    pub fn q_il(&self) -> Mat<c64> {
        let row = &self.functional * &self.il;
        let n = self.dim();
        let mut out = self.il.clone();
        for j in 0..n {
            let r = row[j] / self.norm;
            for i in 0..n {
                out[(i, j)] -= self.a_vec[i] * r;
            }
        }
        out
    }

    /// Row functionals `ℓᵀ (iL)^m / ⟨Â Â⟩`, `m = 1 … count`.
    fn kernel_rows(&self, count: usize) -> Vec<Row<c64>> {
        let mut rows = Vec::with_capacity(count);
        let mut r = self.functional.clone();
        for _ in 0..count {
            r = &r * &self.il;
            rows.push(Row::from_fn(r.ncols(), |j| r[j] / self.norm));
        }
        rows
    }

    /// `f(t_k) = exp(t_k Q iL) Q iL vec(Â)`, one entry per grid point.
    fn orthogonal_dynamics(&self, grid: TimeGrid) -> Result<Vec<Col<c64>>> {
        let qil = self.q_il();
        let step = expm((&qil * faer::Scale(real(grid.dt()))).as_ref())?;
        if !all_finite(step.as_ref()) {
            return Err(Error::NonFinite {
                stage: "oracle step matrix",
                index: 0,
            });
        }
        let mut f = &qil * &self.a_vec;
        let mut out = Vec::with_capacity(grid.len());
        out.push(f.clone());
        for _ in 1..grid.len() {
            f = &step * &f;
            out.push(f.clone());
        }
        Ok(out)
    }
}

/// `C(t) = Tr(Â(t) Â ρ_ss) / ⟨Â Â⟩` with `Â(t) = e^{iHt} Â e^{−iHt}`.
pub fn exact_correlation(
    model: &ModelSystem,
    ctx: &PairingContext,
    grid: TimeGrid,
) -> Result<CorrelationTrajectory> {
    exact_correlation_budgeted(&model.h_total, ctx, grid, &OracleBudget::default())
}

pub fn exact_correlation_budgeted(
    h: &Operator,
    ctx: &PairingContext,
    grid: TimeGrid,
    budget: &OracleBudget,
) -> Result<CorrelationTrajectory> {
    let d = h.dim();
    budget.check(d)?;
    h.check_dim(ctx.observable())?;
    let eig = h
        .mat()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Verification(format!("Hermitian eigensolver failed: {e:?}")))?;
    let u = eig.U();
    let energies: Vec<f64> = eig.S().column_vector().iter().map(|e| e.re).collect();
    let a_tilde = u.adjoint() * ctx.observable().mat() * u;
    let b = u.adjoint() * ctx.observable().mat() * ctx.rho_ss().mat() * u;
    // C(t) = Σ_ij Ã_ij B_ji e^{i(E_i − E_j)t}
    let mut weights = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let w = a_tilde[(i, j)] * b[(j, i)];
            if w != real(0.0) {
                weights.push((energies[i] - energies[j], w));
            }
        }
    }
    let norm = ctx.norm();
    let c = grid
        .times()
        .iter()
        .map(|&t| {
            weights
                .iter()
                .map(|&(w, a)| a * (I * (w * t)).exp())
                .sum::<c64>()
                / norm
        })
        .collect();
    Ok(CorrelationTrajectory {
        grid,
        c,
        omega1: real(0.0),
        kernel_fingerprint: "oracle".into(),
    })
}

/// `K(t) = ⟨iL e^{tQiL} Q iL Â, Â⟩ / ⟨Â Â⟩` on the grid.
pub fn exact_memory_kernel(
    model: &ModelSystem,
    ctx: &PairingContext,
    grid: TimeGrid,
) -> Result<Vec<c64>> {
    let rep = LiouvilleRep::for_model(model, ctx, &OracleBudget::default())?;
    exact_memory_kernel_rep(&rep, grid)
}

pub fn exact_memory_kernel_rep(rep: &LiouvilleRep, grid: TimeGrid) -> Result<Vec<c64>> {
    let row = rep.kernel_rows(1).pop().expect("one row");
    Ok(rep
        .orthogonal_dynamics(grid)?
        .iter()
        .map(|f| &row * f)
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub order: usize,
    /// Largest `|K̇_n − K_{n+1} + Ω_n K_1|` over interior points and `n`.
    pub max_violation: f64,
    pub per_order: Vec<f64>,
    /// `Ω_n`, `n = 1 … order`, computed in Liouville space.
    pub moments: Vec<c64>,
    /// `K_n(t_k)` for `n = 1 … order + 1`.
    #[serde(skip)]
    pub kernels: Vec<Vec<c64>>,
}

/// Checks `K̇_n = K_{n+1} − Ω_n K_1` with centered differences on oracle kernels.
pub fn hierarchy_consistency(
    model: &ModelSystem,
    ctx: &PairingContext,
    order: usize,
    grid: TimeGrid,
) -> Result<ConsistencyReport> {
    let rep = LiouvilleRep::for_model(model, ctx, &OracleBudget::default())?;
    hierarchy_consistency_rep(&rep, order, grid)
}

pub fn hierarchy_consistency_rep(
    rep: &LiouvilleRep,
    order: usize,
    grid: TimeGrid,
) -> Result<ConsistencyReport> {
    let rows = rep.kernel_rows(order + 1);
    let moments: Vec<c64> = rows.iter().take(order).map(|r| r * &rep.a_vec).collect();
    let f = rep.orthogonal_dynamics(grid)?;
    let kernels: Vec<Vec<c64>> = rows
        .iter()
        .map(|r| f.iter().map(|x| r * x).collect())
        .collect();
    let h = grid.dt();
    let per_order: Vec<f64> = (0..order)
        .map(|n| {
            (1..grid.len().saturating_sub(1))
                .map(|k| {
                    let dk = (kernels[n][k + 1] - kernels[n][k - 1]) / (2.0 * h);
                    (dk - kernels[n + 1][k] + moments[n] * kernels[0][k]).norm()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ConsistencyReport {
        order,
        max_violation: per_order.iter().copied().fold(0.0, f64::max),
        per_order,
        moments,
        kernels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::model::{build_spin_boson, pauli_x, BathMode, SpinParams};
    use crate::moments::{apply_il, compute_moments};

    fn bare_spin() -> (ModelSystem, PairingContext) {
        let m = build_spin_boson(&SpinParams::new(1.0, 0.0).unwrap(), &[], 1.0, None).unwrap();
        let ctx = PairingContext::new(Operator::identity(2).scale(real(0.5)), pauli_x()).unwrap();
        (m, ctx)
    }

    fn small_boson() -> (ModelSystem, PairingContext) {
        let modes = [BathMode::new(0.8, 0.3, 3).unwrap()];
        let m = build_spin_boson(&SpinParams::new(1.0, 0.3).unwrap(), &modes, 1.0, None).unwrap();
        let ctx = PairingContext::for_model(&m).unwrap();
        (m, ctx)
    }

    #[test]
    fn budget_guard() {
        let b = OracleBudget::default();
        assert!(b.check(64).is_ok());
        assert!(matches!(
            b.check(65),
            Err(Error::BudgetExceeded {
                dim_squared: 4225,
                cap: 4096
            })
        ));
    }

    #[test]
    fn superoperator_matches_commutator() {
        let (m, ctx) = small_boson();
        let rep = LiouvilleRep::for_model(&m, &ctx, &OracleBudget::default()).unwrap();
        let d = m.dim;
        for s in 0..10u32 {
            let x = Operator::from_fn(d, |i, j| {
                c64::new(
                    ((i * 7 + j * 3 + s as usize) % 11) as f64 - 5.0,
                    ((i + 2 * j * s as usize) % 5) as f64,
                )
            });
            let lhs = rep.il_matrix() * vectorize(&x);
            let rhs = vectorize(&apply_il(&m.h_total, &x).unwrap());
            let err = (&lhs - &rhs).norm_max() / rhs.norm_max().max(1.0);
            assert!(err < 1e-12);
        }
        let id = vectorize(&Operator::identity(d));
        assert!((rep.il_matrix() * id).norm_max() < 1e-12);
    }

    #[test]
    fn projector_properties() {
        let (m, ctx) = small_boson();
        let rep = LiouvilleRep::for_model(&m, &ctx, &OracleBudget::default()).unwrap();
        let p = rep.p_super();
        let q = rep.q_super();
        assert!(max_abs((&p * &p - &p).as_ref()) < 1e-10);
        let a = vectorize(ctx.observable());
        assert!((&p * &a - &a).norm_max() < 1e-12);
        assert!((&q * &a).norm_max() < 1e-12);
        let n = rep.dim();
        assert!(max_abs((p + q - Mat::<c64>::identity(n, n)).as_ref()) < 1e-15);
    }

    #[test]
    fn bare_spin_correlation_is_cosine() {
        let (m, ctx) = bare_spin();
        let g = TimeGrid::new(10.0, 100).unwrap();
        let c = exact_correlation(&m, &ctx, g).unwrap();
        for (k, v) in c.c.iter().enumerate() {
            assert!((v - real(g.time(k).cos())).norm() < 1e-12);
        }
    }

    #[test]
    fn trivial_hamiltonian() {
        let h = Operator::zeros(2);
        let ctx = PairingContext::new(Operator::identity(2).scale(real(0.5)), pauli_x()).unwrap();
        let g = TimeGrid::new(1.0, 10).unwrap();
        let c = exact_correlation_budgeted(&h, &ctx, g, &OracleBudget::default()).unwrap();
        assert!(c.c.iter().all(|v| (v - real(1.0)).norm() < 1e-15));
        let rep = LiouvilleRep::new(&h, &ctx, &OracleBudget::default()).unwrap();
        assert!(exact_memory_kernel_rep(&rep, g)
            .unwrap()
            .iter()
            .all(|k| k.norm() == 0.0));
        let r = hierarchy_consistency_rep(&rep, 3, g).unwrap();
        assert_eq!(r.max_violation, 0.0);
    }

    #[test]
    fn initial_kernel_matches_moments() {
        let (m, ctx) = small_boson();
        let om = compute_moments(&m, &ctx, 2).unwrap();
        let g = TimeGrid::new(0.1, 1).unwrap();
        let k = exact_memory_kernel(&m, &ctx, g).unwrap();
        let expect = om.omega(2) - om.omega(1) * om.omega(1);
        assert!((k[0] - expect).norm() < 1e-10 * expect.norm().max(1.0));
    }

    #[test]
    fn hierarchy_relation_holds_to_second_order() {
        let (m, ctx) = small_boson();
        let mut prev = f64::NAN;
        for steps in [100, 200] {
            let g = TimeGrid::new(2.0, steps).unwrap();
            let r = hierarchy_consistency(&m, &ctx, 3, g).unwrap();
            if prev.is_finite() {
                assert!((3.4..4.6).contains(&(prev / r.max_violation)));
            }
            prev = r.max_violation;
            // K̇_1(0) = K_2(0) − Ω_1 K_1(0) via a one-sided estimate
            let d0 = (r.kernels[0][1] - r.kernels[0][0]) / g.dt();
            let rhs = r.kernels[1][0] - r.moments[0] * r.kernels[0][0];
            assert!((d0 - rhs).norm() < 10.0 * g.dt());
        }
        let om = compute_moments(&m, &ctx, 3).unwrap();
        let r = hierarchy_consistency(&m, &ctx, 3, TimeGrid::new(1.0, 10).unwrap()).unwrap();
        for n in 0..3 {
            assert!((r.moments[n] - om.values()[n]).norm() < 1e-12);
        }
    }
}

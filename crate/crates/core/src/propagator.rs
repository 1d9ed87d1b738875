//! Time propagation of the stabilized hierarchy.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{c64, Col, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::expm::expm;
use crate::hierarchy::{ScaledInitialCondition, ScalingScheme};
use crate::linalg::real;
use crate::stabilizer::StabilizedGenerator;

/// Eigenbasis condition above which the modal route is abandoned for Padé.
pub const MODAL_CONDITION_LIMIT: f64 = 1e8;

/// Uniform grid `t_k = k Δt`, `k = 0 … n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(invalid(format!("t_max must be positive, got {t_max}")));
        }
        if n_steps == 0 {
            return Err(invalid("grid needs at least one step"));
        }
        Ok(TimeGrid { t_max, n_steps })
    }

    pub fn with_step(dt: f64, t_max: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("dt must be positive, got {dt}")));
        }
        TimeGrid::new(t_max, (t_max / dt).round().max(1.0) as usize)
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.n_steps as f64
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpMethod {
    Eigen,
    Pade,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    /// Project the initial vector onto the retained subspace first.
    pub project_initial: bool,
    /// Keep every hierarchy component, not only `K_1`.
    pub keep_full: bool,
    /// Force an exponential route instead of choosing by conditioning.
    pub method: Option<ExpMethod>,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions {
            project_initial: true,
            keep_full: false,
            method: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KernelTrajectory {
    pub grid: TimeGrid,
    /// Scaled first component; equals `K_1` since `s_1 = 1`.
    pub k1: Vec<c64>,
    /// Scaled hierarchy state per time, if requested.
    pub full: Option<Vec<Vec<c64>>>,
    /// `‖(I − P) K̃(0)‖ / ‖K̃(0)‖`.
    pub discarded_norm: f64,
    pub method: ExpMethod,
    pub scheme: Option<ScalingScheme>,
}

impl KernelTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }
}

pub fn propagate_kernel(
    ms: &StabilizedGenerator,
    k0: &ScaledInitialCondition,
    grid: TimeGrid,
) -> Result<KernelTrajectory> {
    propagate_kernel_with(ms, k0.values(), grid, PropagationOptions::default())
}

pub fn propagate_kernel_with(
    ms: &StabilizedGenerator,
    k0: &[c64],
    grid: TimeGrid,
    opts: PropagationOptions,
) -> Result<KernelTrajectory> {
    let n = ms.order();
    if k0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: k0.len(),
        });
    }
    let x0 = Col::<c64>::from_fn(n, |i| k0[i]);
    let p = ms.projector().matrix();
    let px0 = p * &x0;
    let total = x0.norm_l2();
    let discarded_norm = if total > 0.0 {
        (&x0 - &px0).norm_l2() / total
    } else {
        0.0
    };
    let start = if opts.project_initial { px0 } else { x0 };

    let method = opts
        .method
        .unwrap_or(if ms.basis_condition() <= MODAL_CONDITION_LIMIT {
            ExpMethod::Eigen
        } else {
            ExpMethod::Pade
        });

    let mut k1 = Vec::with_capacity(grid.len());
    let mut full = opts.keep_full.then(|| Vec::with_capacity(grid.len()));
    let mut record = |k: usize, x: &Col<c64>| -> Result<()> {
        if let Some(i) = (0..n).find(|&i| !(x[i].re.is_finite() && x[i].im.is_finite())) {
            return Err(Error::NonFinite {
                stage: "propagation",
                index: k * n + i,
            });
        }
        k1.push(x[0]);
        if let Some(f) = full.as_mut() {
            f.push(x.iter().copied().collect());
        }
        Ok(())
    };

    match method {
        ExpMethod::Eigen => {
            let w = ms.eigenbasis();
            let coeff = w.partial_piv_lu().solve(&start);
            let lambda = ms.modal_eigenvalues();
            for k in 0..grid.len() {
                let t = grid.time(k);
                let d = Col::<c64>::from_fn(n, |j| coeff[j] * (lambda[j] * t).exp());
                record(k, &(w * &d))?;
            }
        }
        ExpMethod::Pade => {
            let dt = grid.dt();
            let step = expm((ms.matrix() * faer::Scale(real(dt))).as_ref())?;
            let mut x = start;
            record(0, &x)?;
            for k in 1..grid.len() {
                x = &step * &x;
                record(k, &x)?;
            }
        }
    }

    Ok(KernelTrajectory {
        grid,
        k1,
        full,
        discarded_norm,
        method,
        scheme: ms.scheme(),
    })
}

/// Physical `K_1(t)`; component `n` of the scaled state is `K_n / s_n` and `s_1 = 1`.
pub fn extract_physical_kernel(traj: &KernelTrajectory) -> Vec<c64> {
    let s1 = traj.scheme.map_or(1.0, |s| s.factor(1));
    traj.k1.iter().map(|&v| v * s1).collect()
}

/// Physical hierarchy component `K_n(t)`, `n ≥ 1`, when the full state was kept.
pub fn physical_component(traj: &KernelTrajectory, n: usize) -> Option<Vec<c64>> {
    let full = traj.full.as_ref()?;
    let s = traj.scheme.map_or(1.0, |s| s.factor(n));
    Some(full.iter().map(|x| x[n - 1] * s).collect())
}

/// `exp(M_S t)` through the modal decomposition.
pub fn modal_exponential(ms: &StabilizedGenerator, t: f64) -> Mat<c64> {
    let w = ms.eigenbasis();
    let n = w.nrows();
    let w_inv = w.partial_piv_lu().inverse();
    let lambda = ms.modal_eigenvalues();
    let wd = Mat::<c64>::from_fn(n, n, |i, j| w[(i, j)] * (lambda[j] * t).exp());
    wd * w_inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{build_generator, scale_initial, ScalingScheme};
    use crate::linalg::max_abs;
    use crate::moments::{initial_kernel_vector, MomentSequence};
    use crate::stabilizer::{stabilize, stabilize_matrix, TolerancePolicy};

    fn mat(rows: &[&[f64]]) -> Mat<c64> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| real(rows[i][j]))
    }

    #[test]
    fn grid_basics() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(TimeGrid::new(-1.0, 4).is_err());
        assert_eq!(TimeGrid::with_step(0.01, 2.0).unwrap().n_steps, 200);
    }

    #[test]
    fn decaying_scalar() {
        let ms = stabilize_matrix(&mat(&[&[-1.0]]), TolerancePolicy::Auto).unwrap();
        let g = TimeGrid::new(2.0, 20).unwrap();
        let tr =
            propagate_kernel_with(&ms, &[real(1.0)], g, PropagationOptions::default()).unwrap();
        for (k, v) in tr.k1.iter().enumerate() {
            assert!((v.re - (-g.time(k)).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn rotation_matches_cosine() {
        let ms =
            stabilize_matrix(&mat(&[&[0.0, 1.0], &[-1.0, 0.0]]), TolerancePolicy::Auto).unwrap();
        let g = TimeGrid::new(10.0, 1000).unwrap();
        for method in [ExpMethod::Eigen, ExpMethod::Pade] {
            let opts = PropagationOptions {
                method: Some(method),
                ..Default::default()
            };
            let tr = propagate_kernel_with(&ms, &[real(1.0), real(0.0)], g, opts).unwrap();
            for (k, v) in tr.k1.iter().enumerate() {
                assert!((v - real(g.time(k).cos())).norm() < 1e-10, "{method:?}");
            }
        }
    }

    #[test]
    fn modal_and_pade_exponentials_agree() {
        let m = mat(&[&[-0.3, 2.0, 0.0], &[-2.0, -0.1, 1.0], &[0.5, 0.0, 0.7]]);
        let ms = stabilize_matrix(&m, TolerancePolicy::Auto).unwrap();
        for t in [0.1, 1.0, 5.0] {
            let a = modal_exponential(&ms, t);
            let b = expm((ms.matrix() * faer::Scale(real(t))).as_ref()).unwrap();
            assert!(max_abs((a - b).as_ref()) < 1e-10);
        }
    }

    #[test]
    fn discarded_norm_of_unstable_start() {
        let ms =
            stabilize_matrix(&mat(&[&[-1.0, 0.0], &[0.0, 1.0]]), TolerancePolicy::Auto).unwrap();
        let g = TimeGrid::new(1.0, 10).unwrap();
        let tr = propagate_kernel_with(
            &ms,
            &[real(0.0), real(1.0)],
            g,
            PropagationOptions::default(),
        )
        .unwrap();
        assert!((tr.discarded_norm - 1.0).abs() < 1e-14);
        assert!(tr.k1.iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn physical_kernel_is_scheme_independent_without_unstable_modes() {
        // λ² + λ + 2 = 0 at N = 2: both roots stable
        let m = MomentSequence::from_values(vec![real(1.0), real(2.0), real(5.0)], "t").unwrap();
        let k0 = initial_kernel_vector(&m);
        let g = TimeGrid::new(3.0, 30).unwrap();
        let mut out = Vec::new();
        for scheme in [
            ScalingScheme::none(),
            ScalingScheme::factorial(2.0).unwrap(),
            ScalingScheme::power(2.0).unwrap(),
        ] {
            let gen = build_generator(&m, scheme).unwrap();
            let ms = stabilize(&gen).unwrap();
            assert_eq!(ms.report().n_unstable, 0);
            let tr = propagate_kernel(&ms, &scale_initial(&k0, scheme).unwrap(), g).unwrap();
            out.push(extract_physical_kernel(&tr));
        }
        for k in 0..out[0].len() {
            assert!((out[0][k] - out[1][k]).norm() < 1e-10);
            assert!((out[0][k] - out[2][k]).norm() < 1e-10);
        }
    }
}

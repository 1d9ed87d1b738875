//! Finite spin-boson model: a two-level system coupled through `σ_x` to a
//! discretized Ohmic bath of Fock-truncated oscillators. `ħ = 1`.

use std::f64::consts::PI;

use faer::Side;

use crate::error::{invalid, Error, Result};
use crate::linalg::{real, Operator, I};
use crate::oracle::OracleBudget;

/// Upper bound on the Hilbert dimension of any model we are willing to build.
pub const MAX_HILBERT_DIM: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams {
    /// Site energy difference.
    pub delta: f64,
    /// Tunneling matrix element.
    pub epsilon: f64,
}

impl SpinParams {
    pub fn new(delta: f64, epsilon: f64) -> Result<Self> {
        if !delta.is_finite() || !epsilon.is_finite() {
            return Err(invalid("spin parameters must be finite"));
        }
        Ok(Self { delta, epsilon })
    }

    /// `(Δ/2)σ_z + εσ_x`.
    pub fn hamiltonian(&self) -> Operator {
        &pauli_z().scale(real(0.5 * self.delta)) + &pauli_x().scale(real(self.epsilon))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMode {
    pub omega: f64,
    pub coupling: f64,
    pub fock_cutoff: usize,
}

impl BathMode {
    pub fn new(omega: f64, coupling: f64, fock_cutoff: usize) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid(format!(
                "mode frequency must be positive, got {omega}"
            )));
        }
        if !coupling.is_finite() {
            return Err(invalid("mode coupling must be finite"));
        }
        if fock_cutoff < 2 {
            return Err(invalid(format!(
                "fock cutoff must be at least 2, got {fock_cutoff}"
            )));
        }
        Ok(Self {
            omega,
            coupling,
            fock_cutoff,
        })
    }
}

/// `J(ω) = 2γω e^{−|ω|/ω_D}`.
pub fn ohmic_density(gamma: f64, omega_d: f64, omega: f64) -> f64 {
    2.0 * gamma * omega * (-omega.abs() / omega_d).exp()
}

/// Uniform grid `ω_j = jΔω`, `Δω = omega_max / n_modes`, with couplings
/// `c_j² = (2/π) J(ω_j) ω_j Δω` so that `(π/2) Σ_j c_j²/ω_j δ(ω − ω_j)`
/// reproduces `J` bin by bin.
pub fn discretize_ohmic(
    gamma: f64,
    omega_d: f64,
    n_modes: usize,
    omega_max: f64,
    fock_cutoff: usize,
) -> Result<Vec<BathMode>> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid(format!(
            "coupling strength must be nonnegative, got {gamma}"
        )));
    }
    if !(omega_d > 0.0 && omega_d.is_finite()) {
        return Err(invalid(format!(
            "cutoff frequency must be positive, got {omega_d}"
        )));
    }
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(invalid(format!(
            "omega_max must be positive, got {omega_max}"
        )));
    }
    if n_modes == 0 {
        return Ok(Vec::new());
    }
    let dw = omega_max / n_modes as f64;
    (1..=n_modes)
        .map(|j| {
            let w = j as f64 * dw;
            let c = (2.0 / PI * ohmic_density(gamma, omega_d, w) * w * dw).sqrt();
            BathMode::new(w, c, fock_cutoff)
        })
        .collect()
}

/// Spin-boson Hamiltonian pieces on `C² ⊗ ⊗_j C^{n_j}`.
#[derive(Debug, Clone)]
pub struct ModelSystem {
    pub dim: usize,
    pub h_total: Operator,
    pub h_sys: Operator,
    pub h_bath: Operator,
    pub h_coupling: Operator,
    /// System coupling operator `Q̂ = σ_x ⊗ 1`.
    pub q_op: Operator,
    /// Dipole `μ̂ = σ_x ⊗ 1`.
    pub observable: Operator,
    pub beta: f64,
}

pub fn pauli_x() -> Operator {
    Operator::from_fn(2, |i, j| real(if i != j { 1.0 } else { 0.0 }))
}

pub fn pauli_y() -> Operator {
    Operator::from_fn(2, |i, j| match (i, j) {
        (0, 1) => -I,
        (1, 0) => I,
        _ => real(0.0),
    })
}

pub fn pauli_z() -> Operator {
    Operator::from_fn(2, |i, j| match (i, j) {
        (0, 0) => real(1.0),
        (1, 1) => real(-1.0),
        _ => real(0.0),
    })
}

/// Truncated annihilation operator on `n` Fock levels.
pub fn annihilation(n: usize) -> Operator {
    Operator::from_fn(n, |i, j| {
        if j == i + 1 {
            real((j as f64).sqrt())
        } else {
            real(0.0)
        }
    })
}

/// `(x̂, p̂)` with `x̂ = (a + a†)/√2`, `p̂ = i(a† − a)/√2`.
pub fn position_momentum(n: usize) -> (Operator, Operator) {
    let a = annihilation(n);
    let ad = a.adjoint();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&a + &ad).scale(real(r));
    let p = (&ad - &a).scale(I * r);
    (x, p)
}

/// Places `op` at tensor slot `slot` among factors of the given dimensions.
fn embed(op: &Operator, slot: usize, dims: &[usize]) -> Operator {
    dims.iter()
        .enumerate()
        .fold(Operator::identity(1), |acc, (k, &d)| {
            if k == slot {
                acc.kron(op)
            } else {
                acc.kron(&Operator::identity(d))
            }
        })
}

pub fn build_spin_boson(
    spin: &SpinParams,
    modes: &[BathMode],
    beta: f64,
    budget: Option<&OracleBudget>,
) -> Result<ModelSystem> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid(format!(
            "inverse temperature must be nonnegative, got {beta}"
        )));
    }
    let mut dims = vec![2usize];
    dims.extend(modes.iter().map(|m| m.fock_cutoff));
    let dim = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&d| d <= MAX_HILBERT_DIM)
        .ok_or_else(|| invalid(format!("Hilbert dimension exceeds {MAX_HILBERT_DIM}")))?;
    if let Some(b) = budget {
        b.check(dim)?;
    }

    let h_sys = embed(&spin.hamiltonian(), 0, &dims);
    let q_op = embed(&pauli_x(), 0, &dims);
    let mut h_bath = Operator::zeros(dim);
    let mut force = Operator::zeros(dim);
    for (k, mode) in modes.iter().enumerate() {
        let (x, p) = position_momentum(mode.fock_cutoff);
        let osc = (&(&p * &p) + &(&x * &x)).scale(real(0.5 * mode.omega));
        h_bath = &h_bath + &embed(&osc, k + 1, &dims);
        force = &force + &embed(&x, k + 1, &dims).scale(real(mode.coupling));
    }
    let h_coupling = &q_op * &force;
    let h_total = &(&h_sys + &h_bath) + &h_coupling;
    Ok(ModelSystem {
        dim,
        h_total,
        h_sys,
        h_bath,
        h_coupling,
        observable: q_op.clone(),
        q_op,
        beta,
    })
}

/// `e^{−βH} / Tr e^{−βH}` via the Hermitian eigendecomposition of `h`.
pub fn gibbs_state(h: &Operator, beta: f64) -> Result<Operator> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid(format!(
            "inverse temperature must be nonnegative, got {beta}"
        )));
    }
    let eig = h
        .mat()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Verification(format!("Hermitian eigensolver failed: {e:?}")))?;
    let energies: Vec<f64> = eig.S().column_vector().iter().map(|e| e.re).collect();
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let u = eig.U();
    let d = h.dim();
    let rho = Operator::from_fn(d, |i, j| {
        (0..d)
            .map(|k| u[(i, k)] * u[(j, k)].conj() * (weights[k] / z))
            .sum()
    });
    Ok(rho)
}

//! The `ρ_ss`-weighted pairing and the static moments `Ω_n`.

use faer::{c64, Mat};

use crate::error::{invalid, Error, Result};
use crate::linalg::{trace_of_product, Operator, I};
use crate::model::{gibbs_state, ModelSystem};

/// Moments whose growth rate `|Ω_n|^{1/n}` exceeds this are flagged.
pub const DEFAULT_MAGNITUDE_BOUND: f64 = 1e6;

/// Pairing `⟨X Y⟩ = Tr(X·Y·ρ_ss)` together with the normalization `⟨Â Â⟩`.
#[derive(Debug, Clone)]
pub struct PairingContext {
    rho_ss: Operator,
    observable: Operator,
    /// `Â·ρ_ss`, cached for pairings against `Â`.
    a_rho: Mat<c64>,
    norm: c64,
}

impl PairingContext {
    pub fn new(rho_ss: Operator, observable: Operator) -> Result<Self> {
        rho_ss.check_dim(&observable)?;
        let a_rho = observable.mat() * rho_ss.mat();
        let norm = trace_of_product(observable.mat(), a_rho.as_ref());
        let scale = observable.max_abs().powi(2).max(f64::MIN_POSITIVE);
        if !(norm.norm() > 1e-14 * scale) || !norm.re.is_finite() {
            return Err(Error::DegeneratePairing(norm.norm()));
        }
        Ok(Self {
            rho_ss,
            observable,
            a_rho,
            norm,
        })
    }

    /// Gibbs state of the total Hamiltonian paired with the model dipole.
    pub fn for_model(model: &ModelSystem) -> Result<Self> {
        let rho = gibbs_state(&model.h_total, model.beta)?;
        Self::new(rho, model.observable.clone())
    }

    pub fn rho_ss(&self) -> &Operator {
        &self.rho_ss
    }

    pub fn observable(&self) -> &Operator {
        &self.observable
    }

    pub fn norm(&self) -> c64 {
        self.norm
    }

    /// `⟨X Â⟩ / ⟨Â Â⟩`.
    pub fn normalized_pair_with_observable(&self, x: &Operator) -> Result<c64> {
        self.rho_ss.check_dim(x)?;
        Ok(trace_of_product(x.mat(), self.a_rho.as_ref()) / self.norm)
    }
}

/// `Tr(x·y·ρ_ss)`.
pub fn pair(x: &Operator, y: &Operator, ctx: &PairingContext) -> Result<c64> {
    x.check_dim(y)?;
    x.check_dim(&ctx.rho_ss)?;
    let y_rho = y.mat() * ctx.rho_ss.mat();
    Ok(trace_of_product(x.mat(), y_rho.as_ref()))
}

/// Heisenberg generator `(iL)X = i[H, X]`, so that `e^{t·iL}X = e^{iHt} X e^{−iHt}`.
pub fn apply_il(h: &Operator, x: &Operator) -> Result<Operator> {
    Ok(h.commutator(x)?.scale(I))
}

/// `Ω_1 … Ω_{N+1}` for a truncation order `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    values: Vec<c64>,
    fingerprint: String,
    growth_rate: f64,
    hazard: bool,
}

impl MomentSequence {
    /// Wraps externally supplied moments `Ω_1 … Ω_{N+1}`.
    pub fn from_values(values: Vec<c64>, fingerprint: impl Into<String>) -> Result<Self> {
        Self::with_bound(values, fingerprint.into(), DEFAULT_MAGNITUDE_BOUND)
    }

    fn with_bound(values: Vec<c64>, fingerprint: String, bound: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("a moment sequence needs at least Ω_1 and Ω_2"));
        }
        if let Some(idx) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite {
                stage: "moments",
                index: idx + 1,
            });
        }
        let growth_rate = growth_rate(&values);
        Ok(Self {
            values,
            fingerprint,
            growth_rate,
            hazard: growth_rate > bound,
        })
    }

    /// Truncation order `N` (the sequence holds `N + 1` moments).
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[c64] {
        &self.values
    }

    /// `Ω_n`, 1-based.
    pub fn omega(&self, n: usize) -> c64 {
        self.values[n - 1]
    }

    /// The GQME frequency parameter `Ω = Ω_1`.
    pub fn omega1(&self) -> c64 {
        self.values[0]
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// `max_n |Ω_n|^{1/n}`.
    pub fn growth_rate(&self) -> f64 {
        self.growth_rate
    }

    /// Set when the growth rate exceeded the magnitude bound.
    pub fn precision_hazard(&self) -> bool {
        self.hazard
    }

    /// The first `order + 1` moments, for running a lower truncation.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        if order == 0 || order > self.order() {
            return Err(invalid(format!(
                "cannot truncate order-{} moments to order {order}",
                self.order()
            )));
        }
        let values = self.values[..=order].to_vec();
        Ok(Self {
            growth_rate: growth_rate(&values),
            values,
            fingerprint: self.fingerprint.clone(),
            hazard: self.hazard,
        })
    }
}

fn growth_rate(values: &[c64]) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(k, v)| v.norm().powf(1.0 / (k + 1) as f64))
        .fold(0.0, f64::max)
}

pub fn compute_moments(
    model: &ModelSystem,
    ctx: &PairingContext,
    order: usize,
) -> Result<MomentSequence> {
    compute_moments_bounded(model, ctx, order, DEFAULT_MAGNITUDE_BOUND)
}

/// Nested commutators `X_0 = Â`, `X_n = i[H, X_{n−1}]`, paired against `Â`.
pub fn compute_moments_bounded(
    model: &ModelSystem,
    ctx: &PairingContext,
    order: usize,
    magnitude_bound: f64,
) -> Result<MomentSequence> {
    if order == 0 {
        return Err(invalid("truncation order must be at least 1"));
    }
    model.h_total.check_dim(ctx.observable())?;
    let mut x = ctx.observable().clone();
    let mut values = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        x = apply_il(&model.h_total, &x)?;
        values.push(ctx.normalized_pair_with_observable(&x)?);
    }
    let fingerprint =
        crate::csvio::fingerprint_operators(&[&model.h_total, ctx.observable(), ctx.rho_ss()]);
    MomentSequence::with_bound(values, fingerprint, magnitude_bound)
}

/// `K_n(0) = Ω_{n+1} − Ω_n Ω_1`, `n = 1 … N`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialKernelVector(pub Vec<c64>);

impl InitialKernelVector {
    pub fn values(&self) -> &[c64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn initial_kernel_vector(m: &MomentSequence) -> InitialKernelVector {
    let w = m.values();
    let om1 = w[0];
    InitialKernelVector((0..m.order()).map(|n| w[n + 1] - w[n] * om1).collect())
}

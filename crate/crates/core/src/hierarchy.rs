//! The truncated kernel hierarchy `K̇ = M K` in unscaled, factorial-scaled
//! and power-law-scaled variables.

use std::fmt;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::real;
use crate::moments::{InitialKernelVector, MomentSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingKind {
    None,
    Factorial,
    Power,
}

impl fmt::Display for ScalingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalingKind::None => "none",
            ScalingKind::Factorial => "factorial",
            ScalingKind::Power => "power",
        })
    }
}

/// Variable rescaling `K̃_n = K_n / s_n` with characteristic frequency `Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingScheme {
    kind: ScalingKind,
    lambda: f64,
}

impl ScalingScheme {
    pub fn none() -> Self {
        Self {
            kind: ScalingKind::None,
            lambda: 1.0,
        }
    }

    pub fn factorial(lambda: f64) -> Result<Self> {
        Self::new(ScalingKind::Factorial, lambda)
    }

    pub fn power(lambda: f64) -> Result<Self> {
        Self::new(ScalingKind::Power, lambda)
    }

    pub fn new(kind: ScalingKind, lambda: f64) -> Result<Self> {
        if kind == ScalingKind::None {
            return Ok(Self::none());
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid(format!(
                "scaling frequency must be positive, got {lambda}"
            )));
        }
        Ok(Self { kind, lambda })
    }

    pub fn kind(&self) -> ScalingKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `s_n` for 1-based `n`: `1`, `n!Λ^{n−1}` or `Λ^{n−1}`.
    pub fn factor(&self, n: usize) -> f64 {
        let l = self.lambda;
        match self.kind {
            ScalingKind::None => 1.0,
            ScalingKind::Power => l.powi(n as i32 - 1),
            ScalingKind::Factorial => (2..=n).fold(1.0, |acc, k| acc * k as f64 * l),
        }
    }

    /// Superdiagonal entry of row `i` (1-based).
    fn coupling(&self, i: usize) -> f64 {
        match self.kind {
            ScalingKind::None => 1.0,
            ScalingKind::Power => self.lambda,
            ScalingKind::Factorial => (i + 1) as f64 * self.lambda,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    entries: Mat<c64>,
    scheme: ScalingScheme,
    fingerprint: String,
}

impl GeneratorMatrix {
    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Mat<c64> {
        &self.entries
    }

    pub fn scheme(&self) -> ScalingScheme {
        self.scheme
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Entries outside the first column and the superdiagonal.
    pub fn structural_violations(&self) -> usize {
        let n = self.order();
        let mut count = 0;
        for j in 0..n {
            for i in 0..n {
                if j != 0 && j != i + 1 && self.entries[(i, j)] != real(0.0) {
                    count += 1;
                }
            }
        }
        count
    }
}

/// `M̃_{ij} = c_i δ_{i+1,j} − (Ω_i / s_i) δ_{j,1}` with `K_{N+1} = 0`.
pub fn build_generator(m: &MomentSequence, scheme: ScalingScheme) -> Result<GeneratorMatrix> {
    let n = m.order();
    let mut entries = Mat::<c64>::zeros(n, n);
    for i in 1..=n {
        let s = scheme.factor(i);
        let v = -m.omega(i) / s;
        if !(s.is_finite() && s > 0.0 && v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Conditioning {
                row: i,
                lambda: scheme.lambda(),
            });
        }
        entries[(i - 1, 0)] = v;
        if i < n {
            let c = scheme.coupling(i);
            if !c.is_finite() {
                return Err(Error::Conditioning {
                    row: i,
                    lambda: scheme.lambda(),
                });
            }
            entries[(i - 1, i)] += real(c);
        }
    }
    Ok(GeneratorMatrix {
        entries,
        scheme,
        fingerprint: m.fingerprint().to_owned(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledInitialCondition {
    values: Vec<c64>,
    scheme: ScalingScheme,
}

impl ScaledInitialCondition {
    pub fn values(&self) -> &[c64] {
        &self.values
    }

    pub fn scheme(&self) -> ScalingScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `K̃_n(0) = K_n(0) / s_n`.
pub fn scale_initial(
    v: &InitialKernelVector,
    scheme: ScalingScheme,
) -> Result<ScaledInitialCondition> {
    let values: Vec<c64> = v
        .values()
        .iter()
        .enumerate()
        .map(|(k, &x)| x / scheme.factor(k + 1))
        .collect();
    if let Some(idx) = values
        .iter()
        .position(|x| !(x.re.is_finite() && x.im.is_finite()))
    {
        return Err(Error::Conditioning {
            row: idx + 1,
            lambda: scheme.lambda(),
        });
    }
    Ok(ScaledInitialCondition { values, scheme })
}

/// Growth-rate estimate `max_n |Ω_n|^{1/n}`, clamped to at least 1.
pub fn default_lambda(m: &MomentSequence) -> f64 {
    m.growth_rate().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::moments::initial_kernel_vector;

    fn moments(v: &[f64]) -> MomentSequence {
        MomentSequence::from_values(v.iter().map(|&x| real(x)).collect(), "t").unwrap()
    }

    fn dense(g: &GeneratorMatrix) -> Vec<Vec<f64>> {
        let n = g.order();
        (0..n)
            .map(|i| (0..n).map(|j| g.entries()[(i, j)].re).collect())
            .collect()
    }

    // Ω = [2, 3] plus a trailing Ω_3 (unused by the 2×2 generator).
    #[test]
    fn unscaled_example() {
        let g = build_generator(&moments(&[2.0, 3.0, 7.0]), ScalingScheme::none()).unwrap();
        assert_eq!(dense(&g), vec![vec![-2.0, 1.0], vec![-3.0, 0.0]]);
    }

    #[test]
    fn power_example() {
        let g = build_generator(
            &moments(&[2.0, 3.0, 7.0]),
            ScalingScheme::power(2.0).unwrap(),
        )
        .unwrap();
        assert_eq!(dense(&g), vec![vec![-2.0, 2.0], vec![-1.5, 0.0]]);
    }

    #[test]
    fn factorial_example() {
        let g = build_generator(
            &moments(&[2.0, 3.0, 7.0]),
            ScalingScheme::factorial(2.0).unwrap(),
        )
        .unwrap();
        assert_eq!(dense(&g), vec![vec![-2.0, 4.0], vec![-0.75, 0.0]]);
    }

    #[test]
    fn scaled_initial_examples() {
        let k = InitialKernelVector(vec![real(-1.0), real(0.0)]);
        assert_eq!(
            scale_initial(&k, ScalingScheme::none()).unwrap().values(),
            k.values()
        );
        let p = scale_initial(&k, ScalingScheme::power(10.0).unwrap()).unwrap();
        assert_eq!(p.values(), &[real(-1.0), real(0.0)]);
        let k = InitialKernelVector(vec![real(3.0), real(8.0)]);
        let f = scale_initial(&k, ScalingScheme::factorial(2.0).unwrap()).unwrap();
        assert_eq!(f.values(), &[real(3.0), real(2.0)]);
    }

    #[test]
    fn default_lambda_examples() {
        let a = 4.5f64;
        let m = moments(&(1..=8).map(|n| a.powi(n)).collect::<Vec<_>>());
        assert!((default_lambda(&m) - a).abs() < 1e-12);
        assert_eq!(default_lambda(&moments(&[0.0, 0.0, 0.0])), 1.0);
    }

    #[test]
    fn rejects_bad_lambda() {
        assert!(ScalingScheme::power(0.0).is_err());
        assert!(ScalingScheme::factorial(-1.0).is_err());
        assert!(ScalingScheme::new(ScalingKind::None, -1.0).is_ok());
    }

    #[test]
    fn conditioning_error_names_row() {
        let m = moments(&(1..=5).map(|n| 10f64.powi(n * 60)).collect::<Vec<_>>());
        let err = build_generator(&m, ScalingScheme::power(1e-300).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Conditioning { row: 2, .. }), "{err}");
    }

    #[test]
    fn sparsity_pattern() {
        for n in [1usize, 2, 5, 9] {
            let m = moments(&(1..=n + 1).map(|k| k as f64 + 0.5).collect::<Vec<_>>());
            for scheme in [
                ScalingScheme::none(),
                ScalingScheme::factorial(1.3).unwrap(),
                ScalingScheme::power(0.7).unwrap(),
            ] {
                let g = build_generator(&m, scheme).unwrap();
                assert_eq!(g.structural_violations(), 0);
                let nnz = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| g.entries()[(i, j)] != real(0.0))
                    .count();
                assert_eq!(nnz, 2 * n - 1);
            }
        }
    }

    #[test]
    fn diagonal_similarity_recovers_unscaled_generator() {
        let vals: Vec<f64> = (1..=9)
            .map(|k| (-1.7f64).powi(k) + 0.3 * k as f64)
            .collect();
        let m = moments(&vals);
        let plain = build_generator(&m, ScalingScheme::none()).unwrap();
        for scheme in [
            ScalingScheme::factorial(2.5).unwrap(),
            ScalingScheme::power(3.0).unwrap(),
        ] {
            let g = build_generator(&m, scheme).unwrap();
            let n = g.order();
            let back = Mat::<c64>::from_fn(n, n, |i, j| {
                g.entries()[(i, j)] * (scheme.factor(i + 1) / scheme.factor(j + 1))
            });
            let err =
                max_abs((&back - plain.entries()).as_ref()) / max_abs(plain.entries().as_ref());
            assert!(err <= 1e-10, "{scheme:?}: {err:e}");
        }
    }

    #[test]
    fn scaled_initial_condition_inverts_factors() {
        let m = moments(&[0.5, -1.0, 2.0, 0.25, 3.0]);
        let k = initial_kernel_vector(&m);
        let scheme = ScalingScheme::factorial(1.7).unwrap();
        let s = scale_initial(&k, scheme).unwrap();
        for (n, (&a, &b)) in s.values().iter().zip(k.values()).enumerate() {
            assert!((a * scheme.factor(n + 1) - b).norm() <= 1e-14 * b.norm().max(1.0));
        }
    }
}

//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::csvio::hash_bytes;
use crate::error::{Error, Result};
use crate::hierarchy::ScalingKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub hierarchy: HierarchyConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub spectra: SpectraConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub gqme: GqmeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub delta: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "one")]
    pub omega_d: f64,
    pub beta: f64,
    #[serde(default)]
    pub n_modes: usize,
    #[serde(default = "default_fock")]
    pub fock_cutoff: usize,
    /// Defaults to `10 ω_D`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyConfig {
    pub order: usize,
    pub scheme: ScalingKind,
    #[serde(default)]
    pub lambda: LambdaSpec,
    #[serde(default = "yes")]
    pub project_initial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Value(f64),
    Keyword(LambdaKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaKeyword {
    Auto,
}

impl Default for LambdaSpec {
    fn default() -> Self {
        LambdaSpec::Keyword(LambdaKeyword::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    /// Lineshape damping; chosen automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default)]
    pub normalize: bool,
}

impl Default for SpectraConfig {
    fn default() -> Self {
        SpectraConfig {
            omega_min: -4.0,
            omega_max: 4.0,
            points: 401,
            eta: None,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_budget")]
    pub max_dim_squared: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            enabled: false,
            max_dim_squared: default_budget(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GqmeConfig {
    #[serde(default = "default_floor")]
    pub kernel_floor: f64,
}

impl Default for GqmeConfig {
    fn default() -> Self {
        GqmeConfig {
            kernel_floor: default_floor(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_fock() -> usize {
    4
}
fn default_budget() -> usize {
    4096
}
fn default_floor() -> f64 {
    1e-10
}

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| cfg(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        let finite = [m.delta, m.epsilon, m.gamma, m.omega_d, m.beta];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(cfg("model parameters must be finite"));
        }
        if m.beta < 0.0 {
            return Err(cfg("beta must be nonnegative"));
        }
        if m.gamma < 0.0 || m.omega_d <= 0.0 {
            return Err(cfg("need gamma >= 0 and omega_d > 0"));
        }
        if m.fock_cutoff < 2 {
            return Err(cfg("fock_cutoff must be at least 2"));
        }
        if let Some(w) = m.omega_max {
            if !(w > 0.0 && w.is_finite()) {
                return Err(cfg("model.omega_max must be positive"));
            }
        }
        if self.hierarchy.order == 0 {
            return Err(cfg("hierarchy.order must be at least 1"));
        }
        if let LambdaSpec::Value(l) = self.hierarchy.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(cfg("hierarchy.lambda must be positive or \"auto\""));
            }
        }
        let g = &self.grid;
        if !(g.t_max > 0.0 && g.t_max.is_finite()) || g.n_steps == 0 {
            return Err(cfg("grid needs t_max > 0 and n_steps >= 1"));
        }
        let s = &self.spectra;
        if !(s.omega_max > s.omega_min) || s.points < 2 {
            return Err(cfg("spectra needs omega_min < omega_max and points >= 2"));
        }
        if let Some(eta) = s.eta {
            if !(eta >= 0.0) {
                return Err(cfg("spectra.eta must be nonnegative"));
            }
        }
        if !(self.gqme.kernel_floor >= 0.0) {
            return Err(cfg("gqme.kernel_floor must be nonnegative"));
        }
        Ok(())
    }

    pub fn omega_max(&self) -> f64 {
        self.model.omega_max.unwrap_or(10.0 * self.model.omega_d)
    }

    /// Copy with every default made explicit and `lambda` replaced by `resolved`.
    pub fn resolved(&self, lambda: f64) -> Self {
        let mut c = self.clone();
        c.model.omega_max = Some(self.omega_max());
        c.hierarchy.lambda = LambdaSpec::Value(lambda);
        c.output = None;
        c
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hash_bytes(&serde_json::to_vec(self).expect("config serializes"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "model": {"delta": 1.0, "beta": 1.0},
        "hierarchy": {"order": 3, "scheme": "factorial", "lambda": "auto"},
        "grid": {"t_max": 5.0, "n_steps": 100}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_json(BASE).unwrap();
        assert_eq!(c.hierarchy.lambda, LambdaSpec::Keyword(LambdaKeyword::Auto));
        assert_eq!(c.model.n_modes, 0);
        assert_eq!(c.omega_max(), 10.0);
        assert!(c.hierarchy.project_initial);
        assert!(!c.oracle.enabled);
    }

    #[test]
    fn numeric_lambda_and_round_trip() {
        let text = BASE.replace("\"auto\"", "100");
        let c = RunConfig::from_json(&text).unwrap();
        assert_eq!(c.hierarchy.lambda, LambdaSpec::Value(100.0));
        let again =
            RunConfig::from_json(&serde_json::to_string(&c.resolved(100.0)).unwrap()).unwrap();
        assert_eq!(again.hash(), c.resolved(100.0).hash());
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            BASE.replace("factorial", "cubic"),
            BASE.replace("\"beta\": 1.0", "\"beta\": 1.0, \"colour\": 3"),
            BASE.replace("\"auto\"", "\"sometimes\""),
            BASE.replace("\"auto\"", "-1"),
            BASE.replace("\"order\": 3", "\"order\": 0"),
            BASE.replace("\"beta\": 1.0", "\"beta\": -1.0"),
        ] {
            let e = RunConfig::from_json(&bad).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{bad}");
        }
    }
}

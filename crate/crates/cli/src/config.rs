//! Experiment configuration files.
//!
//! A config is a TOML document with an `[experiment]` table, an optional
//! `[problem]` table overriding benchmark constants, and one `[[methods]]`
//! entry per regularizer.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rotpc_core::{AdmmConfig, PolynomialFamily, ProblemKind, ProblemSpec, Regularizer, RotationConfig};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default, skip_serializing_if = "ProblemOverrides::is_empty")]
    pub problem: ProblemOverrides,
    pub methods: Vec<MethodConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub problem: String,
    pub basis: String,
    pub dimension: usize,
    pub order: usize,
    /// Sample counts M to sweep.
    pub samples: Vec<usize>,
    /// Number of regression solves per trial; 1 means no rotation.
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    /// Stop rotating once the relative coefficient change drops below this.
    #[serde(default = "default_tol_e")]
    pub tol_e: f64,
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_validation_size")]
    pub validation_size: usize,
    #[serde(default = "default_validation_seed")]
    pub validation_seed: u64,
    /// ADMM iteration cap; defaults to twice the basis size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admm_max_iter: Option<usize>,
    #[serde(default = "default_admm_tol")]
    pub admm_tol: f64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Record wall time per row. Off by default so reruns are byte-identical.
    #[serde(default)]
    pub timing: bool,
    #[serde(default = "default_true")]
    pub coherence: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub panels: Option<usize>,
}

impl ProblemOverrides {
    pub fn is_empty(&self) -> bool {
        *self == ProblemOverrides::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub label: String,
    pub regularizer: String,
    pub lambda: f64,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Per-method override of `experiment.l_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_max: Option<usize>,
}

fn default_l_max() -> usize {
    RotationConfig::default().max_iterations
}
fn default_tol_e() -> f64 {
    RotationConfig::default().tol
}
fn default_validation_size() -> usize {
    rotpc_core::ValidationSet::DEFAULT_SIZE
}
fn default_validation_seed() -> u64 {
    0x5eed
}
fn default_admm_tol() -> f64 {
    AdmmConfig::DEFAULT_TOL
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}
fn default_true() -> bool {
    true
}

impl MethodConfig {
    pub fn regularizer(&self) -> Result<Regularizer> {
        let base: Regularizer = self
            .regularizer
            .parse()
            .map_err(|e| CliError::Config(format!("method '{}': {e}", self.label)))?;
        let reg = match base {
            Regularizer::TransformedL1 { .. } => Regularizer::TransformedL1 {
                gamma: self.gamma.unwrap_or(Regularizer::DEFAULT_GAMMA),
            },
            Regularizer::Erf { .. } => Regularizer::Erf {
                sigma: self.sigma.unwrap_or(Regularizer::DEFAULT_SIGMA),
            },
            other => other,
        };
        reg.validate()?;
        Ok(reg)
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn problem_kind(&self) -> Result<ProblemKind> {
        Ok(self.experiment.problem.parse()?)
    }

    pub fn family(&self) -> Result<PolynomialFamily> {
        Ok(self.experiment.basis.parse()?)
    }

    /// Benchmark constants: defaults for the kind, then the `[problem]` overrides.
    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let mut spec = ProblemSpec::defaults(self.problem_kind()?);
        spec.dimension = self.experiment.dimension;
        let o = &self.problem;
        if let Some(v) = o.sigma {
            spec.sigma = v;
        }
        if let Some(v) = o.correlation_length {
            spec.correlation_length = v;
        }
        if let Some(v) = o.a0 {
            spec.a0 = v;
        }
        if let Some(v) = o.location {
            spec.location = v;
        }
        if let Some(v) = o.time {
            spec.time = v;
        }
        if let Some(v) = o.panels {
            spec.panels = v;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn admm_config(&self, method: &MethodConfig) -> AdmmConfig {
        AdmmConfig {
            lambda: method.lambda,
            rho: method.rho,
            max_iter: self.experiment.admm_max_iter,
            tol: self.experiment.admm_tol,
        }
    }

    pub fn rotation_config(&self, method: &MethodConfig) -> RotationConfig {
        RotationConfig {
            max_iterations: method.l_max.unwrap_or(self.experiment.l_max),
            tol: self.experiment.tol_e,
            ..RotationConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        let fail = |msg: String| Err(CliError::Config(msg));
        self.problem_spec()?;
        self.family()?;
        if e.samples.is_empty() || e.samples.contains(&0) {
            return fail("samples must be a nonempty list of positive counts".into());
        }
        if e.trials == 0 {
            return fail("trials must be positive".into());
        }
        if e.validation_size == 0 {
            return fail("validation_size must be positive".into());
        }
        if e.admm_max_iter == Some(0) {
            return fail("admm_max_iter must be positive".into());
        }
        if self.methods.is_empty() {
            return fail("at least one method is required".into());
        }
        rotpc_core::basis_size(e.dimension, e.order).ok_or_else(|| {
            CliError::Config(format!("basis size for d={}, p={} overflows", e.dimension, e.order))
        })?;
        let mut labels = std::collections::BTreeSet::new();
        for m in &self.methods {
            if !labels.insert(m.label.as_str()) {
                return fail(format!("duplicate method label '{}'", m.label));
            }
            m.regularizer()?;
            self.admm_config(m).validate()?;
            self.rotation_config(m).validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[experiment]
problem = "ridge"
basis = "legendre"
dimension = 4
order = 2
samples = [10]
trials = 1

[[methods]]
label = "l1"
regularizer = "l1"
lambda = 1e-3
rho = 1.0
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.experiment.l_max, 9);
        assert_eq!(cfg.experiment.tol_e, 1e-3);
        assert_eq!(cfg.experiment.validation_size, 100_000);
        assert!(!cfg.experiment.timing);
        assert!(cfg.problem.is_empty());
    }

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            MINIMAL.replace("lambda = 1e-3", "lambda = -1.0"),
            MINIMAL.replace("samples = [10]", "samples = []"),
            MINIMAL.replace("trials = 1", "trials = 0"),
            MINIMAL.replace("\"ridge\"", "\"bogus\""),
            MINIMAL.replace("\"legendre\"", "\"chebyshev\""),
            MINIMAL.replace("regularizer = \"l1\"", "regularizer = \"l0\""),
            MINIMAL.replace("trials = 1", "trials = 1\nunknown_key = 3"),
        ];
        for text in bad {
            assert!(ExperimentConfig::from_toml_str(&text).is_err(), "{text}");
        }
    }

    #[test]
    fn regularizer_parameters() {
        let mut m = MethodConfig {
            label: "tl1".into(),
            regularizer: "tl1".into(),
            lambda: 1.0,
            rho: 1.0,
            gamma: Some(2.5),
            sigma: None,
            l_max: None,
        };
        assert_eq!(m.regularizer().unwrap(), Regularizer::TransformedL1 { gamma: 2.5 });
        m.regularizer = "erf".into();
        assert_eq!(m.regularizer().unwrap(), Regularizer::Erf { sigma: 1.0 });
        m.sigma = Some(-1.0);
        assert!(m.regularizer().is_err());
    }
}

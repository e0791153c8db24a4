use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::circuits::CircuitConfig;
use crate::costmodel::{GradientMethod, Timing};
use crate::error::{Error, Result};
use crate::optimizers::{OptimizerConfig, StopRule};

/// A complete experiment: the cross product of sizes, optimizers and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub sizes: Vec<usize>,
    /// Number of seeds; seeds run from 0 to `seeds - 1`.
    pub seeds: u64,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub model: ModelConfig,
    /// Units of the energy the optimizers see.
    #[serde(default)]
    pub energy_units: EnergyUnits,
    pub circuit: CircuitConfig,
    #[serde(default)]
    pub init: InitInterval,
    #[serde(default)]
    pub stop: StopConfig,
    pub optimizers: Vec<OptimizerConfig>,
    #[serde(default)]
    pub cost: CostConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyUnits {
    /// `E / N`, so gradient size does not grow with the chain.
    #[default]
    PerSite,
    /// `E` as given by the Hamiltonian.
    Total,
}

impl EnergyUnits {
    /// Factor applied to the energy of an `n`-site model.
    pub fn factor(self, n: usize) -> f64 {
        match self {
            Self::PerSite => 1.0 / n as f64,
            Self::Total => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Free-fermion for pure TFIM QAOA, statevector otherwise.
    #[default]
    Auto,
    #[serde(rename = "freefermion")]
    FreeFermion,
    #[serde(rename = "statevector")]
    StateVector,
}

impl Backend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Auto => "auto",
            Self::FreeFermion => "freefermion",
            Self::StateVector => "statevector",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "freefermion" => Ok(Self::FreeFermion),
            "statevector" => Ok(Self::StateVector),
            other => Err(Error::InvalidConfig(format!("unknown backend '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Tfim {
        #[serde(default = "unit")]
        field: f64,
    },
    Xxz {
        #[serde(default = "unit")]
        anisotropy: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn tfim() -> Self {
        Self::Tfim { field: 1.0 }
    }

    pub fn xxz() -> Self {
        Self::Xxz { anisotropy: 1.0 }
    }

    pub fn default_target_delta(&self) -> f64 {
        match self {
            Self::Tfim { .. } => 1e-10,
            Self::Xxz { .. } => 1e-5,
        }
    }

    pub fn default_bases(&self) -> f64 {
        match self {
            Self::Tfim { .. } => 2.0,
            Self::Xxz { .. } => 3.0,
        }
    }
}

/// Initial parameters are drawn i.i.d. uniform from `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitInterval {
    pub low: f64,
    pub high: f64,
}

impl Default for InitInterval {
    fn default() -> Self {
        Self {
            low: 0.0001,
            high: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopConfig {
    /// Defaults to `1e-10` for TFIM and `1e-5` for XXZ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_delta: Option<f64>,
    #[serde(default = "default_max_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_tiny")]
    pub grad_norm: f64,
    #[serde(default = "default_tiny")]
    pub update_norm: f64,
    #[serde(default = "default_patience")]
    pub patience: usize,
}

fn default_max_epochs() -> usize {
    50_000
}

fn default_tiny() -> f64 {
    1e-12
}

fn default_patience() -> usize {
    50
}

impl Default for StopConfig {
    fn default() -> Self {
        Self {
            target_delta: None,
            max_epochs: default_max_epochs(),
            grad_norm: default_tiny(),
            update_norm: default_tiny(),
            patience: default_patience(),
        }
    }
}

impl StopConfig {
    pub fn rules(&self, model: &ModelConfig) -> Vec<StopRule> {
        vec![
            StopRule::TargetDelta {
                delta: self.target_delta.unwrap_or(model.default_target_delta()),
            },
            StopRule::GradNormBelow {
                tol: self.grad_norm,
            },
            StopRule::UpdateNormBelow {
                tol: self.update_norm,
                patience: self.patience,
            },
            StopRule::EpochBudget {
                max_epochs: self.max_epochs,
            },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    #[serde(default = "default_gradient")]
    pub gradient: GradientMethod,
    /// `N_M / N_a`.
    #[serde(default = "default_sample_ratio")]
    pub sample_ratio: f64,
    /// `K_H`; defaults to 2 for TFIM and 3 for XXZ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bases: Option<f64>,
    /// `γ`; measured from each BFGS run when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_search_evals: Option<f64>,
    #[serde(default)]
    pub monitoring: bool,
    #[serde(default = "default_timing")]
    pub timing: Timing,
}

fn default_gradient() -> GradientMethod {
    GradientMethod::Analytic
}

fn default_sample_ratio() -> f64 {
    10.0
}

fn default_timing() -> Timing {
    Timing::Equal
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            gradient: default_gradient(),
            sample_ratio: default_sample_ratio(),
            bases: None,
            line_search_evals: None,
            monitoring: false,
            timing: default_timing(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(Error::InvalidConfig(format!(
                "unknown output format '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    /// Keep per-epoch traces in memory and in the JSON summary.
    #[serde(default)]
    pub keep_traces: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
            keep_traces: false,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: Self = toml::from_str(&text).map_err(|e| Error::format(path, e))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.sizes.is_empty() {
            return bad("at least one system size is required".into());
        }
        if let Some(n) = self.sizes.iter().find(|n| **n < 2 || **n % 2 != 0) {
            return bad(format!("system sizes must be even and at least 2, got {n}"));
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if !(self.init.low > 0.0 && self.init.low < self.init.high && self.init.high.is_finite()) {
            return bad(format!(
                "init interval must satisfy 0 < low < high, got [{}, {}]",
                self.init.low, self.init.high
            ));
        }
        if self.optimizers.is_empty() {
            return bad("at least one optimizer is required".into());
        }
        for o in &self.optimizers {
            o.validate()?;
        }
        if !(self.cost.sample_ratio > 0.0) {
            return bad("cost.sample_ratio must be positive".into());
        }
        self.circuit.check_model(&self.model)?;
        Ok(())
    }

    /// Sorted, deduplicated sizes.
    pub fn sorted_sizes(&self) -> Vec<usize> {
        let mut s = self.sizes.clone();
        s.sort_unstable();
        s.dedup();
        s
    }
}

//! Quantum-runtime cost model for one optimization epoch.
//!
//! Costs are absolute times built from per-circuit time scales
//! `t_x = (d/x) t_gate + t_wrap`; runtime estimates are reported in units of
//! one energy evaluation, `t_eval = N_M K_H t_1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizers::{OptimizerConfig, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    Analytic,
    NumericSymmetric,
    NumericAsymmetric,
    Spsa,
}

impl std::str::FromStr for GradientMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "numeric_sym" | "numeric_symmetric" => Ok(Self::NumericSymmetric),
            "numeric_asym" | "numeric_asymmetric" => Ok(Self::NumericAsymmetric),
            "spsa" => Ok(Self::Spsa),
            other => Err(Error::InvalidConfig(format!(
                "unknown gradient method '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Bfgs,
    Adam,
    #[serde(rename = "natgrad")]
    NatGrad,
}

impl From<&OptimizerConfig> for OptimizerKind {
    fn from(c: &OptimizerConfig) -> Self {
        match c {
            OptimizerConfig::Adam(_) => Self::Adam,
            OptimizerConfig::Bfgs(_) => Self::Bfgs,
            OptimizerConfig::NatGrad(_) => Self::NatGrad,
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bfgs" => Ok(Self::Bfgs),
            "adam" => Ok(Self::Adam),
            "natgrad" => Ok(Self::NatGrad),
            other => Err(Error::InvalidConfig(format!("unknown optimizer '{other}'"))),
        }
    }
}

/// How the three circuit time scales relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    /// `t_1 = t_2 = t_3 = d t_gate + t_wrap`.
    Equal,
    /// `t_x = (d/x) t_gate + t_wrap`.
    DepthScaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostParams {
    /// `N_M`, samples per expectation value.
    pub samples_energy: f64,
    /// `N_a`, samples per metric entry.
    pub samples_metric: f64,
    /// `K_H`, measurement bases of the Hamiltonian.
    pub bases: f64,
    /// `K`, mean Pauli generators per parameter.
    pub generators: f64,
    /// `n`, number of parameters.
    pub params: usize,
    /// `d`, circuit depth.
    pub depth: f64,
    pub t_gate: f64,
    pub t_wrap: f64,
    /// `γ`, energy evaluations per BFGS line search.
    pub line_search_evals: f64,
    pub timing: Timing,
    /// Charge the fixed-step optimizers, ADAM and NatGrad, one extra energy
    /// evaluation per epoch for monitoring. BFGS evaluates energies anyway.
    #[serde(default)]
    pub monitoring: bool,
}

impl CostParams {
    /// `N_M/N_a = 10`, `t_1 = t_2 = t_3`, `K = 1`, `γ = 3`.
    pub fn defaults(params: usize, bases: f64) -> Self {
        Self {
            samples_energy: 1000.0,
            samples_metric: 100.0,
            bases,
            generators: 1.0,
            params,
            depth: params as f64,
            t_gate: 1.0,
            t_wrap: 0.0,
            line_search_evals: 3.0,
            timing: Timing::Equal,
            monitoring: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.samples_energy,
            self.samples_metric,
            self.bases,
            self.generators,
            self.depth,
            self.t_gate,
        ];
        let ok = positive.iter().all(|v| v.is_finite() && *v > 0.0)
            && self.params > 0
            && self.t_wrap.is_finite()
            && self.t_wrap >= 0.0
            && self.line_search_evals.is_finite()
            && self.line_search_evals >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid cost parameters {self:?}"
            )))
        }
    }

    /// Time scale `t_x` for `x ∈ {1, 2, 3}`.
    pub fn time_scale(&self, x: u8) -> f64 {
        let divisor = match self.timing {
            Timing::Equal => 1.0,
            Timing::DepthScaled => f64::from(x),
        };
        self.depth / divisor * self.t_gate + self.t_wrap
    }

    /// `t_eval = N_M K_H t_1`.
    pub fn t_eval(&self) -> f64 {
        self.samples_energy * self.bases * self.time_scale(1)
    }

    fn kn(&self) -> f64 {
        self.generators * self.params as f64
    }
}

pub fn cost_energy(p: &CostParams) -> f64 {
    p.t_eval()
}

pub fn cost_gradient(p: &CostParams, method: GradientMethod) -> f64 {
    let n = p.params as f64;
    let factor = match method {
        GradientMethod::Analytic => p.kn(),
        GradientMethod::NumericSymmetric => 2.0 * n,
        GradientMethod::NumericAsymmetric => n + 1.0,
        GradientMethod::Spsa => 2.0,
    };
    factor * p.t_eval()
}

/// `(Kn)² N_a t_3 + Kn N_a t_2`.
pub fn cost_fubini(p: &CostParams) -> f64 {
    let kn = p.kn();
    kn * kn * p.samples_metric * p.time_scale(3) + kn * p.samples_metric * p.time_scale(2)
}

pub fn cost_epoch(p: &CostParams, optimizer: OptimizerKind, method: GradientMethod) -> f64 {
    let grad = cost_gradient(p, method);
    let monitor = if p.monitoring { p.t_eval() } else { 0.0 };
    match optimizer {
        OptimizerKind::Bfgs => grad + p.line_search_evals * p.t_eval(),
        OptimizerKind::Adam => grad + monitor,
        OptimizerKind::NatGrad => grad + cost_fubini(p) + monitor,
    }
}

/// Estimated runtime of a finished run, in units of `t_eval`.
pub fn estimate_runtime(record: &RunRecord, p: &CostParams, method: GradientMethod) -> f64 {
    let kind = OptimizerKind::from(&record.optimizer);
    record.epochs as f64 * cost_epoch(p, kind, method) / p.t_eval()
}

/// Line-search energy evaluations per epoch observed in a BFGS run: every
/// evaluation after the initial one, minus the gradient at the accepted
/// point. `None` for other optimizers or runs without epochs.
pub fn measured_line_search_evals(record: &RunRecord) -> Option<f64> {
    if !matches!(record.optimizer, OptimizerConfig::Bfgs(_)) || record.epochs == 0 {
        return None;
    }
    let per_epoch = record.evaluations.saturating_sub(1) as f64 / record.epochs as f64;
    Some((per_epoch - 1.0).max(0.0))
}

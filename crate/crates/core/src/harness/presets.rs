use std::f64::consts::PI;

use super::circuits::{CircuitConfig, YLayers, YPreset};
use super::spec::{
    Backend, CostConfig, EnergyUnits, ExperimentSpec, InitInterval, ModelConfig, OutputConfig,
    StopConfig,
};
use crate::error::{Error, Result};
use crate::optimizers::{AdamConfig, BfgsConfig, NatGradConfig, OptimizerConfig};

pub const PRESET_NAMES: [&str; 5] = ["fig1", "fig3-y1", "fig3-y2", "fig5", "appendixB"];

fn bfgs() -> OptimizerConfig {
    OptimizerConfig::Bfgs(BfgsConfig::with_bounds(0.0, 2.0 * PI).expect("valid bounds"))
}

fn adam(lr: f64) -> OptimizerConfig {
    OptimizerConfig::Adam(AdamConfig::new(lr))
}

fn natgrad(lr: f64) -> OptimizerConfig {
    OptimizerConfig::NatGrad(NatGradConfig::new(lr))
}

fn base(
    name: &str,
    sizes: Vec<usize>,
    model: ModelConfig,
    circuit: CircuitConfig,
) -> ExperimentSpec {
    ExperimentSpec {
        name: Some(name.to_string()),
        sizes,
        seeds: 20,
        backend: Backend::Auto,
        workers: 1,
        model,
        energy_units: EnergyUnits::default(),
        circuit,
        init: InitInterval::default(),
        stop: StopConfig::default(),
        optimizers: vec![],
        cost: CostConfig::default(),
        output: OutputConfig::default(),
    }
}

/// Experiment specs reproducing the published figures.
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let spec = match name {
        "fig1" => ExperimentSpec {
            optimizers: vec![adam(0.06), bfgs(), natgrad(0.5)],
            ..base(
                name,
                (8..=40).step_by(4).collect(),
                ModelConfig::tfim(),
                CircuitConfig::qaoa(),
            )
        },
        "fig3-y1" | "fig3-y2" => {
            let layers = if name == "fig3-y1" {
                YPreset::One
            } else {
                YPreset::Two
            };
            ExperimentSpec {
                optimizers: vec![adam(0.02), bfgs(), natgrad(0.05)],
                ..base(
                    name,
                    vec![8, 10, 12],
                    ModelConfig::tfim(),
                    CircuitConfig::qaoa_y(YLayers::Preset(layers)),
                )
            }
        }
        "fig5" => ExperimentSpec {
            optimizers: vec![adam(0.03), bfgs(), natgrad(0.1)],
            ..base(
                name,
                vec![4, 6, 8, 10, 12],
                ModelConfig::xxz(),
                CircuitConfig::xxz(),
            )
        },
        "appendixB" => ExperimentSpec {
            optimizers: [0.01, 0.02, 0.04, 0.06, 0.08]
                .into_iter()
                .map(adam)
                .collect(),
            ..base(
                name,
                (8..=28).step_by(4).collect(),
                ModelConfig::tfim(),
                CircuitConfig::qaoa(),
            )
        },
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset '{other}' (known: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

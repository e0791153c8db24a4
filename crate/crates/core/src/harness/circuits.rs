use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::spec::ModelConfig;
use crate::error::{Error, Result};
use crate::statevector::{CircuitSpec, InitialState, Layer, LayerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitVariant {
    /// `(L_zz, L_x) × N/2` on `|+⟩^⊗N`.
    Qaoa,
    /// QAOA with extra `L_y` layers after selected blocks.
    QaoaY,
    /// `(L_xx, L_yy, L_zz) × N` on the Néel superposition.
    XxzTrotter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YPreset {
    /// One layer after block `⌊N/4⌋`.
    One,
    /// Layers after blocks `⌊N/4⌋` and `⌊N/2⌋ - 1`.
    Two,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum YLayers {
    Preset(YPreset),
    /// Explicit 1-based block positions.
    Positions(Vec<usize>),
}

impl YLayers {
    pub fn positions(&self, qubits: usize) -> Vec<usize> {
        match self {
            Self::Preset(YPreset::One) => vec![qubits / 4],
            Self::Preset(YPreset::Two) => vec![qubits / 4, qubits / 2 - 1],
            Self::Positions(p) => p.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub variant: CircuitVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_layers: Option<YLayers>,
}

impl CircuitConfig {
    pub fn qaoa() -> Self {
        Self {
            variant: CircuitVariant::Qaoa,
            y_layers: None,
        }
    }

    pub fn qaoa_y(layers: YLayers) -> Self {
        Self {
            variant: CircuitVariant::QaoaY,
            y_layers: Some(layers),
        }
    }

    pub fn xxz() -> Self {
        Self {
            variant: CircuitVariant::XxzTrotter,
            y_layers: None,
        }
    }

    pub(crate) fn check_model(&self, model: &ModelConfig) -> Result<()> {
        let ok = matches!(
            (self.variant, model),
            (
                CircuitVariant::Qaoa | CircuitVariant::QaoaY,
                ModelConfig::Tfim { .. }
            ) | (CircuitVariant::XxzTrotter, ModelConfig::Xxz { .. })
        );
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "circuit {:?} does not fit model {model:?}",
                self.variant
            )));
        }
        match (self.variant, &self.y_layers) {
            (CircuitVariant::QaoaY, None) => {
                Err(Error::InvalidConfig("qaoa_y circuits need y_layers".into()))
            }
            (CircuitVariant::Qaoa | CircuitVariant::XxzTrotter, Some(_)) => Err(
                Error::InvalidConfig("y_layers only apply to qaoa_y circuits".into()),
            ),
            _ => Ok(()),
        }
    }

    /// True when the circuit is plain TFIM QAOA, which the free-fermion
    /// backend can simulate.
    pub fn is_pure_qaoa(&self) -> bool {
        self.variant == CircuitVariant::Qaoa
    }
}

fn check_even(qubits: usize) -> Result<()> {
    if qubits < 2 || !qubits.is_multiple_of(2) {
        return Err(Error::InvalidCircuit(format!(
            "circuits need an even qubit count of at least 2, got {qubits}"
        )));
    }
    Ok(())
}

pub fn qaoa_circuit(qubits: usize) -> Result<CircuitSpec> {
    qaoa_y_circuit(qubits, &[])
}

/// QAOA with depth `N/2`; each listed 1-based block position gets an `L_y`
/// layer with its own parameter right after that block. Slots are numbered
/// in layer order.
pub fn qaoa_y_circuit(qubits: usize, positions: &[usize]) -> Result<CircuitSpec> {
    check_even(qubits)?;
    let depth = qubits / 2;
    if let Some(p) = positions.iter().find(|p| **p == 0 || **p > depth) {
        return Err(Error::InvalidCircuit(format!(
            "Y layer position {p} outside 1..={depth}"
        )));
    }
    let mut layers = Vec::new();
    for block in 1..=depth {
        for kind in [LayerKind::ZZ, LayerKind::X] {
            layers.push(Layer {
                kind,
                slot: layers.len(),
            });
        }
        for _ in positions.iter().filter(|p| **p == block) {
            layers.push(Layer {
                kind: LayerKind::Y,
                slot: layers.len(),
            });
        }
    }
    CircuitSpec::new(qubits, InitialState::PlusAll, layers)
}

pub fn xxz_trotter_circuit(qubits: usize) -> Result<CircuitSpec> {
    check_even(qubits)?;
    let mut layers = Vec::with_capacity(3 * qubits);
    for _ in 0..qubits {
        for kind in [LayerKind::XX, LayerKind::YY, LayerKind::ZZ] {
            layers.push(Layer {
                kind,
                slot: layers.len(),
            });
        }
    }
    CircuitSpec::new(qubits, InitialState::NeelSuperposition, layers)
}

pub fn build_circuit(
    model: &ModelConfig,
    circuit: &CircuitConfig,
    qubits: usize,
) -> Result<CircuitSpec> {
    circuit.check_model(model)?;
    match circuit.variant {
        CircuitVariant::Qaoa => qaoa_circuit(qubits),
        CircuitVariant::QaoaY => {
            let y = circuit.y_layers.as_ref().expect("checked above");
            qaoa_y_circuit(qubits, &y.positions(qubits))
        }
        CircuitVariant::XxzTrotter => xxz_trotter_circuit(qubits),
    }
}

/// Largest `|κ|` over the given slots, each reduced to `(-π, π]`. An
/// `L_y(2π)` layer is a global phase, so only the reduced angle matters.
pub fn wrapped_max_abs(params: &[f64], slots: &[usize]) -> f64 {
    slots
        .iter()
        .map(|&s| {
            let r = params[s].rem_euclid(2.0 * PI);
            if r > PI {
                2.0 * PI - r
            } else {
                r
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qaoa_shape() {
        let c = qaoa_circuit(8).unwrap();
        assert_eq!(c.layers().len(), 8);
        assert_eq!(c.num_params(), 8);
        assert_eq!(c.layers()[0].kind, LayerKind::ZZ);
        assert_eq!(c.layers()[1].kind, LayerKind::X);
        assert_eq!(c.initial(), InitialState::PlusAll);
    }

    #[test]
    fn y_layer_after_second_block() {
        let c = qaoa_y_circuit(8, &[2]).unwrap();
        assert_eq!(c.num_params(), 9);
        assert_eq!(c.layers()[4].kind, LayerKind::Y);
        assert_eq!(c.slots_of_kind(LayerKind::Y), vec![4]);
    }

    #[test]
    fn presets_positions() {
        assert_eq!(YLayers::Preset(YPreset::One).positions(8), vec![2]);
        assert_eq!(YLayers::Preset(YPreset::Two).positions(12), vec![3, 5]);
    }

    #[test]
    fn xxz_shape() {
        let c = xxz_trotter_circuit(4).unwrap();
        assert_eq!(c.layers().len(), 12);
        assert_eq!(c.num_params(), 12);
        let kinds: Vec<_> = c.layers()[..3].iter().map(|l| l.kind).collect();
        assert_eq!(kinds, vec![LayerKind::XX, LayerKind::YY, LayerKind::ZZ]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(qaoa_circuit(7).is_err());
        assert!(qaoa_y_circuit(8, &[5]).is_err());
        assert!(qaoa_y_circuit(8, &[0]).is_err());
        let bad = build_circuit(&ModelConfig::xxz(), &CircuitConfig::qaoa(), 4);
        assert!(bad.is_err());
    }

    #[test]
    fn wrapping() {
        let p = [2.0 * PI + 1e-9, -1e-8, 0.5];
        assert!((wrapped_max_abs(&p, &[0, 1]) - 1e-8).abs() < 1e-15);
        assert_eq!(wrapped_max_abs(&p, &[]), 0.0);
        assert!((wrapped_max_abs(&p, &[2]) - 0.5).abs() < 1e-15);
    }
}

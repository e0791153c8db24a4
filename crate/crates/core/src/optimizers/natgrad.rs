use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FubiniMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NatGradConfig {
    pub learning_rate: f64,
    #[serde(default = "default_tikhonov")]
    pub tikhonov: f64,
    #[serde(default)]
    pub metric: MetricNormalization,
}

/// Which multiple of the Fubini-Study metric preconditions the gradient.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricNormalization {
    /// The quantum Fisher information `4F`.
    #[default]
    QuantumFisher,
    /// `F` itself.
    FubiniStudy,
}

impl MetricNormalization {
    pub fn factor(self) -> f64 {
        match self {
            Self::QuantumFisher => 4.0,
            Self::FubiniStudy => 1.0,
        }
    }
}

fn default_tikhonov() -> f64 {
    1e-4
}

impl NatGradConfig {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            tikhonov: default_tikhonov(),
            metric: MetricNormalization::default(),
        }
    }

    pub fn with_tikhonov(self, tikhonov: f64) -> Self {
        Self { tikhonov, ..self }
    }

    pub fn with_metric(self, metric: MetricNormalization) -> Self {
        Self { metric, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.learning_rate > 0.0 && self.tikhonov >= 0.0 && self.tikhonov.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid natural-gradient settings {self:?}"
            )))
        }
    }
}

/// Solves `(sF + ε_T I) x = g`.
pub fn natural_direction(
    metric: &FubiniMatrix,
    scale: f64,
    grad: &[f64],
    tikhonov: f64,
) -> Result<Vec<f64>> {
    let n = grad.len();
    if metric.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: metric.dim(),
        });
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Solve("non-finite gradient".into()));
    }
    let a: DMatrix<f64> = metric.as_matrix() * scale + DMatrix::identity(n, n) * tikhonov;
    let b = DVector::from_column_slice(grad);
    let x = match a.clone().cholesky() {
        Some(ch) => ch.solve(&b),
        None => a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Solve("regularized metric is singular".into()))?,
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solve("non-finite natural-gradient direction".into()));
    }
    Ok(x.iter().copied().collect())
}

/// `θ' = θ - η (sF + ε_T I)^{-1} g` with `s` set by the metric normalization.
pub fn natgrad_step(
    theta: &[f64],
    grad: &[f64],
    metric: &FubiniMatrix,
    config: &NatGradConfig,
) -> Result<Vec<f64>> {
    let x = natural_direction(metric, config.metric.factor(), grad, config.tikhonov)?;
    Ok(theta
        .iter()
        .zip(&x)
        .map(|(t, d)| t - config.learning_rate * d)
        .collect())
}

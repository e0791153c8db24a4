use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_beta1() -> f64 {
    0.9
}

fn default_beta2() -> f64 {
    0.999
}

fn default_epsilon() -> f64 {
    1e-7
}

impl AdamConfig {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: default_beta1(),
            beta2: default_beta2(),
            epsilon: default_epsilon(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.beta1 > 0.0
            && self.beta1 < 1.0
            && self.beta2 > 0.0
            && self.beta2 < 1.0
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid ADAM settings {self:?}"
            )))
        }
    }
}

/// Bias-corrected moment estimates. `m` and `v` hold the corrected values
/// directly, updated with the recursion
/// `m_t = (β - β^t)/(1 - β^t) m_{t-1} + (1 - β)/(1 - β^t) g_t`
/// (and likewise for `v` with `g_t²`).
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u32,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

/// One ADAM update of `theta` in place.
pub fn adam_step(
    config: &AdamConfig,
    state: &mut AdamState,
    theta: &mut [f64],
    grad: &[f64],
) -> Result<()> {
    if grad.len() != theta.len() || state.m.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            actual: grad.len(),
        });
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidConfig("non-finite gradient".into()));
    }
    state.t += 1;
    let t = state.t as i32;
    let b1t = config.beta1.powi(t);
    let b2t = config.beta2.powi(t);
    let (m_keep, m_new) = (
        (config.beta1 - b1t) / (1.0 - b1t),
        (1.0 - config.beta1) / (1.0 - b1t),
    );
    let (v_keep, v_new) = (
        (config.beta2 - b2t) / (1.0 - b2t),
        (1.0 - config.beta2) / (1.0 - b2t),
    );
    for i in 0..theta.len() {
        let g = grad[i];
        state.m[i] = m_keep * state.m[i] + m_new * g;
        state.v[i] = v_keep * state.v[i] + v_new * g * g;
        theta[i] -= config.learning_rate * state.m[i] / (state.v[i].sqrt() + config.epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Textbook ADAM: raw exponential averages, corrected on use.
    struct Reference {
        m: Vec<f64>,
        v: Vec<f64>,
        t: i32,
    }

    impl Reference {
        fn step(&mut self, c: &AdamConfig, theta: &mut [f64], g: &[f64]) {
            self.t += 1;
            for i in 0..theta.len() {
                self.m[i] = c.beta1 * self.m[i] + (1.0 - c.beta1) * g[i];
                self.v[i] = c.beta2 * self.v[i] + (1.0 - c.beta2) * g[i] * g[i];
                let mh = self.m[i] / (1.0 - c.beta1.powi(self.t));
                let vh = self.v[i] / (1.0 - c.beta2.powi(self.t));
                theta[i] -= c.learning_rate * mh / (vh.sqrt() + c.epsilon);
            }
        }
    }

    #[test]
    fn first_step_is_sign_step() {
        let c = AdamConfig::new(0.1);
        let mut s = AdamState::new(3);
        let mut theta = vec![1.0, 2.0, 3.0];
        let g = [0.5, -2.0, 1e-3];
        adam_step(&c, &mut s, &mut theta, &g).unwrap();
        assert_eq!(s.m, g.to_vec());
        for i in 0..3 {
            assert!((s.v[i] - g[i] * g[i]).abs() < 1e-18);
            let expected = [1.0, 2.0, 3.0][i] - 0.1 * g[i] / (g[i].abs() + 1e-7);
            assert!((theta[i] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        let c = AdamConfig::new(0.1);
        let mut s = AdamState::new(2);
        let mut theta = vec![0.3, -0.7];
        for _ in 0..100 {
            adam_step(&c, &mut s, &mut theta, &[0.0, 0.0]).unwrap();
        }
        assert_eq!(theta, vec![0.3, -0.7]);
    }

    #[test]
    fn matches_reference_implementation() {
        let c = AdamConfig::new(0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 5;
        let mut s = AdamState::new(n);
        let mut r = Reference {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        };
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for _ in 0..1000 {
            let g: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            adam_step(&c, &mut s, &mut a, &g).unwrap();
            r.step(&c, &mut b, &g);
        }
        for i in 0..n {
            assert!((a[i] - b[i]).abs() < 1e-12, "{} vs {}", a[i], b[i]);
        }
    }

    #[test]
    fn rejects_non_finite_gradient() {
        let c = AdamConfig::new(0.1);
        let mut s = AdamState::new(1);
        let mut theta = vec![0.0];
        assert!(adam_step(&c, &mut s, &mut theta, &[f64::NAN]).is_err());
        assert_eq!(s.t, 0);
    }

    #[test]
    fn config_validation() {
        assert!(AdamConfig::new(0.1).validate().is_ok());
        assert!(AdamConfig {
            beta1: 1.0,
            ..AdamConfig::new(0.1)
        }
        .validate()
        .is_err());
        assert!(AdamConfig {
            epsilon: 0.0,
            ..AdamConfig::new(0.1)
        }
        .validate()
        .is_err());
    }
}

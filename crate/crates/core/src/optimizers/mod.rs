//! Optimizers and the epoch loop that drives them.
//!
//! An epoch is one parameter update. Epoch 0 is the initial point; every
//! stopping rule is checked after each evaluation.

mod adam;
mod bfgs;
mod natgrad;

use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamConfig, AdamState};
pub use bfgs::{bfgs_step, BfgsConfig, BfgsFailure, BfgsState, BfgsStep, Bounds, Point};
pub use natgrad::{natgrad_step, natural_direction, MetricNormalization, NatGradConfig};

use crate::error::{Error, Result};
use crate::metric::FubiniMatrix;
use crate::models::relative_error;

/// Runs with `δ_min` below this count as successful.
pub const SUCCESS_THRESHOLD: f64 = 1e-3;

/// A differentiable energy landscape over circuit parameters.
pub trait Objective: Sync {
    fn num_params(&self) -> usize;

    fn energy(&self, params: &[f64]) -> f64;

    fn energy_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>);

    /// Fubini-Study metric, for objectives that can provide one.
    fn metric(&self, _params: &[f64]) -> Option<FubiniMatrix> {
        None
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn num_params(&self) -> usize {
        (**self).num_params()
    }

    fn energy(&self, params: &[f64]) -> f64 {
        (**self).energy(params)
    }

    fn energy_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        (**self).energy_and_gradient(params)
    }

    fn metric(&self, params: &[f64]) -> Option<FubiniMatrix> {
        (**self).metric(params)
    }
}

/// An objective with energy and gradient multiplied by a constant factor.
///
/// The metric is a property of the state family and stays as it is. Relative
/// errors against a likewise scaled ground energy are unchanged.
pub struct Scaled<O> {
    pub inner: O,
    pub factor: f64,
}

impl<O: Objective> Objective for Scaled<O> {
    fn num_params(&self) -> usize {
        self.inner.num_params()
    }

    fn energy(&self, params: &[f64]) -> f64 {
        self.inner.energy(params) * self.factor
    }

    fn energy_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let (e, mut g) = self.inner.energy_and_gradient(params);
        g.iter_mut().for_each(|x| *x *= self.factor);
        (e * self.factor, g)
    }

    fn metric(&self, params: &[f64]) -> Option<FubiniMatrix> {
        self.inner.metric(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerConfig {
    Adam(AdamConfig),
    Bfgs(BfgsConfig),
    #[serde(rename = "natgrad")]
    NatGrad(NatGradConfig),
}

impl OptimizerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Adam(_) => "ADAM",
            Self::Bfgs(_) => "BFGS",
            Self::NatGrad(_) => "NatGrad",
        }
    }

    /// Short identifier that also distinguishes learning rates.
    pub fn label(&self) -> String {
        match self {
            Self::Adam(c) => format!("ADAM(lr={})", c.learning_rate),
            Self::Bfgs(_) => "BFGS".to_string(),
            Self::NatGrad(c) => format!("NatGrad(lr={})", c.learning_rate),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Adam(c) => c.validate(),
            Self::Bfgs(c) => c.validate(),
            Self::NatGrad(c) => c.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StopRule {
    /// `δ ≤ delta`.
    TargetDelta { delta: f64 },
    /// Epoch count reaches `max_epochs`.
    EpochBudget { max_epochs: usize },
    /// `‖∇E‖ ≤ tol`.
    GradNormBelow { tol: f64 },
    /// `‖θ_{t+1} - θ_t‖ < tol` for `patience` consecutive epochs.
    UpdateNormBelow { tol: f64, patience: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetDelta,
    EpochBudget,
    GradNormBelow,
    UpdateNormBelow,
    LineSearchFailed,
    NonFinite,
    SolveFailed,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::TargetDelta => "target_delta",
            Self::EpochBudget => "epoch_budget",
            Self::GradNormBelow => "grad_norm_below",
            Self::UpdateNormBelow => "update_norm_below",
            Self::LineSearchFailed => "line_search_failed",
            Self::NonFinite => "non_finite",
            Self::SolveFailed => "solve_failed",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub energy: f64,
    pub delta: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    /// One entry per evaluated epoch, starting with the initial point.
    pub trace: Vec<TracePoint>,
    pub epochs: usize,
    pub delta_min: f64,
    pub termination: Termination,
    pub success: bool,
    pub final_params: Vec<f64>,
    /// Energy-and-gradient evaluations, line-search trials included.
    pub evaluations: usize,
    pub diagnostic: Option<String>,
}

impl RunRecord {
    pub fn drop_trace(&mut self) {
        self.trace = Vec::new();
    }
}

struct Tracker<'a> {
    rules: &'a [StopRule],
    bfgs_tol: Option<f64>,
    trace: Vec<TracePoint>,
    delta_min: f64,
    small_updates: usize,
}

impl Tracker<'_> {
    fn record(&mut self, energy: f64, delta: f64, grad: &[f64]) -> f64 {
        let grad_norm = norm(grad);
        self.trace.push(TracePoint {
            energy,
            delta,
            grad_norm,
        });
        self.delta_min = self.delta_min.min(delta);
        grad_norm
    }

    fn check(
        &mut self,
        epoch: usize,
        delta: f64,
        grad_norm: f64,
        update_norm: Option<f64>,
    ) -> Option<Termination> {
        for rule in self.rules {
            if let StopRule::UpdateNormBelow { tol, .. } = rule {
                if let Some(u) = update_norm {
                    if u < *tol {
                        self.small_updates += 1;
                    } else {
                        self.small_updates = 0;
                    }
                }
            }
        }
        if self.bfgs_tol.is_some_and(|tol| grad_norm <= tol) {
            return Some(Termination::GradNormBelow);
        }
        self.rules.iter().find_map(|rule| match *rule {
            StopRule::TargetDelta { delta: d } if delta <= d => Some(Termination::TargetDelta),
            StopRule::GradNormBelow { tol } if grad_norm <= tol => Some(Termination::GradNormBelow),
            StopRule::UpdateNormBelow { patience, .. }
                if update_norm.is_some() && self.small_updates >= patience.max(1) =>
            {
                Some(Termination::UpdateNormBelow)
            }
            StopRule::EpochBudget { max_epochs } if epoch >= max_epochs => {
                Some(Termination::EpochBudget)
            }
            _ => None,
        })
    }
}

enum Stepper {
    Adam(AdamConfig, AdamState),
    Bfgs(BfgsConfig, BfgsState),
    NatGrad(NatGradConfig),
}

struct Current {
    params: Vec<f64>,
    energy: f64,
    grad: Vec<f64>,
}

impl Stepper {
    fn new(config: &OptimizerConfig, n: usize) -> Self {
        match *config {
            OptimizerConfig::Adam(c) => Self::Adam(c, AdamState::new(n)),
            OptimizerConfig::Bfgs(c) => Self::Bfgs(c, BfgsState::new(n)),
            OptimizerConfig::NatGrad(c) => Self::NatGrad(c),
        }
    }

    /// Advances `cur` by one epoch.
    fn step<O: Objective + ?Sized>(
        &mut self,
        objective: &O,
        cur: &mut Current,
        evaluations: &mut usize,
    ) -> std::result::Result<(), (Termination, String)> {
        let next = match self {
            Self::Adam(c, s) => {
                let mut next = cur.params.clone();
                adam_step(c, s, &mut next, &cur.grad)
                    .map_err(|e| (Termination::NonFinite, e.to_string()))?;
                next
            }
            Self::NatGrad(c) => {
                let metric = objective.metric(&cur.params).ok_or_else(|| {
                    (
                        Termination::SolveFailed,
                        "objective does not provide a metric".to_string(),
                    )
                })?;
                natgrad_step(&cur.params, &cur.grad, &metric, c)
                    .map_err(|e| (Termination::SolveFailed, e.to_string()))?
            }
            Self::Bfgs(c, s) => {
                let here = Point {
                    params: std::mem::take(&mut cur.params),
                    energy: cur.energy,
                    grad: std::mem::take(&mut cur.grad),
                };
                let result = bfgs_step(c, s, objective, &here);
                match result {
                    Ok(step) => {
                        *evaluations += step.evaluations;
                        cur.params = step.point.params;
                        cur.energy = step.point.energy;
                        cur.grad = step.point.grad;
                        return Ok(());
                    }
                    Err(failure) => {
                        cur.params = here.params;
                        cur.grad = here.grad;
                        return Err(match failure {
                            BfgsFailure::LineSearch(m) => (Termination::LineSearchFailed, m),
                            BfgsFailure::NonFinite(m) => (Termination::NonFinite, m),
                        });
                    }
                }
            }
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err((
                Termination::NonFinite,
                "parameters became non-finite".into(),
            ));
        }
        let (energy, grad) = objective.energy_and_gradient(&next);
        *evaluations += 1;
        if !energy.is_finite() || grad.iter().any(|v| !v.is_finite()) {
            return Err((
                Termination::NonFinite,
                "non-finite energy or gradient".into(),
            ));
        }
        *cur = Current {
            params: next,
            energy,
            grad,
        };
        Ok(())
    }
}

/// Optimizes `objective` from `theta0` until a stopping rule fires.
///
/// Only malformed inputs are errors; numerical breakdowns end the run with a
/// matching [`Termination`] and a diagnostic.
pub fn run<O: Objective + ?Sized>(
    objective: &O,
    ground_energy: f64,
    config: &OptimizerConfig,
    stop: &[StopRule],
    theta0: &[f64],
    seed: u64,
) -> Result<RunRecord> {
    config.validate()?;
    if stop.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one stopping rule is required".into(),
        ));
    }
    if theta0.len() != objective.num_params() {
        return Err(Error::DimensionMismatch {
            expected: objective.num_params(),
            actual: theta0.len(),
        });
    }
    relative_error(ground_energy, ground_energy)?;

    let mut tracker = Tracker {
        rules: stop,
        bfgs_tol: match config {
            OptimizerConfig::Bfgs(c) => Some(c.gradient_tolerance),
            _ => None,
        },
        trace: Vec::new(),
        delta_min: f64::INFINITY,
        small_updates: 0,
    };

    let (energy, grad) = objective.energy_and_gradient(theta0);
    let mut evaluations = 1;
    let mut cur = Current {
        params: theta0.to_vec(),
        energy,
        grad,
    };
    let mut epochs = 0;
    let mut diagnostic = None;

    let termination = if !energy.is_finite() || cur.grad.iter().any(|v| !v.is_finite()) {
        diagnostic = Some("non-finite energy or gradient at the initial point".into());
        Termination::NonFinite
    } else {
        let delta = relative_error(energy, ground_energy)?;
        let gn = tracker.record(energy, delta, &cur.grad);
        match tracker.check(0, delta, gn, None) {
            Some(t) => t,
            None => {
                let mut stepper = Stepper::new(config, theta0.len());
                loop {
                    let before = cur.params.clone();
                    if let Err((t, msg)) = stepper.step(objective, &mut cur, &mut evaluations) {
                        diagnostic = Some(msg);
                        break t;
                    }
                    epochs += 1;
                    let delta = relative_error(cur.energy, ground_energy)?;
                    let gn = tracker.record(cur.energy, delta, &cur.grad);
                    let update = before
                        .iter()
                        .zip(&cur.params)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    if let Some(t) = tracker.check(epochs, delta, gn, Some(update)) {
                        break t;
                    }
                }
            }
        }
    };

    let delta_min = tracker.delta_min;
    Ok(RunRecord {
        seed,
        optimizer: *config,
        trace: tracker.trace,
        epochs,
        delta_min,
        termination,
        success: delta_min < SUCCESS_THRESHOLD,
        final_params: cur.params,
        evaluations,
        diagnostic,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

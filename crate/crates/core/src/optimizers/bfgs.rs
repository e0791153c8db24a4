use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::Objective;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_finite() && upper.is_finite() && lower < upper {
            Ok(Self { lower, upper })
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid bounds [{lower}, {upper}]"
            )))
        }
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BfgsConfig {
    #[serde(default)]
    pub bounds: Option<Bounds>,
    #[serde(default = "default_c1")]
    pub c1: f64,
    #[serde(default = "default_c2")]
    pub c2: f64,
    #[serde(default = "default_max_line_search")]
    pub max_line_search: usize,
    #[serde(default = "default_gradient_tolerance")]
    pub gradient_tolerance: f64,
}

fn default_c1() -> f64 {
    1e-4
}

fn default_c2() -> f64 {
    0.9
}

fn default_max_line_search() -> usize {
    25
}

fn default_gradient_tolerance() -> f64 {
    1e-12
}

impl Default for BfgsConfig {
    fn default() -> Self {
        Self {
            bounds: None,
            c1: default_c1(),
            c2: default_c2(),
            max_line_search: default_max_line_search(),
            gradient_tolerance: default_gradient_tolerance(),
        }
    }
}

impl BfgsConfig {
    pub fn with_bounds(lower: f64, upper: f64) -> Result<Self> {
        Ok(Self {
            bounds: Some(Bounds::new(lower, upper)?),
            ..Self::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(b) = self.bounds {
            Bounds::new(b.lower, b.upper)?;
        }
        let ok = 0.0 < self.c1
            && self.c1 < self.c2
            && self.c2 < 1.0
            && self.max_line_search > 0
            && self.gradient_tolerance >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid BFGS settings {self:?}"
            )))
        }
    }
}

/// Quasi-Newton state: the current Hessian approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct BfgsState {
    pub hessian: DMatrix<f64>,
    pub skipped_updates: usize,
}

impl BfgsState {
    pub fn new(n: usize) -> Self {
        Self {
            hessian: DMatrix::identity(n, n),
            skipped_updates: 0,
        }
    }
}

/// A parameter vector with its energy and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub params: Vec<f64>,
    pub energy: f64,
    pub grad: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BfgsFailure {
    LineSearch(String),
    NonFinite(String),
}

#[derive(Debug, Clone)]
pub struct BfgsStep {
    pub point: Point,
    pub evaluations: usize,
    pub step_length: f64,
}

/// One BFGS epoch: direction from the Hessian approximation, a strong-Wolfe
/// line search, then the rank-two update.
pub fn bfgs_step<O: Objective + ?Sized>(
    config: &BfgsConfig,
    state: &mut BfgsState,
    objective: &O,
    current: &Point,
) -> std::result::Result<BfgsStep, BfgsFailure> {
    let n = current.params.len();
    let g = DVector::from_column_slice(&current.grad);

    let mut dir = newton_direction(&state.hessian, &g);
    let mut line = Line::new(config.bounds, current, dir.as_slice());
    if !(line.slope0 < 0.0) {
        state.hessian = DMatrix::identity(n, n);
        dir = -&g;
        line = Line::new(config.bounds, current, dir.as_slice());
        if !(line.slope0 < 0.0) {
            return Err(BfgsFailure::LineSearch(
                "no feasible descent direction".into(),
            ));
        }
    }

    let mut evaluations = 0;
    let accepted = line_search(config, objective, &line, &mut evaluations)?;
    let accepted = polish(config, objective, &line, accepted, &mut evaluations);

    let s = DVector::from_iterator(
        n,
        accepted
            .point
            .params
            .iter()
            .zip(&current.params)
            .map(|(a, b)| a - b),
    );
    let y = DVector::from_iterator(
        n,
        accepted
            .point
            .grad
            .iter()
            .zip(&current.grad)
            .map(|(a, b)| a - b),
    );
    let sy = s.dot(&y);
    let bs = &state.hessian * &s;
    let sbs = s.dot(&bs);
    if sy > 0.0 && sbs > 0.0 && sy.is_finite() {
        state.hessian += (&y * y.transpose()) / sy - (&bs * bs.transpose()) / sbs;
    } else {
        state.skipped_updates += 1;
    }

    Ok(BfgsStep {
        point: accepted.point,
        evaluations,
        step_length: accepted.alpha,
    })
}

fn newton_direction(b: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    match b.clone().cholesky() {
        Some(ch) => -ch.solve(g),
        None => DVector::from_element(g.len(), f64::NAN),
    }
}

/// The search path `α ↦ P(θ + α d)`, with `P` the clip onto the box.
struct Line<'a> {
    bounds: Option<Bounds>,
    origin: &'a Point,
    dir: Vec<f64>,
    slope0: f64,
}

impl<'a> Line<'a> {
    fn new(bounds: Option<Bounds>, origin: &'a Point, dir: &[f64]) -> Self {
        let mut line = Self {
            bounds,
            origin,
            dir: dir.to_vec(),
            slope0: f64::NAN,
        };
        // Directions pushing against an active bound contribute nothing.
        let active = line.active_direction(f64::MIN_POSITIVE);
        line.slope0 = dot(&origin.grad, &active);
        line
    }

    fn position(&self, alpha: f64) -> Vec<f64> {
        self.origin
            .params
            .iter()
            .zip(&self.dir)
            .map(|(x, d)| {
                let v = x + alpha * d;
                match self.bounds {
                    Some(b) => b.clip(v),
                    None => v,
                }
            })
            .collect()
    }

    /// Components of `d` that still move the clipped point at step `alpha`.
    fn active_direction(&self, alpha: f64) -> Vec<f64> {
        let Some(b) = self.bounds else {
            return self.dir.clone();
        };
        self.origin
            .params
            .iter()
            .zip(&self.dir)
            .map(|(x, d)| {
                let v = x + alpha * d;
                if (v <= b.lower && *d < 0.0) || (v >= b.upper && *d > 0.0) {
                    0.0
                } else {
                    *d
                }
            })
            .collect()
    }

    fn eval<O: Objective + ?Sized>(
        &self,
        objective: &O,
        alpha: f64,
        evaluations: &mut usize,
    ) -> std::result::Result<Trial, BfgsFailure> {
        let params = self.position(alpha);
        let (energy, grad) = objective.energy_and_gradient(&params);
        *evaluations += 1;
        if !energy.is_finite() || grad.iter().any(|v| !v.is_finite()) {
            return Err(BfgsFailure::NonFinite(format!(
                "objective returned non-finite values at step {alpha}"
            )));
        }
        let slope = dot(&grad, &self.active_direction(alpha));
        Ok(Trial {
            alpha,
            point: Point {
                params,
                energy,
                grad,
            },
            slope,
        })
    }
}

#[derive(Debug, Clone)]
struct Trial {
    alpha: f64,
    point: Point,
    slope: f64,
}

impl Trial {
    fn value(&self) -> f64 {
        self.point.energy
    }
}

fn armijo(config: &BfgsConfig, line: &Line, t: &Trial) -> bool {
    t.value() <= line.origin.energy + config.c1 * t.alpha * line.slope0
}

fn curvature(config: &BfgsConfig, line: &Line, t: &Trial) -> bool {
    t.slope.abs() <= -config.c2 * line.slope0
}

/// Bracketing phase followed by zoom, with cubic interpolation.
fn line_search<O: Objective + ?Sized>(
    config: &BfgsConfig,
    objective: &O,
    line: &Line,
    evaluations: &mut usize,
) -> std::result::Result<Trial, BfgsFailure> {
    let origin = Trial {
        alpha: 0.0,
        point: line.origin.clone(),
        slope: line.slope0,
    };
    let mut budget = config.max_line_search;
    let mut best: Option<Trial> = None;
    let keep_best = |t: &Trial, best: &mut Option<Trial>| {
        if armijo(config, line, t) && best.as_ref().is_none_or(|b| t.value() < b.value()) {
            *best = Some(t.clone());
        }
    };

    let mut prev = origin;
    let mut alpha = 1.0;
    let mut first = true;
    let bracket = loop {
        if budget == 0 {
            break None;
        }
        budget -= 1;
        let t = line.eval(objective, alpha, evaluations)?;
        keep_best(&t, &mut best);
        if !armijo(config, line, &t) || (!first && t.value() >= prev.value()) {
            break Some((prev, t));
        }
        if curvature(config, line, &t) {
            return Ok(t);
        }
        if t.slope >= 0.0 {
            break Some((t, prev));
        }
        // Still descending: extrapolate.
        let next = cubic_minimizer(&prev, &t)
            .filter(|a| *a > t.alpha * 1.1 && *a < t.alpha * 10.0)
            .unwrap_or(t.alpha * 2.0);
        prev = t;
        alpha = next;
        first = false;
    };

    if let Some((mut lo, mut hi)) = bracket {
        while budget > 0 {
            budget -= 1;
            let a = interpolate(&lo, &hi);
            if a == lo.alpha || a == hi.alpha {
                break;
            }
            let t = line.eval(objective, a, evaluations)?;
            keep_best(&t, &mut best);
            if !armijo(config, line, &t) || t.value() >= lo.value() {
                hi = t;
            } else {
                if curvature(config, line, &t) {
                    return Ok(t);
                }
                if t.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = t;
            }
        }
    }

    // No strong-Wolfe point found; settle for sufficient decrease if any.
    best.ok_or_else(|| {
        BfgsFailure::LineSearch(format!(
            "no sufficient decrease within {} trials",
            config.max_line_search
        ))
    })
}

/// Trial step inside the bracket, falling back to bisection when the cubic
/// model misbehaves.
fn interpolate(lo: &Trial, hi: &Trial) -> f64 {
    let (a, b) = if lo.alpha < hi.alpha {
        (lo.alpha, hi.alpha)
    } else {
        (hi.alpha, lo.alpha)
    };
    let width = b - a;
    let margin = 1e-6 * width;
    match cubic_minimizer(lo, hi) {
        Some(x) if x > a + margin && x < b - margin => x,
        _ => a + 0.5 * width,
    }
}

/// Minimizer of the cubic matching values and slopes at two trials.
fn cubic_minimizer(p: &Trial, q: &Trial) -> Option<f64> {
    let (a, fa, da) = (p.alpha, p.value(), p.slope);
    let (b, fb, db) = (q.alpha, q.value(), q.slope);
    if a == b {
        return None;
    }
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = db - da + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let x = b - (b - a) * (db + d2 - d1) / denom;
    x.is_finite().then_some(x)
}

/// Re-evaluate at the cubic minimizer through the origin and the accepted
/// point; keep it only when it is lower and still satisfies strong Wolfe.
/// On a quadratic this makes the step exact.
fn polish<O: Objective + ?Sized>(
    config: &BfgsConfig,
    objective: &O,
    line: &Line,
    accepted: Trial,
    evaluations: &mut usize,
) -> Trial {
    if accepted.slope.abs() <= 1e-12 * line.slope0.abs() {
        return accepted;
    }
    let origin = Trial {
        alpha: 0.0,
        point: line.origin.clone(),
        slope: line.slope0,
    };
    let Some(a) = cubic_minimizer(&origin, &accepted) else {
        return accepted;
    };
    if !(a > 0.0) || (a - accepted.alpha).abs() <= 1e-10 * accepted.alpha {
        return accepted;
    }
    match line.eval(objective, a, evaluations) {
        Ok(t)
            if t.value() < accepted.value()
                && armijo(config, line, &t)
                && curvature(config, line, &t) =>
        {
            t
        }
        _ => accepted,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use vqebench::metric::FubiniMatrix;
use vqebench::models::PauliHamiltonian;
use vqebench::optimizers::Objective;
use vqebench::statevector::{self, CircuitSpec};

fn rotate(x: usize, j: usize, n: usize) -> usize {
    let mask = (1 << n) - 1;
    if j == 0 {
        x
    } else {
        ((x << j) | (x >> (n - j))) & mask
    }
}

/// `(representative, shift)` with `rotate(representative, shift) == x`.
fn representative(x: usize, n: usize) -> (usize, usize) {
    (0..n)
        .map(|j| (rotate(x, j, n), (n - j) % n))
        .min_by_key(|(r, _)| *r)
        .unwrap()
}

fn period(r: usize, n: usize) -> usize {
    (1..=n).find(|&j| rotate(r, j, n) == r).unwrap()
}

/// Ground energy of `-Σ Z_k Z_{k+1} - t Σ X_k` on a periodic chain by dense
/// diagonalization of every momentum block.
pub fn tfim_ground_by_momentum_blocks(n: usize, t: f64) -> f64 {
    let dim = 1usize << n;
    let reps: Vec<(usize, usize)> = (0..dim)
        .filter(|&x| representative(x, n).0 == x)
        .map(|r| (r, period(r, n)))
        .collect();
    let zz = |x: usize| -> f64 {
        (0..n)
            .map(|k| {
                let a = (x >> k) & 1;
                let b = (x >> ((k + 1) % n)) & 1;
                if a == b {
                    -1.0
                } else {
                    1.0
                }
            })
            .sum()
    };
    let mut best = f64::INFINITY;
    for m in 0..n {
        let k = 2.0 * PI * m as f64 / n as f64;
        let sector: Vec<(usize, usize)> = reps
            .iter()
            .copied()
            .filter(|(_, period)| (m * period) % n == 0)
            .collect();
        if sector.is_empty() {
            continue;
        }
        let index = |r: usize| sector.iter().position(|(s, _)| *s == r);
        let mut h = DMatrix::<Complex64>::zeros(sector.len(), sector.len());
        for (a, &(r, ra)) in sector.iter().enumerate() {
            h[(a, a)] += Complex64::new(zz(r), 0.0);
            for site in 0..n {
                let (s, shift) = representative(r ^ (1 << site), n);
                if let Some(b) = index(s) {
                    let rb = sector[b].1;
                    let amp = -t * (ra as f64 / rb as f64).sqrt();
                    h[(b, a)] += Complex64::from_polar(amp, k * shift as f64);
                }
            }
        }
        let e = SymmetricEigen::new(h).eigenvalues.min();
        best = best.min(e);
    }
    best
}

/// Smallest eigenvalue of the full Hamiltonian matrix, built entry by entry
/// from Pauli algebra.
pub fn dense_ground(h: &PauliHamiltonian) -> f64 {
    let m = h.to_dense();
    SymmetricEigen::new(m).eigenvalues.min()
}

/// Textbook ADAM with explicit bias correction of the raw moments.
pub struct ReferenceAdam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl ReferenceAdam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-7,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, theta: &mut [f64], g: &[f64]) {
        self.t += 1;
        for i in 0..theta.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g[i] * g[i];
            let m_hat = self.m[i] / (1.0 - self.beta1.powi(self.t));
            let v_hat = self.v[i] / (1.0 - self.beta2.powi(self.t));
            theta[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Energy through the term-by-term Hamiltonian expectation.
pub fn reference_energy(circuit: &CircuitSpec, h: &PauliHamiltonian, theta: &[f64]) -> f64 {
    let psi = statevector::run_circuit(circuit, theta).unwrap();
    statevector::energy(&psi, h).unwrap()
}

pub fn central_gradient(
    circuit: &CircuitSpec,
    h: &PauliHamiltonian,
    theta: &[f64],
    step: f64,
) -> Vec<f64> {
    (0..theta.len())
        .map(|i| {
            let mut plus = theta.to_vec();
            let mut minus = theta.to_vec();
            plus[i] += step;
            minus[i] -= step;
            (reference_energy(circuit, h, &plus) - reference_energy(circuit, h, &minus))
                / (2.0 * step)
        })
        .collect()
}

/// Metric from state overlaps: `1 - |⟨ψ(θ)|ψ(θ + εv)⟩|² = ε² vᵀFv + O(ε³)`.
/// Averaging `±ε` removes the odd orders and combining `ε = h` with
/// `ε = 2h` removes the `ε⁴` term, leaving an `O(h⁴)` error.
pub fn overlap_metric(circuit: &CircuitSpec, theta: &[f64], step: f64) -> FubiniMatrix {
    let n = theta.len();
    let psi = statevector::run_circuit(circuit, theta).unwrap();
    let quadratic_form = |v: &[f64], eps: f64| -> f64 {
        let mut total = 0.0;
        for sign in [1.0, -1.0] {
            let shifted: Vec<f64> = theta
                .iter()
                .zip(v)
                .map(|(t, d)| t + sign * eps * d)
                .collect();
            let phi = statevector::run_circuit(circuit, &shifted).unwrap();
            total += 1.0 - psi.inner(&phi).norm_sqr();
        }
        total / (2.0 * eps * eps)
    };
    let infidelity =
        |v: &[f64]| (4.0 * quadratic_form(v, step) - quadratic_form(v, 2.0 * step)) / 3.0;
    let unit = |i: usize, j: usize, sj: f64| {
        let mut v = vec![0.0; n];
        v[i] += 1.0;
        v[j] += sj;
        v
    };
    let mut f = DMatrix::zeros(n, n);
    for i in 0..n {
        f[(i, i)] = infidelity(&unit(i, i, 0.0));
        for j in 0..i {
            let v = (infidelity(&unit(i, j, 1.0)) - infidelity(&unit(i, j, -1.0))) / 4.0;
            f[(i, j)] = v;
            f[(j, i)] = v;
        }
    }
    FubiniMatrix::new(f)
}

/// Random symmetric positive definite matrix with eigenvalues in `[0.5, 5]`.
pub fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = a.qr().q();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        rng.random_range(0.5..5.0)
    }));
    let m = &q * d * q.transpose();
    (&m + m.transpose()) * 0.5
}

/// `E(x) = ½ (x - c)ᵀ A (x - c)`.
pub struct Quadratic {
    pub a: DMatrix<f64>,
    pub center: Vec<f64>,
}

impl Objective for Quadratic {
    fn num_params(&self) -> usize {
        self.center.len()
    }

    fn energy(&self, p: &[f64]) -> f64 {
        self.energy_and_gradient(p).0
    }

    fn energy_and_gradient(&self, p: &[f64]) -> (f64, Vec<f64>) {
        let d = nalgebra::DVector::from_iterator(
            p.len(),
            p.iter().zip(&self.center).map(|(x, c)| x - c),
        );
        let g = &self.a * &d;
        (0.5 * d.dot(&g), g.iter().copied().collect())
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

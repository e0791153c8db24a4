//! Dense statevector simulation of circuits built from translationally
//! invariant rotation layers on a periodic chain.
//!
//! A layer of kind `P` with angle `θ` applies `Π_k exp[-i(θ/2) G_k]` where
//! `G_k` is `P_k` for single-qubit kinds and `P_k P_{k+1}` for two-qubit kinds
//! (site `N` wraps to `0`). All gates within a layer commute, so the layer
//! derivative is `(-i/2) G · L(θ)` with `G = Σ_k G_k`.
//!
//! Amplitudes are indexed so that qubit `k` is bit `k` of the index.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::metric::FubiniMatrix;
use crate::models::{PauliHamiltonian, SparsePauli};
use crate::optimizers::Objective;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 20;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const NEG_HALF_I: Complex64 = Complex64::new(0.0, -0.5);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        check_capacity(qubits)?;
        let mut amplitudes = vec![ZERO; 1 << qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { qubits, amplitudes })
    }

    pub fn from_amplitudes(qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_capacity(qubits)?;
        if amplitudes.len() != 1 << qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << qubits,
                actual: amplitudes.len(),
            });
        }
        Ok(Self { qubits, amplitudes })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        dot(&self.amplitudes, &other.amplitudes)
    }
}

fn check_capacity(qubits: usize) -> Result<()> {
    if qubits == 0 || qubits > MAX_QUBITS {
        return Err(Error::Capacity {
            what: "statevector simulator",
            qubits,
            capacity: MAX_QUBITS,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerKind {
    ZZ,
    X,
    Y,
    XX,
    YY,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialState {
    /// `|+⟩^⊗N`, the ground state of `-Σ X_k`.
    PlusAll,
    /// `(|01…01⟩ ± |10…10⟩)/√2` with `+` for `N mod 4 = 0` and `-` for
    /// `N mod 4 = 2`.
    NeelSuperposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub kind: LayerKind,
    pub slot: usize,
}

/// Ordered list of layers (first entry is applied first) acting on an
/// initial state. Layers reference parameter slots; a slot may drive several
/// layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    qubits: usize,
    initial: InitialState,
    layers: Vec<Layer>,
    params: usize,
}

impl CircuitSpec {
    pub fn new(qubits: usize, initial: InitialState, layers: Vec<Layer>) -> Result<Self> {
        check_capacity(qubits)?;
        if initial == InitialState::NeelSuperposition && !qubits.is_multiple_of(2) {
            return Err(Error::InvalidCircuit(format!(
                "Néel initial state needs an even qubit count, got {qubits}"
            )));
        }
        let params = layers.iter().map(|l| l.slot + 1).max().unwrap_or(0);
        let mut used = vec![false; params];
        for l in &layers {
            used[l.slot] = true;
        }
        if let Some(missing) = used.iter().position(|u| !u) {
            return Err(Error::InvalidCircuit(format!(
                "parameter slot {missing} is not bound to any layer"
            )));
        }
        Ok(Self {
            qubits,
            initial,
            layers,
            params,
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn initial(&self) -> InitialState {
        self.initial
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn num_params(&self) -> usize {
        self.params
    }

    /// Slots driving at least one layer of the given kind.
    pub fn slots_of_kind(&self, kind: LayerKind) -> Vec<usize> {
        let mut slots: Vec<usize> = self
            .layers
            .iter()
            .filter(|l| l.kind == kind)
            .map(|l| l.slot)
            .collect();
        slots.sort_unstable();
        slots.dedup();
        slots
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.params {
            return Err(Error::DimensionMismatch {
                expected: self.params,
                actual: theta.len(),
            });
        }
        Ok(())
    }
}

pub fn prepare(circuit: &CircuitSpec) -> Result<StateVector> {
    let n = circuit.qubits;
    check_capacity(n)?;
    let dim = 1usize << n;
    match circuit.initial {
        InitialState::PlusAll => {
            let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
            Ok(StateVector {
                qubits: n,
                amplitudes: vec![a; dim],
            })
        }
        InitialState::NeelSuperposition => {
            if !n.is_multiple_of(2) {
                return Err(Error::InvalidCircuit(
                    "Néel initial state needs an even qubit count".into(),
                ));
            }
            // |01 01 …⟩: odd qubits set. |10 10 …⟩: even qubits set.
            let odd: usize = (0..n).filter(|k| k % 2 == 1).map(|k| 1 << k).sum();
            let even: usize = (0..n).filter(|k| k % 2 == 0).map(|k| 1 << k).sum();
            let sign = if n.is_multiple_of(4) { 1.0 } else { -1.0 };
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut amplitudes = vec![ZERO; dim];
            amplitudes[odd] = Complex64::new(h, 0.0);
            amplitudes[even] = Complex64::new(sign * h, 0.0);
            Ok(StateVector {
                qubits: n,
                amplitudes,
            })
        }
    }
}

/// Applies one layer in place.
pub fn apply_layer(state: &mut StateVector, kind: LayerKind, angle: f64) {
    let n = state.qubits;
    let (s, c) = (angle / 2.0).sin_cos();
    let amps = &mut state.amplitudes;
    match kind {
        LayerKind::ZZ => {
            let phases: Vec<Complex64> = (0..=n)
                .map(|d| {
                    let eig = n as f64 - 2.0 * d as f64;
                    Complex64::from_polar(1.0, -angle / 2.0 * eig)
                })
                .collect();
            for (x, a) in amps.iter_mut().enumerate() {
                *a *= phases[domain_walls(x, n)];
            }
        }
        LayerKind::X => {
            for k in 0..n {
                for_each_pair(amps, 1 << k, |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = Complex64::new(c * x0.re + s * x1.im, c * x0.im - s * x1.re);
                    *a1 = Complex64::new(c * x1.re + s * x0.im, c * x1.im - s * x0.re);
                });
            }
        }
        LayerKind::Y => {
            for k in 0..n {
                for_each_pair(amps, 1 << k, |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = c * x0 - s * x1;
                    *a1 = s * x0 + c * x1;
                });
            }
        }
        LayerKind::XX | LayerKind::YY => {
            let yy = kind == LayerKind::YY;
            for k in 0..n {
                let (lo, hi) = bond_bits(k, n);
                let mask = lo | hi;
                for x in (0..amps.len()).filter(|x| x & lo == 0) {
                    let y = x ^ mask;
                    // YY|b b'⟩ = -|¬b ¬b'⟩ for equal bits, +|¬b ¬b'⟩ otherwise.
                    let ss = if yy && same_bits(x, lo, hi) { -s } else { s };
                    let (ax, ay) = (amps[x], amps[y]);
                    amps[x] = Complex64::new(c * ax.re + ss * ay.im, c * ax.im - ss * ay.re);
                    amps[y] = Complex64::new(c * ay.re + ss * ax.im, c * ay.im - ss * ax.re);
                }
            }
        }
    }
}

/// `out = G · input` where `G` is the summed generator of a layer.
fn apply_generator(kind: LayerKind, n: usize, input: &[Complex64], out: &mut [Complex64]) {
    match kind {
        LayerKind::ZZ => {
            for (x, (o, a)) in out.iter_mut().zip(input).enumerate() {
                *o = a * (n as f64 - 2.0 * domain_walls(x, n) as f64);
            }
        }
        LayerKind::X | LayerKind::Y => {
            out.iter_mut().for_each(|z| *z = ZERO);
            let i = Complex64::new(0.0, 1.0);
            for k in 0..n {
                let bit = 1 << k;
                for x in 0..input.len() {
                    let from = input[x ^ bit];
                    out[x] += if kind == LayerKind::X {
                        from
                    } else if x & bit != 0 {
                        // Y|0⟩ = i|1⟩
                        i * from
                    } else {
                        // Y|1⟩ = -i|0⟩
                        -i * from
                    };
                }
            }
        }
        LayerKind::XX | LayerKind::YY => {
            out.iter_mut().for_each(|z| *z = ZERO);
            for k in 0..n {
                let (lo, hi) = bond_bits(k, n);
                let mask = lo | hi;
                for x in 0..input.len() {
                    let from = input[x ^ mask];
                    if kind == LayerKind::YY && same_bits(x, lo, hi) {
                        out[x] -= from;
                    } else {
                        out[x] += from;
                    }
                }
            }
        }
    }
}

/// `⟨bra|G|ket⟩` for the summed generator of a layer.
fn generator_overlap(kind: LayerKind, n: usize, bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    match kind {
        LayerKind::ZZ => bra
            .iter()
            .zip(ket)
            .enumerate()
            .map(|(x, (b, a))| b.conj() * a * (n as f64 - 2.0 * domain_walls(x, n) as f64))
            .sum(),
        LayerKind::X => (0..n)
            .map(|k| {
                let bit = 1 << k;
                bra.iter()
                    .enumerate()
                    .map(|(x, b)| b.conj() * ket[x ^ bit])
                    .sum::<Complex64>()
            })
            .sum(),
        LayerKind::Y => {
            // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩.
            let total: Complex64 = (0..n)
                .map(|k| {
                    let bit = 1 << k;
                    bra.iter()
                        .enumerate()
                        .map(|(x, b)| {
                            let v = b.conj() * ket[x ^ bit];
                            if x & bit != 0 {
                                v
                            } else {
                                -v
                            }
                        })
                        .sum::<Complex64>()
                })
                .sum();
            total * Complex64::new(0.0, 1.0)
        }
        LayerKind::XX | LayerKind::YY => (0..n)
            .map(|k| {
                let (lo, hi) = bond_bits(k, n);
                let mask = lo | hi;
                bra.iter()
                    .enumerate()
                    .map(|(x, b)| {
                        let v = b.conj() * ket[x ^ mask];
                        if kind == LayerKind::YY && same_bits(x, lo, hi) {
                            -v
                        } else {
                            v
                        }
                    })
                    .sum::<Complex64>()
            })
            .sum(),
    }
}

/// Bits of bond `(k, k+1 mod n)`.
fn bond_bits(k: usize, n: usize) -> (usize, usize) {
    (1 << k, 1 << ((k + 1) % n))
}

fn same_bits(x: usize, a: usize, b: usize) -> bool {
    (x & a == 0) == (x & b == 0)
}

/// Number of anti-aligned bonds of basis state `x` on the periodic chain.
/// `Σ_k Z_k Z_{k+1} |x⟩ = (n - 2·domain_walls) |x⟩`.
fn domain_walls(x: usize, n: usize) -> usize {
    let rotated = (x >> 1) | ((x & 1) << (n - 1));
    (x ^ rotated).count_ones() as usize
}

/// Calls `f(a[x], a[x | bit])` for every `x` with `bit` clear.
fn for_each_pair(
    amps: &mut [Complex64],
    bit: usize,
    mut f: impl FnMut(&mut Complex64, &mut Complex64),
) {
    for chunk in amps.chunks_exact_mut(2 * bit) {
        let (lo, hi) = chunk.split_at_mut(bit);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a0, a1);
        }
    }
}

/// `⟨ψ|H|ψ⟩`.
pub fn energy(state: &StateVector, h: &PauliHamiltonian) -> Result<f64> {
    if h.qubits() != state.qubits {
        return Err(Error::DimensionMismatch {
            expected: state.qubits,
            actual: h.qubits(),
        });
    }
    let amps = &state.amplitudes;
    let mut total = ZERO;
    for term in h.terms() {
        let m = term.word.masks();
        let mut acc = ZERO;
        for (x, a) in amps.iter().enumerate() {
            let sign = if (x as u64 & m.sign).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            acc += amps[x ^ m.flip as usize].conj() * a * sign;
        }
        total += acc * crate::models::i_pow(m.y_count) * term.coefficient;
    }
    let scale = total.re.abs().max(1.0);
    debug_assert!(
        total.im.abs() <= 1e-12 * scale,
        "energy has imaginary part {}",
        total.im
    );
    Ok(total.re)
}

pub fn run_circuit(circuit: &CircuitSpec, theta: &[f64]) -> Result<StateVector> {
    circuit.check_params(theta)?;
    let mut state = prepare(circuit)?;
    for layer in &circuit.layers {
        apply_layer(&mut state, layer.kind, theta[layer.slot]);
    }
    Ok(state)
}

/// Energy and its exact gradient via a reverse sweep through the circuit.
pub fn energy_and_gradient(
    circuit: &CircuitSpec,
    theta: &[f64],
    h: &PauliHamiltonian,
) -> Result<(f64, Vec<f64>)> {
    if h.qubits() != circuit.qubits {
        return Err(Error::DimensionMismatch {
            expected: circuit.qubits,
            actual: h.qubits(),
        });
    }
    adjoint(circuit, theta, &SparsePauli::new(h))
}

/// Forward states are cached for the reverse sweep up to this many amplitudes
/// in total; beyond it they are recomputed by undoing layers.
const ADJOINT_CACHE_AMPLITUDES: usize = 1 << 22;

fn adjoint(circuit: &CircuitSpec, theta: &[f64], h: &SparsePauli) -> Result<(f64, Vec<f64>)> {
    let amplitudes = circuit.layers.len().saturating_mul(1 << circuit.qubits);
    adjoint_sweep(circuit, theta, h, amplitudes <= ADJOINT_CACHE_AMPLITUDES)
}

fn adjoint_sweep(
    circuit: &CircuitSpec,
    theta: &[f64],
    h: &SparsePauli,
    cache: bool,
) -> Result<(f64, Vec<f64>)> {
    circuit.check_params(theta)?;
    let n = circuit.qubits;
    let layers = &circuit.layers;
    let mut phi = prepare(circuit)?;
    let dim = phi.amplitudes.len();
    let mut forward: Vec<Vec<Complex64>> = Vec::new();
    for layer in layers {
        apply_layer(&mut phi, layer.kind, theta[layer.slot]);
        if cache {
            forward.push(phi.amplitudes.clone());
        }
    }
    let mut lambda = StateVector {
        qubits: n,
        amplitudes: vec![ZERO; dim],
    };
    h.apply(&phi.amplitudes, &mut lambda.amplitudes);
    let e = dot(&phi.amplitudes, &lambda.amplitudes).re;

    let mut grad = vec![0.0; circuit.params];
    for (l, layer) in layers.iter().enumerate().rev() {
        // dE/dθ = 2 Re⟨λ|(-i/2) G|φ⟩ = Im⟨λ|G|φ⟩ with φ the state just after
        // this layer and λ = (later layers)† H ψ.
        let after = if cache { &forward[l] } else { &phi.amplitudes };
        grad[layer.slot] += generator_overlap(layer.kind, n, &lambda.amplitudes, after).im;
        if l > 0 {
            apply_layer(&mut lambda, layer.kind, -theta[layer.slot]);
            if !cache {
                apply_layer(&mut phi, layer.kind, -theta[layer.slot]);
            }
        }
    }
    Ok((e, grad))
}

pub fn gradient(circuit: &CircuitSpec, theta: &[f64], h: &PauliHamiltonian) -> Result<Vec<f64>> {
    energy_and_gradient(circuit, theta, h).map(|(_, g)| g)
}

/// `|∂_j ψ⟩` for every parameter slot `j` (unnormalized).
pub fn derivative_states(circuit: &CircuitSpec, theta: &[f64]) -> Result<Vec<StateVector>> {
    circuit.check_params(theta)?;
    let n = circuit.qubits;
    let dim = 1usize << n;
    let storage = circuit.params.saturating_mul(dim);
    if storage > (1 << 26) {
        return Err(Error::Capacity {
            what: "derivative-state storage",
            qubits: n,
            capacity: MAX_QUBITS,
        });
    }
    let mut derivs = vec![
        StateVector {
            qubits: n,
            amplitudes: vec![ZERO; dim],
        };
        circuit.params
    ];
    let mut forward = prepare(circuit)?;
    let mut branch = StateVector {
        qubits: n,
        amplitudes: vec![ZERO; dim],
    };
    for (l, layer) in circuit.layers.iter().enumerate() {
        apply_layer(&mut forward, layer.kind, theta[layer.slot]);
        apply_generator(layer.kind, n, &forward.amplitudes, &mut branch.amplitudes);
        branch.amplitudes.iter_mut().for_each(|z| *z *= NEG_HALF_I);
        for later in &circuit.layers[l + 1..] {
            apply_layer(&mut branch, later.kind, theta[later.slot]);
        }
        for (d, b) in derivs[layer.slot]
            .amplitudes
            .iter_mut()
            .zip(&branch.amplitudes)
        {
            *d += b;
        }
    }
    Ok(derivs)
}

/// `F_ij = Re[⟨∂_iψ|∂_jψ⟩ - ⟨∂_iψ|ψ⟩⟨ψ|∂_jψ⟩]`.
pub fn fubini(circuit: &CircuitSpec, theta: &[f64]) -> Result<FubiniMatrix> {
    let psi = run_circuit(circuit, theta)?;
    let derivs = derivative_states(circuit, theta)?;
    Ok(fubini_from_states(&psi, &derivs))
}

pub fn fubini_from_states(psi: &StateVector, derivs: &[StateVector]) -> FubiniMatrix {
    let n = derivs.len();
    let berry: Vec<Complex64> = derivs.iter().map(|d| psi.inner(d)).collect();
    let mut f = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = (derivs[i].inner(&derivs[j]) - berry[i].conj() * berry[j]).re;
            f[(i, j)] = v;
            f[(j, i)] = v;
        }
    }
    FubiniMatrix::new(f)
}

/// A circuit paired with the Hamiltonian it is scored against.
#[derive(Debug, Clone)]
pub struct CircuitObjective {
    circuit: CircuitSpec,
    hamiltonian: PauliHamiltonian,
    sparse: SparsePauli,
}

impl CircuitObjective {
    pub fn new(circuit: CircuitSpec, hamiltonian: PauliHamiltonian) -> Result<Self> {
        if circuit.qubits() != hamiltonian.qubits() {
            return Err(Error::DimensionMismatch {
                expected: circuit.qubits(),
                actual: hamiltonian.qubits(),
            });
        }
        Ok(Self {
            sparse: SparsePauli::new(&hamiltonian),
            circuit,
            hamiltonian,
        })
    }

    pub fn circuit(&self) -> &CircuitSpec {
        &self.circuit
    }

    pub fn hamiltonian(&self) -> &PauliHamiltonian {
        &self.hamiltonian
    }
}

// Parameter lengths are checked by the optimizer driver, so the simulator
// calls below cannot fail.
impl Objective for CircuitObjective {
    fn num_params(&self) -> usize {
        self.circuit.num_params()
    }

    fn energy(&self, params: &[f64]) -> f64 {
        let psi = run_circuit(&self.circuit, params).expect("parameter length checked");
        self.sparse.expectation(&psi.amplitudes)
    }

    fn energy_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        adjoint(&self.circuit, params, &self.sparse).expect("parameter length checked")
    }

    fn metric(&self, params: &[f64]) -> Option<FubiniMatrix> {
        Some(fubini(&self.circuit, params).expect("parameter length checked"))
    }
}

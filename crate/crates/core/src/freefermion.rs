//! Exact simulation of the TFIM QAOA circuit in the free-fermion picture.
//!
//! Under the Jordan-Wigner map followed by a Fourier transform, the periodic
//! TFIM and both circuit generators split into `r = ⌊N/2⌋` independent
//! two-level systems, one per momentum pair `q`:
//!
//! ```text
//! Σ Z_k Z_{k+1}  →  (N - 2r) + 2 ⊕_q [cos α_q Z + sin α_q Y]
//! Σ X_k          →  (N - 2r) + 2 ⊕_q Z
//! ```
//!
//! With layer angles scaled as `L(θ) = exp[-i(θ/2) Σ_k G_k]`, a ZZ layer acts
//! on block `q` as `exp[-iϑ (cos α_q Z + sin α_q Y)]` and an X layer as
//! `exp[-iφ Z]`. The start state `|+⟩^⊗N` is `(1, 0)` in every block.
//! Constant offsets only contribute global phases and are dropped from the
//! state; the energy keeps `-(1 + t)(N - 2r)`.

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::metric::FubiniMatrix;
use crate::models::{tfim_alphas, TfimSpec};
use crate::optimizers::Objective;

type C = Complex64;
type Block = Vector2<C>;
type Op = Matrix2<C>;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Product state of the fermion pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionState {
    blocks: Vec<Block>,
    alphas: Vec<f64>,
    field: f64,
}

impl FermionState {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Largest deviation of a block norm from 1.
    pub fn norm_drift(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (b.norm_squared() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `Σ_q ⟨ψ_q|h_q|ψ_q⟩`, without the constant offset.
    fn block_energy(&self) -> f64 {
        self.blocks
            .iter()
            .zip(&self.alphas)
            .map(|(b, &a)| expectation(&hamiltonian_block(a, self.field), b))
            .sum()
    }
}

/// QAOA angles. Layers are applied as `ϑ_1, φ_1, …, ϑ_p, φ_p`, each block
/// starting with the ZZ layer.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaParams {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
}

impl QaoaParams {
    pub fn new(thetas: Vec<f64>, phis: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() || thetas.len() != phis.len() {
            return Err(Error::InvalidCircuit(format!(
                "QAOA needs p >= 1 equal-length angle lists, got {} and {}",
                thetas.len(),
                phis.len()
            )));
        }
        Ok(Self { thetas, phis })
    }

    /// From the flat parameter vector `[ϑ_1, φ_1, ϑ_2, φ_2, …]`.
    pub fn from_interleaved(params: &[f64]) -> Result<Self> {
        if params.is_empty() || !params.len().is_multiple_of(2) {
            return Err(Error::InvalidCircuit(format!(
                "interleaved QAOA parameters need an even nonzero length, got {}",
                params.len()
            )));
        }
        let thetas = params.iter().step_by(2).copied().collect();
        let phis = params.iter().skip(1).step_by(2).copied().collect();
        Self::new(thetas, phis)
    }

    pub fn interleaved(&self) -> Vec<f64> {
        self.thetas
            .iter()
            .zip(&self.phis)
            .flat_map(|(&t, &p)| [t, p])
            .collect()
    }

    pub fn depth(&self) -> usize {
        self.thetas.len()
    }

    fn layers(&self) -> impl Iterator<Item = (LayerType, f64)> + '_ {
        self.thetas
            .iter()
            .zip(&self.phis)
            .flat_map(|(&t, &p)| [(LayerType::ZZ, t), (LayerType::X, p)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LayerType {
    ZZ,
    X,
}

fn pauli_z() -> Op {
    Op::new(ONE, ZERO, ZERO, -ONE)
}

fn pauli_y() -> Op {
    Op::new(ZERO, -I, I, ZERO)
}

/// Block generator of a layer, `G` in `exp[-iθ G]`.
fn generator(kind: LayerType, alpha: f64) -> Op {
    match kind {
        LayerType::ZZ => pauli_z() * C::from(alpha.cos()) + pauli_y() * C::from(alpha.sin()),
        LayerType::X => pauli_z(),
    }
}

/// `exp[-iθ G]` for a generator with `G² = 1`.
fn rotation(kind: LayerType, alpha: f64, angle: f64) -> Op {
    let (s, c) = angle.sin_cos();
    Op::identity() * C::from(c) - generator(kind, alpha) * (I * s)
}

/// `h_q = -2[(t + cos α_q) Z + sin α_q Y]`.
fn hamiltonian_block(alpha: f64, field: f64) -> Op {
    (pauli_z() * C::from(field + alpha.cos()) + pauli_y() * C::from(alpha.sin())) * C::from(-2.0)
}

fn expectation(op: &Op, v: &Block) -> f64 {
    v.dotc(&(op * v)).re
}

fn energy_offset(spec: &TfimSpec) -> f64 {
    -(1.0 + spec.field) * (spec.qubits - 2 * spec.blocks()) as f64
}

/// `|+⟩^⊗N`, i.e. every block in `(1, 0)`.
pub fn prepare_initial(spec: &TfimSpec) -> FermionState {
    FermionState {
        blocks: vec![Block::new(ONE, ZERO); spec.blocks()],
        alphas: tfim_alphas(spec),
        field: spec.field,
    }
}

pub fn apply_zz_layer(state: &mut FermionState, theta: f64) {
    apply(state, LayerType::ZZ, theta);
}

pub fn apply_x_layer(state: &mut FermionState, phi: f64) {
    apply(state, LayerType::X, phi);
}

fn apply(state: &mut FermionState, kind: LayerType, angle: f64) {
    for (b, &a) in state.blocks.iter_mut().zip(&state.alphas) {
        *b = rotation(kind, a, angle) * *b;
    }
}

pub fn run_circuit(spec: &TfimSpec, params: &QaoaParams) -> FermionState {
    let mut state = prepare_initial(spec);
    for (kind, angle) in params.layers() {
        apply(&mut state, kind, angle);
    }
    state
}

pub fn energy(spec: &TfimSpec, params: &QaoaParams) -> f64 {
    run_circuit(spec, params).block_energy() + energy_offset(spec)
}

/// Per-block final state and `|∂_l ψ_q⟩` for every layer `l`.
///
/// The generator is inserted after layer `l` and carried to the end of the
/// circuit with the suffix product `U_L ⋯ U_{l+1}`, accumulated backwards so
/// each block costs O(p).
fn block_derivatives(alpha: f64, params: &QaoaParams) -> (Block, Vec<Block>) {
    let layers: Vec<(LayerType, f64)> = params.layers().collect();
    let unitaries: Vec<Op> = layers
        .iter()
        .map(|&(kind, angle)| rotation(kind, alpha, angle))
        .collect();

    let mut forward = Vec::with_capacity(layers.len());
    let mut state = Block::new(ONE, ZERO);
    for u in &unitaries {
        state = u * state;
        forward.push(state);
    }

    let mut derivs = vec![Block::zeros(); layers.len()];
    let mut suffix = Op::identity();
    for l in (0..layers.len()).rev() {
        let g = generator(layers[l].0, alpha);
        derivs[l] = suffix * (g * forward[l]) * (-I);
        suffix *= unitaries[l];
    }
    (state, derivs)
}

/// Exact gradient with respect to the interleaved parameter vector.
pub fn gradient(spec: &TfimSpec, params: &QaoaParams) -> Vec<f64> {
    energy_and_gradient(spec, params).1
}

pub fn energy_and_gradient(spec: &TfimSpec, params: &QaoaParams) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; 2 * params.depth()];
    let mut e = energy_offset(spec);
    for &alpha in &tfim_alphas(spec) {
        let h = hamiltonian_block(alpha, spec.field);
        let (psi, derivs) = block_derivatives(alpha, params);
        let h_psi = h * psi;
        e += psi.dotc(&h_psi).re;
        for (g, d) in grad.iter_mut().zip(&derivs) {
            *g += 2.0 * h_psi.dotc(d).re;
        }
    }
    (e, grad)
}

/// Fubini-Study metric, additive over blocks because the full state is a
/// product of normalized block states.
pub fn fubini(spec: &TfimSpec, params: &QaoaParams) -> FubiniMatrix {
    let n = 2 * params.depth();
    let mut f = DMatrix::zeros(n, n);
    for &alpha in &tfim_alphas(spec) {
        let (psi, derivs) = block_derivatives(alpha, params);
        let berry: Vec<C> = derivs.iter().map(|d| psi.dotc(d)).collect();
        for i in 0..n {
            for j in i..n {
                let v = (derivs[i].dotc(&derivs[j]) - berry[i].conj() * berry[j]).re;
                f[(i, j)] += v;
                if i != j {
                    f[(j, i)] += v;
                }
            }
        }
    }
    FubiniMatrix::new(f)
}

/// The QAOA energy landscape of a TFIM chain as an optimization objective
/// over interleaved parameters.
#[derive(Debug, Clone)]
pub struct QaoaObjective {
    spec: TfimSpec,
    depth: usize,
}

impl QaoaObjective {
    pub fn new(spec: TfimSpec, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidCircuit(
                "QAOA depth must be at least 1".into(),
            ));
        }
        Ok(Self { spec, depth })
    }

    pub fn spec(&self) -> &TfimSpec {
        &self.spec
    }

    fn params(&self, flat: &[f64]) -> QaoaParams {
        assert_eq!(flat.len(), 2 * self.depth, "parameter length");
        QaoaParams::from_interleaved(flat).expect("length checked")
    }
}

impl Objective for QaoaObjective {
    fn num_params(&self) -> usize {
        2 * self.depth
    }

    fn energy(&self, params: &[f64]) -> f64 {
        energy(&self.spec, &self.params(params))
    }

    fn energy_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        energy_and_gradient(&self.spec, &self.params(params))
    }

    fn metric(&self, params: &[f64]) -> Option<FubiniMatrix> {
        Some(fubini(&self.spec, &self.params(params)))
    }
}

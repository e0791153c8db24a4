//! Spin-chain Hamiltonians, their exact ground energies and the relative error
//! metric used to score optimization runs.
//!
//! Both models live on a periodic chain: site `N` couples back to site `0`.
//! Qubit `k` corresponds to bit `k` of a computational-basis index.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Largest chain the ground-energy oracle accepts.
pub const ORACLE_MAX_QUBITS: usize = 16;

/// Chains up to this size are diagonalized as a full dense matrix; larger ones
/// go through Lanczos on the same operator.
const DENSE_EIGEN_MAX_QUBITS: usize = 8;

/// Transverse-field Ising chain `H = -Σ Z_k Z_{k+1} - t Σ X_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfimSpec {
    pub qubits: usize,
    pub field: f64,
}

impl TfimSpec {
    pub fn new(qubits: usize, field: f64) -> Result<Self> {
        if qubits < 2 {
            return Err(Error::InvalidModel(format!(
                "TFIM needs at least 2 qubits, got {qubits}"
            )));
        }
        if !field.is_finite() {
            return Err(Error::InvalidModel(
                "transverse field must be finite".into(),
            ));
        }
        Ok(Self { qubits, field })
    }

    /// Number of fermion momentum pairs, `⌊N/2⌋`.
    pub fn blocks(&self) -> usize {
        self.qubits / 2
    }
}

/// Heisenberg XXZ chain `H = Σ X_k X_{k+1} + Y_k Y_{k+1} + Δ Z_k Z_{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XxzSpec {
    pub qubits: usize,
    pub anisotropy: f64,
}

impl XxzSpec {
    pub fn new(qubits: usize, anisotropy: f64) -> Result<Self> {
        if qubits < 2 || !qubits.is_multiple_of(2) {
            return Err(Error::InvalidModel(format!(
                "XXZ needs an even number of qubits >= 2, got {qubits}"
            )));
        }
        if !anisotropy.is_finite() {
            return Err(Error::InvalidModel("anisotropy must be finite".into()));
        }
        Ok(Self { qubits, anisotropy })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// A tensor product of single-qubit Paulis, one letter per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliWord(Vec<Pauli>);

/// Bit masks describing how a Pauli word acts on basis states:
/// `P|x⟩ = i^y_count · (-1)^popcount(x & sign) |x ^ flip⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliMasks {
    pub flip: u64,
    pub sign: u64,
    pub y_count: u32,
}

impl PauliWord {
    pub fn identity(qubits: usize) -> Self {
        Self(vec![Pauli::I; qubits])
    }

    /// Word with the given letters on the listed sites and identity elsewhere.
    /// Repeated sites multiply (only equal letters are supported, giving I).
    pub fn from_sites(qubits: usize, sites: &[(usize, Pauli)]) -> Self {
        let mut letters = vec![Pauli::I; qubits];
        for &(site, p) in sites {
            assert!(
                site < qubits,
                "site {site} out of range for {qubits} qubits"
            );
            letters[site] = match (letters[site], p) {
                (Pauli::I, p) => p,
                (a, b) if a == b => Pauli::I,
                (a, b) => panic!("product of distinct Paulis {a:?}{b:?} on one site"),
            };
        }
        Self(letters)
    }

    pub fn qubits(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn masks(&self) -> PauliMasks {
        let mut m = PauliMasks {
            flip: 0,
            sign: 0,
            y_count: 0,
        };
        for (k, p) in self.0.iter().enumerate() {
            let bit = 1u64 << k;
            match p {
                Pauli::I => {}
                Pauli::X => m.flip |= bit,
                Pauli::Y => {
                    m.flip |= bit;
                    m.sign |= bit;
                    m.y_count += 1;
                }
                Pauli::Z => m.sign |= bit,
            }
        }
        m
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for (k, p) in self.0.iter().enumerate() {
            if *p != Pauli::I {
                write!(f, "{p:?}{k}")?;
                any = true;
            }
        }
        if !any {
            write!(f, "I")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub word: PauliWord,
}

/// Real linear combination of Pauli words; Hermitian by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliHamiltonian {
    qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    pub fn new(qubits: usize) -> Self {
        Self {
            qubits,
            terms: Vec::new(),
        }
    }

    pub fn push(&mut self, coefficient: f64, word: PauliWord) {
        assert_eq!(
            word.qubits(),
            self.qubits,
            "word size differs from Hamiltonian"
        );
        assert!(coefficient.is_finite(), "non-finite coefficient");
        self.terms.push(PauliTerm { coefficient, word });
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        1usize << self.qubits
    }

    /// `out = H · input` without materializing the matrix.
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim();
        assert_eq!(input.len(), dim);
        assert_eq!(out.len(), dim);
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for term in &self.terms {
            let m = term.word.masks();
            let prefactor = Complex64::new(term.coefficient, 0.0) * i_pow(m.y_count);
            for (x, amp) in input.iter().enumerate() {
                let x = x as u64;
                let sign = if (x & m.sign).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                out[(x ^ m.flip) as usize] += prefactor * sign * amp;
            }
        }
    }

    /// Dense matrix, row-major by basis index. Only sensible for small chains.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut h = DMatrix::zeros(dim, dim);
        for term in &self.terms {
            let m = term.word.masks();
            let prefactor = Complex64::new(term.coefficient, 0.0) * i_pow(m.y_count);
            for x in 0..dim as u64 {
                let sign = if (x & m.sign).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                h[((x ^ m.flip) as usize, x as usize)] += prefactor * sign;
            }
        }
        h
    }
}

/// A [`PauliHamiltonian`] laid out for repeated products with statevectors:
/// all diagonal terms summed into one vector, off-diagonal terms grouped by
/// the bits they flip.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePauli {
    qubits: usize,
    diagonal: Vec<f64>,
    groups: Vec<FlipGroup>,
}

#[derive(Debug, Clone, PartialEq)]
struct FlipGroup {
    flip: usize,
    /// `(sign mask, prefactor)` per term.
    terms: Vec<(u64, Complex64)>,
}

impl FlipGroup {
    fn factor(&self, x: usize) -> Complex64 {
        self.terms
            .iter()
            .map(|&(sign, p)| {
                if (x as u64 & sign).count_ones().is_multiple_of(2) {
                    p
                } else {
                    -p
                }
            })
            .sum()
    }
}

impl SparsePauli {
    pub fn new(h: &PauliHamiltonian) -> Self {
        let dim = h.dim();
        let mut diagonal = vec![0.0; dim];
        let mut groups: Vec<FlipGroup> = Vec::new();
        for term in &h.terms {
            let m = term.word.masks();
            if m.flip == 0 {
                for (x, d) in diagonal.iter_mut().enumerate() {
                    let odd = (x as u64 & m.sign).count_ones() % 2 == 1;
                    *d += if odd {
                        -term.coefficient
                    } else {
                        term.coefficient
                    };
                }
                continue;
            }
            let entry = (m.sign, i_pow(m.y_count) * term.coefficient);
            match groups.iter_mut().find(|g| g.flip == m.flip as usize) {
                Some(g) => g.terms.push(entry),
                None => groups.push(FlipGroup {
                    flip: m.flip as usize,
                    terms: vec![entry],
                }),
            }
        }
        Self {
            qubits: h.qubits,
            diagonal,
            groups,
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// `out = H · input`.
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(input.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        for ((o, a), d) in out.iter_mut().zip(input).zip(&self.diagonal) {
            *o = a * d;
        }
        for g in &self.groups {
            if let [(0, p)] = g.terms[..] {
                for (x, a) in input.iter().enumerate() {
                    out[x ^ g.flip] += p * a;
                }
            } else {
                for (x, a) in input.iter().enumerate() {
                    out[x ^ g.flip] += g.factor(x) * a;
                }
            }
        }
    }

    /// `⟨ψ|H|ψ⟩` for a normalized or unnormalized `ψ`.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        assert_eq!(psi.len(), self.dim());
        let mut total: f64 = psi
            .iter()
            .zip(&self.diagonal)
            .map(|(a, d)| a.norm_sqr() * d)
            .sum();
        for g in &self.groups {
            let acc: Complex64 = if let [(0, p)] = g.terms[..] {
                psi.iter()
                    .enumerate()
                    .map(|(x, a)| psi[x ^ g.flip].conj() * a)
                    .sum::<Complex64>()
                    * p
            } else {
                psi.iter()
                    .enumerate()
                    .map(|(x, a)| psi[x ^ g.flip].conj() * g.factor(x) * a)
                    .sum()
            };
            total += acc.re;
        }
        total
    }
}

pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Momentum angles `α_q`, `q = 1..⌊N/2⌋`, of the fermion pairs.
pub fn tfim_alphas(spec: &TfimSpec) -> Vec<f64> {
    let n = spec.qubits as f64;
    let even = spec.qubits.is_multiple_of(2);
    (1..=spec.blocks())
        .map(|q| {
            let q = q as f64;
            if even {
                (2.0 * q - 1.0) * PI / n
            } else {
                2.0 * q * PI / n
            }
        })
        .collect()
}

/// Closed-form ground energy from the free-fermion solution.
pub fn tfim_ground_energy(spec: &TfimSpec) -> f64 {
    let t = spec.field;
    let offset = if spec.qubits.is_multiple_of(2) {
        0.0
    } else {
        1.0 + t
    };
    let pairs: f64 = tfim_alphas(spec)
        .iter()
        .map(|a| (1.0 + t * t + 2.0 * t * a.cos()).sqrt())
        .sum();
    -offset - 2.0 * pairs
}

pub fn tfim_hamiltonian(spec: &TfimSpec) -> PauliHamiltonian {
    let n = spec.qubits;
    let mut h = PauliHamiltonian::new(n);
    for k in 0..n {
        h.push(-1.0, bond(n, k, Pauli::Z));
    }
    for k in 0..n {
        h.push(-spec.field, PauliWord::from_sites(n, &[(k, Pauli::X)]));
    }
    h
}

pub fn xxz_hamiltonian(spec: &XxzSpec) -> PauliHamiltonian {
    let n = spec.qubits;
    let mut h = PauliHamiltonian::new(n);
    for k in 0..n {
        h.push(1.0, bond(n, k, Pauli::X));
        h.push(1.0, bond(n, k, Pauli::Y));
        h.push(spec.anisotropy, bond(n, k, Pauli::Z));
    }
    h
}

/// `P_k P_{k+1}` with periodic wrap. For `N = 2` both bonds act on the same
/// pair of sites, so the term shows up twice in a Hamiltonian.
fn bond(n: usize, k: usize, p: Pauli) -> PauliWord {
    PauliWord::from_sites(n, &[(k, p), ((k + 1) % n, p)])
}

/// Smallest eigenvalue of `h`, computed exactly on the full Hilbert space.
pub fn ground_energy_oracle(h: &PauliHamiltonian) -> Result<f64> {
    let n = h.qubits();
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::Capacity {
            what: "ground-energy oracle",
            qubits: n,
            capacity: ORACLE_MAX_QUBITS,
        });
    }
    if n <= DENSE_EIGEN_MAX_QUBITS {
        Ok(linalg::smallest_eigenvalue_hermitian(&h.to_dense()))
    } else {
        let sparse = SparsePauli::new(h);
        linalg::lanczos_ground_energy(h.dim(), |v, out| sparse.apply(v, out))
    }
}

/// `δ = (E - E0) / |E0|`.
pub fn relative_error(energy: f64, reference: f64) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((energy - reference) / reference.abs())
}

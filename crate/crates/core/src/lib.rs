//! Exact simulators, optimizers and an experiment harness for benchmarking
//! ADAM, BFGS and natural gradient descent on variational quantum
//! eigensolvers.
//!
//! * [`models`]: TFIM and XXZ chains, exact ground energies, relative error.
//! * [`freefermion`]: O(p·N) simulator of the TFIM QAOA circuit in the
//!   free-fermion block picture.
//! * [`statevector`]: dense simulator for arbitrary translationally invariant
//!   rotation-layer circuits, with adjoint gradients and the Fubini-Study metric.
//! * [`optimizers`]: ADAM, BFGS and Tikhonov-regularized natural gradient.
//! * [`costmodel`]: per-epoch quantum runtime estimates.
//! * [`harness`]: circuit builders, experiment specs, orchestration, fits and
//!   output files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod costmodel;
pub mod error;
pub mod freefermion;
pub mod harness;
mod linalg;
pub mod metric;
pub mod models;
pub mod optimizers;
pub mod statevector;

pub use error::{Error, Result};
pub use metric::FubiniMatrix;
pub use models::{PauliHamiltonian, TfimSpec, XxzSpec};
pub use optimizers::{Objective, OptimizerConfig, RunRecord, StopRule, Termination};

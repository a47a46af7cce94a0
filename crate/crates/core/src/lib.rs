//! Statevector simulation and training of variational quantum circuits for
//! binary pure-state discrimination with maximum-likelihood readout.
//!
//! The crate is organized bottom-up:
//!
//! * [`statevec`]: pure states, gate kernels, Haar sampling, entanglement entropy.
//! * [`ansatz`]: circuit layouts for each architecture and the 15-parameter
//!   two-qubit gate template.
//! * [`ensembles`]: input-state families (Haar, random local circuits,
//!   translation-invariant circuits, transverse-field Ising ground states).
//! * [`discriminate`]: Helstrom limit, MLE error, single-qubit readout, costs.
//! * [`optimize`]: finite-difference gradients, BFGS, multi-restart training,
//!   gradient-variance statistics.
//! * [`scramble`]: Heisenberg evolution of a local Pauli and its operator size.

pub mod ansatz;
pub mod discriminate;
pub mod ensembles;
mod error;
pub mod optimize;
pub mod rng;
pub mod scramble;
pub mod statevec;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Crate version, stamped into every result row.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

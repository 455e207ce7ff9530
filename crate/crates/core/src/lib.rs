//! Numerical core for estimating the many-body density of states with
//! Chebyshev moments extracted from Hadamard-test circuits.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches the
//! filesystem, LAPACK or threads lives in the companion `qkpm` crate.
//!
//! Layout:
//! - [`statevector`]: dense L-qubit simulator over the trapped-ion native
//!   gate set, ancilla statistics and entanglement diagnostics.
//! - [`hamiltonian`]: weighted Pauli strings, the staggered XYZ chain,
//!   spectral rescaling and the arc-cosine expansion helpers.
//! - [`random`]: layered pseudo-random circuits and stochastic traces.
//! - [`kpm`]: Chebyshev moments, kernels, DOS reconstruction and
//!   thermodynamics.
//! - [`estimator`]: moment circuits, their classical product-formula twin,
//!   post-processing and credit cost.
#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

mod error;
pub mod estimator;
pub mod hamiltonian;
pub mod kpm;
pub mod random;
pub mod rng;
pub mod statevector;

pub use error::{Error, Result};
pub use num_complex::Complex64;

//! Density-matrix simulator and quantum Fisher information toolkit.
//!
//! The crate estimates the quantum Fisher information (QFI) of mixed
//! probe states through efficiently computable lower and upper bounds:
//! truncated-fidelity bounds, sub/super-fidelity bounds, their
//! dynamics-agnostic combination, and a purity-loss bound for
//! comparison. A layered hardware-efficient ansatz, a variational
//! state eigensolver and derivative-free optimizers support training
//! probe states that maximize the estimated QFI.
//!
//! Modules:
//! - [`numerics`]: dense Hermitian eigendecomposition, PSD square roots,
//!   trace norms, matrix exponentials.
//! - [`states`]: density matrices, fixed-purity random states, GHZ and
//!   optimal mixed probes.
//! - [`circuits`]: layered ansatz, phase encoding, parameter-shift
//!   gradients.
//! - [`fidelity`]: exact, truncated and sub/super fidelities, T-matrix
//!   reconstruction, swap-test statistics.
//! - [`vqse`]: variational diagonalization subroutine.
//! - [`qfi`]: QFI bounds, analytic limits, maxima and the purity-loss
//!   bound.
//! - [`optimize`]: derivative-free trust-region and gradient-descent
//!   optimizers for the hybrid loop.

pub mod circuits;
pub mod error;
pub mod fidelity;
pub mod numerics;
pub mod optimize;
pub mod qfi;
pub mod states;
pub mod vqse;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, HermitianEig};
pub use states::{DensityMatrix, SpectralDecomposition};

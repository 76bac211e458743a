//! Quantum Fisher information under imperfect reference frames.
//!
//! A parameter `lambda` is imprinted on a pure probe by `exp(-i K lambda)`, and
//! the receiver, lacking a shared frame, sees the state averaged over the group
//! generated by `G` (a pinching by the spectral projectors of `G`). This crate
//! computes how much Fisher information survives that average, in several
//! mutually checking forms, together with the SLD, optimal measurements, the
//! worked model systems and a probe optimizer.
//!
//! `hbar = 1` throughout.

// `!(x <= tol)` rejects NaN as well as large values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod hilbert;
pub mod metrology;
pub mod models;
pub mod probeopt;
pub mod sampling;

pub use channels::{spectral_projectors, twirl, ProjectorSet, DEFAULT_CLUSTER_TOL};
pub use error::{Error, Result};
pub use hilbert::{
    c64, eigh, expectation, sym_covariance, tensor, variance, CMatrix, CVector, DensityMatrix,
    HermitianOperator, StateVector, Tensor, C64,
};
pub use metrology::{report, QfiReport, Scenario};

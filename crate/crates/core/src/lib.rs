//! Rank-adaptive low-rank denoising for matrices and third-order tensors.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense matrices, a Jacobi SVD, subspaces and sin-Θ distances,
//!   and randomized checks of classical singular value inequalities.
//! * [`tensor`]: the dense [`Tensor3`](tensor::Tensor3) type, unfoldings, mode
//!   products, Tucker representations and the `DT3 v1` file format.
//! * [`estimators`]: one-step HOSVD, truncated SVD denoising, bias terms and
//!   an alternating refinement of Tucker factors.
//! * [`synth`]: seeded signal and noise generators.
//! * [`bounds`]: closed-form evaluators for the error bounds and rates.
//! * [`bench`]: the Monte Carlo experiment runner used by the CLI.

pub mod bench;
pub mod bounds;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod rng;
pub mod synth;
pub mod tensor;
pub mod tolerances;

pub use error::{Error, Result};
pub use linalg::{Matrix, SvdFactors, Subspace};
pub use tensor::{Tensor3, TuckerDecomposition};

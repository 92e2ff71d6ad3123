//! Dense matrices and the matrix-analysis primitives used throughout the
//! crate.

mod matrix;
pub mod perturbation;
mod subspace;
mod svd;

pub use matrix::{kronecker, Matrix};
pub use perturbation::{perturbation_inequalities_report, PerturbationReport, WeylSlack};
pub use subspace::{
    random_orthonormal, random_orthonormal_from, sin_theta, sin_theta_via_complement, SinTheta,
    Subspace,
};
pub use svd::{
    frobenius_norm, leading_left_singular_vectors, left_singular_basis, operator_norm,
    singular_values, svd, truncated_svd, SvdFactors,
};

pub(crate) use matrix::{dot, frobenius, gemm, gemm_bt};
pub(crate) use svd::completion_vector;

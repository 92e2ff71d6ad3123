//! Numerical tolerances shared by constructors, checks and tests.

use serde::{Deserialize, Serialize};

/// Orthonormality of factor matrices: `‖QᵀQ − I‖_max`.
pub const ORTHONORMALITY: f64 = 1e-10;

/// Relative Frobenius reconstruction error accepted from an SVD.
pub const SVD_RECONSTRUCTION: f64 = 1e-8;

/// Slack below which an inequality check counts as violated.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Eckart–Young residual check, relative to `‖M‖_F²`.
pub const ECKART_YOUNG: f64 = 1e-8;

/// Exact-recovery threshold for noiseless low-rank inputs (relative error).
pub const EXACT_RECOVERY: f64 = 1e-9;

/// Default relative improvement below which HOOI stops.
pub const HOOI_TOL: f64 = 1e-8;

/// Default HOOI iteration cap.
pub const HOOI_MAX_ITERS: usize = 25;

/// The tolerances above gathered into one record, for reports and overrides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub orthonormality: f64,
    pub svd_reconstruction: f64,
    pub inequality_slack: f64,
    pub eckart_young: f64,
    pub exact_recovery: f64,
    pub hooi_tol: f64,
    pub hooi_max_iters: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            orthonormality: ORTHONORMALITY,
            svd_reconstruction: SVD_RECONSTRUCTION,
            inequality_slack: INEQUALITY_SLACK,
            eckart_young: ECKART_YOUNG,
            exact_recovery: EXACT_RECOVERY,
            hooi_tol: HOOI_TOL,
            hooi_max_iters: HOOI_MAX_ITERS,
        }
    }
}

//! Truncated-SVD and one-step HOSVD denoisers, plus bias (approximation
//! error) evaluation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{completion_vector, left_singular_basis, svd, Matrix, Subspace};
use crate::tensor::{matricize, mode_product_transposed, Mode, Tensor3, TuckerDecomposition};
use crate::tolerances::{HOOI_MAX_ITERS, HOOI_TOL};

/// Target Tucker rank `(r1, r2, r3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TargetRanks(pub [usize; 3]);

impl TargetRanks {
    pub fn new(r1: usize, r2: usize, r3: usize) -> Self {
        TargetRanks([r1, r2, r3])
    }

    pub fn uniform(r: usize) -> Self {
        TargetRanks([r; 3])
    }

    pub fn get(&self, mode: Mode) -> usize {
        self.0[mode.index()]
    }

    /// Checks `1 ≤ r_k ≤ p_k`.
    pub fn validate(&self, dims: [usize; 3]) -> Result<()> {
        for k in 0..3 {
            if self.0[k] == 0 || self.0[k] > dims[k] {
                return Err(Error::param(format!(
                    "rank r{} = {} outside 1..={} for a {}x{}x{} tensor",
                    k + 1,
                    self.0[k],
                    dims[k],
                    dims[0],
                    dims[1],
                    dims[2]
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for TargetRanks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// Certified interval for the best achievable approximation error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasBracket {
    pub lower: f64,
    pub upper: f64,
}

impl BiasBracket {
    pub fn exact(value: f64) -> Self {
        BiasBracket { lower: value, upper: value }
    }
}

/// `sqrt(Σ_{i>r} σ_i²)`, accumulated from the smallest term up.
pub fn tail_norm(sigma: &[f64], r: usize) -> f64 {
    sigma.iter().skip(r).rev().fold(0.0, |acc, s| acc + s * s).sqrt()
}

/// `ξ_(r) = ‖X_(r) − X‖_F` from the singular values of `X`; exact by
/// Eckart–Young–Mirsky.
pub fn matrix_bias(sigma: &[f64], r: usize) -> BiasBracket {
    BiasBracket::exact(tail_norm(sigma, r))
}

/// Rank-`r` truncation `Y_(r)`.
pub fn truncated_svd_estimate(y: &Matrix, r: usize) -> Result<Matrix> {
    let s = y.rows().min(y.cols());
    if r == 0 || r > s {
        return Err(Error::param(format!("rank {r} outside 1..={s}")));
    }
    Ok(svd(y)?.truncate(r)?.reconstruct())
}

/// Leading `r` left singular vectors, completed to an orthonormal set when
/// `r` exceeds the number of columns of `m`.
fn leading_basis(full: &Matrix, r: usize) -> Matrix {
    if r <= full.cols() {
        return full.leading_columns(r);
    }
    let mut cols = full.columns();
    while cols.len() < r {
        let e = completion_vector(&cols, full.rows());
        cols.push(e);
    }
    Matrix::from_columns(full.rows(), &cols)
}

fn left_basis(m: &Matrix, r: usize) -> Result<Matrix> {
    Ok(leading_basis(&left_singular_basis(m)?.0, r))
}

/// Stage 0 of the one-step HOSVD: the left singular bases of all three
/// unfoldings of `Y`. Rank-independent, so one instance serves every target
/// rank evaluated on the same observation.
#[derive(Clone, Debug)]
pub struct HosvdStage0<'a> {
    y: &'a Tensor3,
    bases: [Matrix; 3],
    sigma: [Vec<f64>; 3],
}

/// Output of [`one_step_hosvd`].
#[derive(Clone, Debug)]
pub struct HosvdOutput {
    pub estimate: Tensor3,
    pub decomposition: TuckerDecomposition,
    /// `U_k^(0)`.
    pub stage0: [Subspace; 3],
    /// `U_k^(1)`; the factors of `decomposition`.
    pub stage1: [Subspace; 3],
}

impl<'a> HosvdStage0<'a> {
    pub fn new(y: &'a Tensor3) -> Result<Self> {
        let mut bases = Vec::with_capacity(3);
        let mut sigma = Vec::with_capacity(3);
        for mode in Mode::ALL {
            let (u, s) = left_singular_basis(&matricize(y, mode))?;
            bases.push(u);
            sigma.push(s);
        }
        Ok(Self {
            y,
            bases: bases.try_into().expect("three modes"),
            sigma: sigma.try_into().expect("three modes"),
        })
    }

    pub fn observation(&self) -> &Tensor3 {
        self.y
    }

    /// Singular values of the mode-`k` unfolding, nonincreasing.
    pub fn unfolding_singular_values(&self, mode: Mode) -> &[f64] {
        &self.sigma[mode.index()]
    }

    /// `U_k^(0)` for every mode.
    pub fn factors(&self, ranks: TargetRanks) -> Result<[Subspace; 3]> {
        ranks.validate(self.y.dims())?;
        Ok([0, 1, 2].map(|k| Subspace::new_unchecked(leading_basis(&self.bases[k], ranks.0[k]))))
    }

    /// Plain (Stage-0) HOSVD truncation `Y ×_k U_k^(0) U_k^(0)ᵀ` as a Tucker
    /// decomposition.
    pub fn truncate(&self, ranks: TargetRanks) -> Result<TuckerDecomposition> {
        let f = self.factors(ranks)?;
        TuckerDecomposition::new(project_core(self.y, &f)?, f)
    }

    /// One-step HOSVD (Stage 1) at `ranks`.
    pub fn one_step(&self, ranks: TargetRanks) -> Result<HosvdOutput> {
        let u0 = self.factors(ranks)?;
        let y = self.y;
        let [b1, b2, b3] = [u0[0].basis(), u0[1].basis(), u0[2].basis()];
        let [r1, r2, r3] = ranks.0;

        // 𝓜₁(Y)(U₂⊗U₃) = 𝓜₁(Y ×₂ U₂ᵀ ×₃ U₃ᵀ), and cyclically.
        let y3 = mode_product_transposed(y, Mode::Three, b3)?;
        let m1 = matricize(&mode_product_transposed(&y3, Mode::Two, b2)?, Mode::One);
        let m2 = matricize(&mode_product_transposed(&y3, Mode::One, b1)?, Mode::Two);
        drop(y3);
        let y1 = mode_product_transposed(y, Mode::One, b1)?;
        let m3 = matricize(&mode_product_transposed(&y1, Mode::Two, b2)?, Mode::Three);
        drop(y1);

        let u1 = [left_basis(&m1, r1)?, left_basis(&m2, r2)?, left_basis(&m3, r3)?].map(Subspace::new_unchecked);
        let decomposition = TuckerDecomposition::new(project_core(y, &u1)?, u1.clone())?;
        let estimate = decomposition.reconstruct();
        Ok(HosvdOutput { estimate, decomposition, stage0: u0, stage1: u1 })
    }

    /// `[lower, upper]` bracket for the best Tucker-`ranks` approximation
    /// error of the tensor this stage was built from.
    pub fn bias_bracket(&self, ranks: TargetRanks) -> Result<BiasBracket> {
        let t = self.truncate(ranks)?;
        let upper = self.y.sub(&t.reconstruct())?.frobenius_norm();
        let lower = (0..3).map(|k| tail_norm(&self.sigma[k], ranks.0[k])).fold(0.0, f64::max);
        Ok(BiasBracket { lower, upper: upper.max(lower) })
    }
}

/// `Y ×₁ U₁ᵀ ×₂ U₂ᵀ ×₃ U₃ᵀ`, contracting mode 3 first.
fn project_core(y: &Tensor3, f: &[Subspace; 3]) -> Result<Tensor3> {
    let t = mode_product_transposed(y, Mode::Three, f[2].basis())?;
    let t = mode_product_transposed(&t, Mode::Two, f[1].basis())?;
    mode_product_transposed(&t, Mode::One, f[0].basis())
}

/// One-step HOSVD (Algorithm 1) of `y` at `ranks`.
pub fn one_step_hosvd(y: &Tensor3, ranks: TargetRanks) -> Result<HosvdOutput> {
    ranks.validate(y.dims())?;
    HosvdStage0::new(y)?.one_step(ranks)
}

/// Bracket for `ξ_(r1,r2,r3)(X)`: the largest unfolding tail from below
/// and the Stage-0 HOSVD truncation error from above.
pub fn tucker_bias_bracket(x: &Tensor3, ranks: TargetRanks) -> Result<BiasBracket> {
    ranks.validate(x.dims())?;
    HosvdStage0::new(x)?.bias_bracket(ranks)
}

/// Result of [`hooi_refine`].
#[derive(Clone, Debug)]
pub struct HooiResult {
    pub decomposition: TuckerDecomposition,
    pub achieved_error: f64,
    /// Error after initialization (entry 0) and after every accepted sweep.
    pub history: Vec<f64>,
}

/// Higher-order orthogonal iteration from the Stage-0 HOSVD factors.
///
/// `max_iters` counts the initialization as the first iterate, so
/// `max_iters = 1` returns the HOSVD truncation. Stops early when the
/// relative improvement drops below `tol` or an iterate does not improve.
pub fn hooi_refine(x: &Tensor3, ranks: TargetRanks, max_iters: usize, tol: f64) -> Result<HooiResult> {
    if max_iters == 0 {
        return Err(Error::param("max_iters must be at least 1"));
    }
    ranks.validate(x.dims())?;
    let residual = |t: &TuckerDecomposition| -> Result<f64> { Ok(x.sub(&t.reconstruct())?.frobenius_norm()) };

    let mut best = HosvdStage0::new(x)?.truncate(ranks)?;
    let mut err = residual(&best)?;
    let mut history = vec![err];
    while history.len() < max_iters && err > 0.0 {
        let mut f = best.factors().clone();
        for mode in Mode::ALL {
            let mut t = x.clone();
            for other in Mode::ALL.into_iter().filter(|&o| o != mode) {
                t = mode_product_transposed(&t, other, f[other.index()].basis())?;
            }
            f[mode.index()] = Subspace::new_unchecked(left_basis(&matricize(&t, mode), ranks.get(mode))?);
        }
        let cand = TuckerDecomposition::new(project_core(x, &f)?, f)?;
        let cand_err = residual(&cand)?;
        if cand_err > err {
            break;
        }
        let improvement = (err - cand_err) / err;
        best = cand;
        err = cand_err;
        history.push(err);
        if improvement < tol {
            break;
        }
    }
    Ok(HooiResult { decomposition: best, achieved_error: err, history })
}

/// [`hooi_refine`] with the default stopping rule.
pub fn hooi_refine_default(x: &Tensor3, ranks: TargetRanks) -> Result<HooiResult> {
    hooi_refine(x, ranks, HOOI_MAX_ITERS, HOOI_TOL)
}

/// Sample covariance `(1/N) Σ z_k z_kᵀ` of the rows of `samples` and its
/// rank-`r` truncation (symmetric positive semidefinite by construction).
pub fn sample_cov_truncated(samples: &Matrix, r: usize) -> Result<(Matrix, Matrix)> {
    let (n_obs, n) = samples.shape();
    if r == 0 || r > n {
        return Err(Error::param(format!("rank {r} outside 1..={n}")));
    }
    let mut cov = samples.t_matmul(samples)?.scale(1.0 / n_obs as f64);
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = s;
            cov[(j, i)] = s;
        }
    }
    if r == n {
        return Ok((cov.clone(), cov));
    }
    // For a PSD matrix the left singular vectors are eigenvectors, so
    // U_r Σ_r U_rᵀ is the rank-r truncation and exactly symmetric.
    let f = svd(&cov)?.truncate(r)?;
    let scaled = Matrix::from_fn(n, r, |i, j| f.u[(i, j)] * f.sigma[j]);
    let mut est = scaled.matmul_t(&f.u)?;
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (est[(i, j)] + est[(j, i)]);
            est[(i, j)] = s;
            est[(j, i)] = s;
        }
    }
    Ok((est, cov))
}

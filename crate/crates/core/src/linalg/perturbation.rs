//! Slack reports for classical singular value inequalities.
//!
//! Every check returns `rhs − lhs`, so a correct inequality shows up as a
//! nonnegative slack and rounding as a tiny negative one.

use serde::Serialize;

use super::matrix::Matrix;
use super::svd::{left_singular_basis, operator_norm, singular_values, truncated_svd};
use crate::error::{Error, Result};
use crate::tolerances::INEQUALITY_SLACK;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeylSlack {
    /// 1-based indices with `i + j − 1 ≤ min(m, n)`.
    pub i: usize,
    pub j: usize,
    pub slack: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    /// `‖A − B‖_F − ‖Σ(A) − Σ(B)‖_F`.
    pub mirsky_frobenius: f64,
    /// `‖A − B‖ − max_i |σ_i(A) − σ_i(B)|`.
    pub mirsky_spectral: f64,
    /// `σ_i(A) + σ_j(B) − σ_{i+j−1}(A + B)` for every admissible pair.
    pub weyl: Vec<WeylSlack>,
    /// `sqrt(Σ_{i≤k} σ_i²(A)) + sqrt(Σ_{i≤k} σ_i²(B)) − sqrt(Σ_{i≤k} σ_i²(A + B))`.
    pub ky_fan: f64,
}

impl PerturbationReport {
    pub fn min_slack(&self) -> f64 {
        self.weyl
            .iter()
            .map(|w| w.slack)
            .chain([self.mirsky_frobenius, self.mirsky_spectral, self.ky_fan])
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of slacks below `−INEQUALITY_SLACK`.
    pub fn violations(&self) -> usize {
        self.weyl
            .iter()
            .map(|w| w.slack)
            .chain([self.mirsky_frobenius, self.mirsky_spectral, self.ky_fan])
            .filter(|&s| s < -INEQUALITY_SLACK)
            .count()
    }
}

/// Mirsky (Frobenius and spectral), Weyl and Ky Fan slacks for the pair
/// `(A, B)` with Ky Fan order `k`.
pub fn perturbation_inequalities_report(a: &Matrix, b: &Matrix, k: usize) -> Result<PerturbationReport> {
    if a.shape() != b.shape() {
        return Err(Error::param(format!(
            "shape mismatch: {}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let s = a.rows().min(a.cols());
    if k == 0 || k > s {
        return Err(Error::param(format!("Ky Fan order {k} outside 1..={s}")));
    }
    let sa = singular_values(a)?;
    let sb = singular_values(b)?;
    let diff = a.sub(b)?;
    let sum = a.add(b)?;
    let ssum = singular_values(&sum)?;

    let sigma_gap_f = sa.iter().zip(&sb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let sigma_gap_2 = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mirsky_frobenius = diff.frobenius_norm() - sigma_gap_f;
    let mirsky_spectral = operator_norm(&diff)? - sigma_gap_2;

    let mut weyl = Vec::new();
    for i in 1..=s {
        for j in 1..=(s + 1 - i) {
            weyl.push(WeylSlack { i, j, slack: sa[i - 1] + sb[j - 1] - ssum[i + j - 2] });
        }
    }

    let head = |v: &[f64]| v[..k].iter().map(|x| x * x).sum::<f64>().sqrt();
    let ky_fan = head(&sa) + head(&sb) - head(&ssum);

    Ok(PerturbationReport { mirsky_frobenius, mirsky_spectral, weyl, ky_fan })
}

/// Slack of `‖P_{Û⊥} B‖_F ≤ 3‖B_(R) − B‖_F + 2 min{√R‖Z‖, ‖Z‖_F}` where `Û`
/// holds the top-`R` left singular vectors of `A = B + Z`.
pub fn projected_residual_slack(b: &Matrix, z: &Matrix, rank: usize) -> Result<f64> {
    if b.shape() != z.shape() {
        return Err(Error::param("B and Z must have the same shape"));
    }
    let a = b.add(z)?;
    let (u_all, _) = left_singular_basis(&a)?;
    if rank == 0 || rank > u_all.cols() {
        return Err(Error::param(format!("rank {rank} outside 1..={}", u_all.cols())));
    }
    let u = u_all.leading_columns(rank);
    let residual = b.sub(&u.matmul(&u.t_matmul(b)?)?)?;
    let lhs = residual.frobenius_norm();

    let sb = singular_values(b)?;
    let tail = sb[rank..].iter().rev().map(|x| x * x).sum::<f64>().sqrt();
    let noise = ((rank as f64).sqrt() * operator_norm(z)?).min(z.frobenius_norm());
    Ok(3.0 * tail + 2.0 * noise - lhs)
}

/// Slack of `‖AB‖_F ≥ σ_min(B)‖A‖_F` for square `B`.
pub fn product_frobenius_lower_slack(a: &Matrix, b: &Matrix) -> Result<f64> {
    if b.rows() != b.cols() {
        return Err(Error::param("B must be square"));
    }
    let ab = a.matmul(b)?;
    let smin = *singular_values(b)?.last().expect("nonempty");
    Ok(ab.frobenius_norm() - smin * a.frobenius_norm())
}

/// Truncated SVD check: `‖M − M_(r)‖_F² − Σ_{i>r} σ_i²`.
pub fn eckart_young_gap(m: &Matrix, r: usize) -> Result<f64> {
    let sigma = singular_values(m)?;
    let t = truncated_svd(m, r)?;
    let res = m.sub(&t.reconstruct())?.frobenius_norm();
    let tail: f64 = sigma[r..].iter().map(|x| x * x).sum();
    Ok(res * res - tail)
}

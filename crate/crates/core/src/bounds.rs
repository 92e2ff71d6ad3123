//! Closed-form error bounds and rates, without their unspecified universal
//! constants, plus a Monte Carlo check of Gaussian operator-norm
//! concentration.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{matrix_bias, BiasBracket, HosvdStage0, TargetRanks};
use crate::linalg::{singular_values, Matrix};
use crate::rng::stream_key;
use crate::synth::{gen_noise_matrix, NoiseSpec};
use crate::tensor::{Mode, Tensor3};

/// `κ·sqrt(Σ p_k r_k + r1 r2 r3)`.
pub fn thm1_variance_term(kappa: f64, dims: [usize; 3], ranks: [usize; 3]) -> f64 {
    let dof: usize = (0..3).map(|k| dims[k] * ranks[k]).sum::<usize>() + ranks.iter().product::<usize>();
    kappa * (dof as f64).sqrt()
}

fn sigma_at(sigma: &[f64], i: usize) -> f64 {
    // 1-based; missing entries are zero.
    if i == 0 {
        return f64::INFINITY;
    }
    sigma.get(i - 1).copied().unwrap_or(0.0)
}

/// Noise threshold of the gap condition:
/// `C_gap κ² (sqrt(p1 p2 p3 r_max) + Σ_k p_k r_max)`.
pub fn snr_threshold(dims: [usize; 3], ranks: [usize; 3], kappa: f64, c_gap: f64) -> f64 {
    let r_max = *ranks.iter().max().expect("three ranks") as f64;
    let vol = dims.iter().map(|&p| p as f64).product::<f64>();
    let sum: f64 = dims.iter().map(|&p| p as f64 * r_max).sum();
    c_gap * kappa * kappa * ((vol * r_max).sqrt() + sum)
}

/// Per-mode margins `(σ_{r_k} − σ_{r_k+1})² − threshold` of the gap
/// condition, where `sigma[k]` are the singular values of the mode-`k`
/// unfolding of the signal. The condition holds iff every margin is
/// nonnegative.
pub fn snr_margins(sigma: [&[f64]; 3], dims: [usize; 3], ranks: [usize; 3], kappa: f64, c_gap: f64) -> [f64; 3] {
    let t = snr_threshold(dims, ranks, kappa, c_gap);
    [0, 1, 2].map(|k| {
        let gap = sigma_at(sigma[k], ranks[k]) - sigma_at(sigma[k], ranks[k] + 1);
        gap * gap - t
    })
}

pub fn snr_condition_holds(margins: &[f64; 3]) -> bool {
    margins.iter().all(|&m| m >= 0.0)
}

/// Truncated-SVD bound `(2+√2)(√r‖Z‖ + ξ_(r))`.
pub fn thm2_bound(r: usize, z_opnorm: f64, xi: f64) -> f64 {
    (2.0 + std::f64::consts::SQRT_2) * ((r as f64).sqrt() * z_opnorm + xi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateKind {
    /// Independent sub-Gaussian entries: `κ sqrt(r(m+n))`.
    IidSubgaussian,
    /// Sub-Gaussian random matrix: `κ sqrt(r(m+n))`.
    SubgaussianMatrix,
    /// Sample covariance: `κ² √r (sqrt(n/N) + n/N)`.
    Covariance,
}

impl RateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RateKind::IidSubgaussian => "iid-subgaussian",
            RateKind::SubgaussianMatrix => "subgaussian-matrix",
            RateKind::Covariance => "covariance",
        }
    }
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid-subgaussian" | "iid" => Ok(RateKind::IidSubgaussian),
            "subgaussian-matrix" => Ok(RateKind::SubgaussianMatrix),
            "covariance" | "cov" => Ok(RateKind::Covariance),
            other => Err(Error::param(format!("unknown rate kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub kappa: f64,
    pub r: usize,
    /// Rows; unused by the covariance rate.
    #[serde(default)]
    pub m: usize,
    pub n: usize,
    /// Sample size `N` for the covariance rate.
    #[serde(default)]
    pub samples: usize,
}

/// Rate expression of the matrix corollaries, without the constant `C`.
pub fn corollary_rate(kind: RateKind, p: &RateParams) -> Result<f64> {
    if !(p.kappa > 0.0) || p.r == 0 || p.n == 0 {
        return Err(Error::param("rate parameters must be positive"));
    }
    let r = p.r as f64;
    match kind {
        RateKind::IidSubgaussian | RateKind::SubgaussianMatrix => {
            if p.m == 0 {
                return Err(Error::param("m must be positive"));
            }
            Ok(p.kappa * (r * (p.m + p.n) as f64).sqrt())
        }
        RateKind::Covariance => {
            if p.samples == 0 {
                return Err(Error::param("sample size N must be positive"));
            }
            let ratio = p.n as f64 / p.samples as f64;
            Ok(p.kappa * p.kappa * r.sqrt() * (ratio.sqrt() + ratio))
        }
    }
}

/// `mκ²/Δ² + κ⁴nm/Δ⁴` with `Δ = σ_r − σ_{r+1}` (1-based, missing entries
/// zero), without the constant.
pub fn sin_theta_bound_unbalanced(sigma: &[f64], r: usize, kappa: f64, n: usize, m: usize) -> Result<f64> {
    if r == 0 {
        return Err(Error::param("rank must be at least 1"));
    }
    let delta = sigma_at(sigma, r) - sigma_at(sigma, r + 1);
    if !(delta > 0.0) {
        return Err(Error::param(format!("singular gap at r={r} is {delta}; the bound needs a positive gap")));
    }
    let (k2, d2) = (kappa * kappa, delta * delta);
    Ok(m as f64 * k2 / d2 + k2 * k2 * (n * m) as f64 / (d2 * d2))
}

/// Quantiles of `‖Z‖ / (κ(√m + √n))` over Gaussian draws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpNormSummary {
    pub trials: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub p99: f64,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Trial `t` uses noise seed `stream_key(seed, "bounds.opnorm", t)`, so the
/// summary does not depend on the thread count.
pub fn monte_carlo_opnorm(m: usize, n: usize, kappa: f64, trials: usize, seed: u64) -> Result<OpNormSummary> {
    if trials == 0 || m == 0 || n == 0 {
        return Err(Error::param("monte_carlo_opnorm needs m, n, trials >= 1"));
    }
    let norm = kappa * ((m as f64).sqrt() + (n as f64).sqrt());
    let mut stats = (0..trials)
        .into_par_iter()
        .map(|t| {
            let spec = NoiseSpec::gaussian(kappa, stream_key(seed, "bounds.opnorm", t as u64));
            let z = gen_noise_matrix(m, n, &spec)?;
            Ok(singular_values(&z)?[0] / norm)
        })
        .collect::<Result<Vec<f64>>>()?;
    stats.sort_by(f64::total_cmp);
    Ok(OpNormSummary {
        trials,
        min: stats[0],
        median: quantile_sorted(&stats, 0.5),
        max: stats[trials - 1],
        p99: quantile_sorted(&stats, 0.99),
    })
}

/// Theoretical quantities for one `(signal, ranks, κ)` configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kappa: f64,
    /// `(p1, p2, p3)` for tensors, `(m, n, 1)` for matrices.
    pub dims: [usize; 3],
    pub ranks: [usize; 3],
    /// Theorem 1 variance term for tensors; `κ sqrt(r(m+n))` for matrices.
    pub variance_term: f64,
    pub bias: BiasBracket,
    /// Smallest per-mode gap-condition margin (tensors only).
    pub snr_margin: Option<f64>,
}

impl BoundReport {
    /// `C·(variance_term + bias.upper)`.
    pub fn total_upper(&self, c: f64) -> f64 {
        c * (self.variance_term + self.bias.upper)
    }

    /// Report for a tensor signal at `ranks`, with gap-condition constant
    /// `c_gap`.
    pub fn tensor(x_star: &Tensor3, ranks: TargetRanks, kappa: f64, c_gap: f64) -> Result<Self> {
        ranks.validate(x_star.dims())?;
        let stage = HosvdStage0::new(x_star)?;
        Self::from_stage(&stage, ranks, kappa, c_gap)
    }

    /// As [`BoundReport::tensor`] reusing a prepared Stage-0 of the signal.
    pub fn from_stage(stage: &HosvdStage0<'_>, ranks: TargetRanks, kappa: f64, c_gap: f64) -> Result<Self> {
        let dims = stage.observation().dims();
        let bias = stage.bias_bracket(ranks)?;
        let sigma = Mode::ALL.map(|m| stage.unfolding_singular_values(m));
        let margins = snr_margins(sigma, dims, ranks.0, kappa, c_gap);
        Ok(BoundReport {
            kappa,
            dims,
            ranks: ranks.0,
            variance_term: thm1_variance_term(kappa, dims, ranks.0),
            bias,
            snr_margin: Some(margins.into_iter().fold(f64::INFINITY, f64::min)),
        })
    }

    /// Report for a matrix signal at rank `r`.
    pub fn matrix(x_star: &Matrix, r: usize, kappa: f64) -> Result<Self> {
        let (m, n) = x_star.shape();
        let sigma = singular_values(x_star)?;
        let variance_term = corollary_rate(RateKind::IidSubgaussian, &RateParams { kappa, r, m, n, samples: 0 })?;
        Ok(BoundReport {
            kappa,
            dims: [m, n, 1],
            ranks: [r, r, 1],
            variance_term,
            bias: matrix_bias(&sigma, r),
            snr_margin: None,
        })
    }
}

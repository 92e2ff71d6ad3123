//! Seeded synthetic signals and noise.
//!
//! Every generator is a pure function of its spec. Randomness comes from
//! [`CounterRng`] streams keyed by `(seed, tag, index)`:
//!
//! | stream                     | use                                   |
//! |----------------------------|---------------------------------------|
//! | `synth.matrix.u`, `.v`     | matrix singular vectors               |
//! | `synth.tensor.factor`, k   | tensor factor `U_{k+1}`               |
//! | `synth.cov.basis`          | covariance eigenvectors               |
//! | `synth.cov.samples`        | covariance Gaussian draws             |
//! | `synth.noise`              | noise entries, one counter per entry  |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{random_orthonormal_from, Matrix};
use crate::rng::CounterRng;
use crate::tensor::{checked_len, Tensor3};

fn default_beta() -> f64 {
    0.8
}

fn default_kappa() -> f64 {
    1.0
}

fn check_beta_lambda(beta: f64, lambda: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param(format!("beta must lie in (0, 1), got {beta}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// `σ_i = β^i`, `i = 1..=n`.
pub fn decay_spectrum(beta: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| beta.powi(i as i32)).collect()
}

/// Low-rank-plus-decay matrix signal `U diag(β^i) Vᵀ`, `U` `m x n`, `V`
/// `n x n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSignalSpec {
    pub m: usize,
    pub n: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    pub lambda: f64,
    #[serde(default)]
    pub seed: u64,
}

impl MatrixSignalSpec {
    pub fn new(m: usize, n: usize, lambda: f64, seed: u64) -> Self {
        Self { m, n, beta: default_beta(), lambda, seed }
    }

    pub fn validate(&self) -> Result<()> {
        check_beta_lambda(self.beta, self.lambda)?;
        if self.n == 0 || self.n > self.m {
            return Err(Error::param(format!("need 1 <= n <= m, got m={} n={}", self.m, self.n)));
        }
        checked_len([self.m, self.n, 1])?;
        Ok(())
    }
}

/// Tensor signal `𝒢 ×₁ U₁ ×₂ U₂ ×₃ U₃` with superdiagonal `s x s x s` core
/// `γ_i = β^i` and `p x s` orthonormal factors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorSignalSpec {
    pub p: usize,
    pub s: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    pub lambda: f64,
    #[serde(default)]
    pub seed: u64,
}

impl TensorSignalSpec {
    pub fn new(p: usize, s: usize, lambda: f64, seed: u64) -> Self {
        Self { p, s, beta: default_beta(), lambda, seed }
    }

    pub fn validate(&self) -> Result<()> {
        check_beta_lambda(self.beta, self.lambda)?;
        if self.s == 0 || self.s > self.p {
            return Err(Error::param(format!("need 1 <= s <= p, got p={} s={}", self.p, self.s)));
        }
        checked_len([self.p; 3])?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseFamily {
    #[default]
    Gaussian,
    /// `±κ` with equal probability.
    Rademacher,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// I.i.d. zero-mean noise with standard deviation `kappa`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub seed: u64,
    /// Negate every draw; pairs with the same seed give `Z` and `−Z`.
    #[serde(default, skip_serializing_if = "is_default")]
    pub antithetic: bool,
    #[serde(default, skip_serializing_if = "is_default")]
    pub family: NoiseFamily,
}

impl NoiseSpec {
    pub fn gaussian(kappa: f64, seed: u64) -> Self {
        Self { kappa, seed, antithetic: false, family: NoiseFamily::Gaussian }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::param(format!("kappa must be positive, got {}", self.kappa)));
        }
        Ok(())
    }

    fn fill(&self, len: usize) -> Vec<f64> {
        let rng = CounterRng::stream(self.seed, "synth.noise", 0);
        let scale = if self.antithetic { -self.kappa } else { self.kappa };
        match self.family {
            NoiseFamily::Gaussian => (0..len as u64).map(|i| scale * rng.normal_at(i)).collect(),
            NoiseFamily::Rademacher => (0..len as u64).map(|i| scale * rng.sign_at(i)).collect(),
        }
    }
}

/// `X* = U diag(β^i) Vᵀ` rescaled to `‖X*‖_F = λ√(mn)`.
pub fn gen_matrix_signal(spec: &MatrixSignalSpec) -> Result<Matrix> {
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);
    let u = random_orthonormal_from(m, n, &CounterRng::stream(spec.seed, "synth.matrix.u", 0))?;
    let v = random_orthonormal_from(n, n, &CounterRng::stream(spec.seed, "synth.matrix.v", 0))?;
    let sigma = decay_spectrum(spec.beta, n);
    let norm = sigma.iter().map(|s| s * s).sum::<f64>().sqrt();
    let c = spec.lambda * ((m * n) as f64).sqrt() / norm;
    let us = Matrix::from_fn(m, n, |i, j| u.basis()[(i, j)] * c * sigma[j]);
    us.matmul_t(v.basis())
}

/// `X* = 𝒢 ×₁ U₁ ×₂ U₂ ×₃ U₃` rescaled to `‖X*‖_F = λ√(p³)`.
pub fn gen_tensor_signal(spec: &TensorSignalSpec) -> Result<Tensor3> {
    spec.validate()?;
    let (p, s) = (spec.p, spec.s);
    let f: Vec<Matrix> = (0..3)
        .map(|k| {
            random_orthonormal_from(p, s, &CounterRng::stream(spec.seed, "synth.tensor.factor", k))
                .map(|q| q.into_basis())
        })
        .collect::<Result<_>>()?;
    let gamma = decay_spectrum(spec.beta, s);
    let norm = gamma.iter().map(|g| g * g).sum::<f64>().sqrt();
    let c = spec.lambda * (p as f64).powf(1.5) / norm;

    let mut data = vec![0.0; p * p * p];
    let mut w1 = vec![0.0; s];
    let mut w2 = vec![0.0; s];
    for i in 0..p {
        for l in 0..s {
            w1[l] = c * gamma[l] * f[0][(i, l)];
        }
        for j in 0..p {
            for l in 0..s {
                w2[l] = w1[l] * f[1][(j, l)];
            }
            let fiber = &mut data[(i * p + j) * p..(i * p + j + 1) * p];
            for (k, out) in fiber.iter_mut().enumerate() {
                *out = f[2].row(k).iter().zip(&w2).map(|(a, b)| a * b).sum();
            }
        }
    }
    Tensor3::from_vec([p, p, p], data)
}

pub fn gen_noise_tensor(dims: [usize; 3], spec: &NoiseSpec) -> Result<Tensor3> {
    spec.validate()?;
    let len = checked_len(dims)?;
    Tensor3::from_vec(dims, spec.fill(len))
}

pub fn gen_noise_matrix(rows: usize, cols: usize, spec: &NoiseSpec) -> Result<Matrix> {
    spec.validate()?;
    let len = checked_len([rows, cols, 1])?;
    Matrix::from_row_major(rows, cols, spec.fill(len))
}

/// Population covariance for the covariance experiment:
/// `Σ = V diag(d) Vᵀ` with `d_i ∝ β^i` normalized to `tr Σ = n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub n: usize,
    /// Sample size `N`.
    pub samples: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Returns the population covariance (including the `κ²` factor) and an
/// `N x n` matrix whose rows are i.i.d. Gaussian with that covariance.
pub fn gen_covariance_samples(spec: &CovarianceSpec) -> Result<(Matrix, Matrix)> {
    check_beta_lambda(spec.beta, 1.0)?;
    if spec.n == 0 || spec.samples == 0 {
        return Err(Error::param("covariance spec needs n >= 1 and samples >= 1"));
    }
    if !(spec.kappa > 0.0 && spec.kappa.is_finite()) {
        return Err(Error::param(format!("kappa must be positive, got {}", spec.kappa)));
    }
    checked_len([spec.samples, spec.n, 1])?;
    let n = spec.n;
    let v = random_orthonormal_from(n, n, &CounterRng::stream(spec.seed, "synth.cov.basis", 0))?.into_basis();
    let raw = decay_spectrum(spec.beta, n);
    let total: f64 = raw.iter().sum();
    let d: Vec<f64> = raw.iter().map(|x| spec.kappa * spec.kappa * x * n as f64 / total).collect();
    let root = Matrix::from_fn(n, n, |i, j| v[(i, j)] * d[j].sqrt());
    let cov = root.matmul_t(&root)?;
    let rng = CounterRng::stream(spec.seed, "synth.cov.samples", 0);
    let g = Matrix::from_fn(spec.samples, n, |i, j| rng.normal_at((i * n + j) as u64));
    // Row z_k = root · g_k, i.e. Z = G rootᵀ.
    let z = g.matmul_t(&root)?;
    Ok((cov, z))
}

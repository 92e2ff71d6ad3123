#![allow(dead_code)]

use tucker_denoise::linalg::{random_orthonormal, Matrix};
use tucker_denoise::rng::{stream_key, CounterRng};
use tucker_denoise::tensor::{Tensor3, TuckerDecomposition};

/// Standard Gaussian matrix from stream `(seed, tag, 0)`.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64, tag: &str) -> Matrix {
    let rng = CounterRng::stream(seed, tag, 0);
    Matrix::from_fn(rows, cols, |i, j| rng.normal_at((i * cols + j) as u64))
}

pub fn gaussian_tensor(dims: [usize; 3], seed: u64, tag: &str) -> Tensor3 {
    let rng = CounterRng::stream(seed, tag, 0);
    let [_, p2, p3] = dims;
    Tensor3::from_fn(dims, |i, j, k| rng.normal_at(((i * p2 + j) * p3 + k) as u64))
}

pub fn gaussian_vec(n: usize, seed: u64, tag: &str) -> Vec<f64> {
    let rng = CounterRng::stream(seed, tag, 0);
    (0..n as u64).map(|i| rng.normal_at(i)).collect()
}

/// Integer in `lo..=hi` from counter `i` of `rng`.
pub fn int_in(rng: &CounterRng, i: u64, lo: usize, hi: usize) -> usize {
    lo + (rng.at(i) % (hi - lo + 1) as u64) as usize
}

pub fn to_nalgebra(m: &Matrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Random Tucker decomposition: Gaussian core, Haar-like orthonormal factors.
pub fn random_tucker(dims: [usize; 3], ranks: [usize; 3], seed: u64) -> TuckerDecomposition {
    let core = gaussian_tensor(ranks, seed, "common.core");
    let f = [0, 1, 2].map(|k| random_orthonormal(dims[k], ranks[k], stream_key(seed, "common.factor", k as u64)).unwrap());
    TuckerDecomposition::new(core, f).unwrap()
}

/// `U diag(sigma) Vᵀ` with random orthonormal `U` (`m x k`) and `V` (`n x k`),
/// `k = sigma.len() ≤ min(m, n)`.
pub fn matrix_with_spectrum(m: usize, n: usize, sigma: &[f64], seed: u64) -> Matrix {
    let k = sigma.len();
    let u = random_orthonormal(m, k, stream_key(seed, "common.spectrum.u", 0)).unwrap();
    let v = random_orthonormal(n, k, stream_key(seed, "common.spectrum.v", 0)).unwrap();
    let us = Matrix::from_fn(m, k, |i, j| u.basis()[(i, j)] * sigma[j]);
    us.matmul_t(v.basis()).unwrap()
}

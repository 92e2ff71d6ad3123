//! Dense third-order tensors, unfoldings and mode products.
//!
//! Entries are stored with the third index fastest, then the second, then
//! the first. Unfoldings follow the cyclic convention
//!
//! | mode | shape         | column index (0-based) |
//! |------|---------------|------------------------|
//! | 1    | `p1 x p2·p3`  | `i2·p3 + i3`           |
//! | 2    | `p2 x p1·p3`  | `i1·p3 + i3`           |
//! | 3    | `p3 x p1·p2`  | `i1·p2 + i2`           |
//!
//! which makes `matricize(X ×₂ Aᵀ ×₃ Bᵀ, 1) = matricize(X, 1)·(A ⊗ B)` hold
//! with the Kronecker ordering of [`Matrix::kronecker`].

pub mod io;
mod tucker;

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{frobenius, gemm, gemm_bt, singular_values, Matrix};

pub use tucker::{
    contract_vectors_dense, contract_vectors_tucker, tucker_reconstruct, FlopCount,
    TuckerDecomposition,
};

/// Upper bound on the number of entries of any dense tensor or matrix.
pub const MAX_ENTRIES: usize = 1 << 31;

/// Tensor mode, 1-based in its public integer form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::One, Mode::Two, Mode::Three];

    /// Parses a 1-based mode number.
    pub fn new(k: usize) -> Result<Mode> {
        match k {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            3 => Ok(Mode::Three),
            _ => Err(Error::param(format!("mode must be 1, 2 or 3, got {k}"))),
        }
    }

    /// 0-based position.
    pub fn index(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
            Mode::Three => 2,
        }
    }
}

impl TryFrom<usize> for Mode {
    type Error = Error;

    fn try_from(k: usize) -> Result<Mode> {
        Mode::new(k)
    }
}

#[derive(Clone, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

pub(crate) fn checked_len(dims: [usize; 3]) -> Result<usize> {
    if dims.contains(&0) {
        return Err(Error::param(format!("tensor dims must be positive, got {dims:?}")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&n| n <= MAX_ENTRIES)
        .ok_or_else(|| Error::param(format!("tensor {dims:?} exceeds {MAX_ENTRIES} entries")))
}

impl Tensor3 {
    /// Builds a tensor from entries in storage order, rejecting bad lengths,
    /// empty or oversized shapes and non-finite values.
    pub fn from_vec(dims: [usize; 3], data: Vec<f64>) -> Result<Self> {
        let len = checked_len(dims)?;
        if data.len() != len {
            return Err(Error::param(format!(
                "expected {len} entries for dims {dims:?}, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::param(format!("non-finite entry at index {pos}")));
        }
        Ok(Self { dims, data })
    }

    pub(crate) fn from_raw(dims: [usize; 3], data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dims.iter().product::<usize>());
        Self { dims, data }
    }

    pub fn zeros(dims: [usize; 3]) -> Self {
        Self { dims, data: vec![0.0; dims.iter().product()] }
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { dims, data }
    }

    /// Rank-one tensor `u ∘ v ∘ w`.
    pub fn outer(u: &[f64], v: &[f64], w: &[f64]) -> Self {
        Self::from_fn([u.len(), v.len(), w.len()], |i, j, k| u[i] * v[j] * w[k])
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.data)
    }

    pub fn scale(&self, s: f64) -> Tensor3 {
        Tensor3::from_raw(self.dims, self.data.iter().map(|x| s * x).collect())
    }

    pub fn add(&self, rhs: &Tensor3) -> Result<Tensor3> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Tensor3) -> Result<Tensor3> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Tensor3, f: impl Fn(f64, f64) -> f64) -> Result<Tensor3> {
        if self.dims != rhs.dims {
            return Err(Error::param(format!("dims differ: {:?} vs {:?}", self.dims, rhs.dims)));
        }
        Ok(Tensor3::from_raw(
            self.dims,
            self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }
}

impl fmt::Debug for Tensor3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor3 {:?} (‖·‖_F = {:.6e})", self.dims, self.frobenius_norm())
    }
}

/// Mode-`k` unfolding of `x`; see the module docs for the column order.
pub fn matricize(x: &Tensor3, mode: Mode) -> Matrix {
    let [p1, p2, p3] = x.dims;
    match mode {
        Mode::One => Matrix::from_raw(p1, p2 * p3, x.data.clone()),
        Mode::Two => {
            let mut out = vec![0.0; x.data.len()];
            for i1 in 0..p1 {
                for i2 in 0..p2 {
                    let src = &x.data[(i1 * p2 + i2) * p3..(i1 * p2 + i2 + 1) * p3];
                    let dst = i2 * p1 * p3 + i1 * p3;
                    out[dst..dst + p3].copy_from_slice(src);
                }
            }
            Matrix::from_raw(p2, p1 * p3, out)
        }
        Mode::Three => {
            let mut out = vec![0.0; x.data.len()];
            let cols = p1 * p2;
            for i1 in 0..p1 {
                for i2 in 0..p2 {
                    let base = (i1 * p2 + i2) * p3;
                    let col = i1 * p2 + i2;
                    for i3 in 0..p3 {
                        out[i3 * cols + col] = x.data[base + i3];
                    }
                }
            }
            Matrix::from_raw(p3, cols, out)
        }
    }
}

/// Inverse of [`matricize`].
pub fn tensorize(m: &Matrix, mode: Mode, dims: [usize; 3]) -> Result<Tensor3> {
    let len = checked_len(dims)?;
    let rows = dims[mode.index()];
    if m.rows() != rows || m.rows() * m.cols() != len {
        return Err(Error::param(format!(
            "a {}x{} matrix is not a mode-{} unfolding of {dims:?}",
            m.rows(),
            m.cols(),
            mode.index() + 1
        )));
    }
    let [p1, p2, p3] = dims;
    let src = m.as_slice();
    let data = match mode {
        Mode::One => src.to_vec(),
        Mode::Two => {
            let mut out = vec![0.0; len];
            for i1 in 0..p1 {
                for i2 in 0..p2 {
                    let s = i2 * p1 * p3 + i1 * p3;
                    let d = (i1 * p2 + i2) * p3;
                    out[d..d + p3].copy_from_slice(&src[s..s + p3]);
                }
            }
            out
        }
        Mode::Three => {
            let mut out = vec![0.0; len];
            let cols = p1 * p2;
            for i1 in 0..p1 {
                for i2 in 0..p2 {
                    let d = (i1 * p2 + i2) * p3;
                    for i3 in 0..p3 {
                        out[d + i3] = src[i3 * cols + i1 * p2 + i2];
                    }
                }
            }
            out
        }
    };
    Ok(Tensor3::from_raw(dims, data))
}

/// Mode-`k` product `x ×_k m`: `m` (`q x p_k`) acts on the left of the mode-`k`
/// unfolding, so `matricize(result, k) = m · matricize(x, k)` and the result
/// has `q` along mode `k`.
pub fn mode_product(x: &Tensor3, mode: Mode, m: &Matrix) -> Result<Tensor3> {
    let [p1, p2, p3] = x.dims;
    let k = mode.index();
    if m.cols() != x.dims[k] {
        return Err(Error::param(format!(
            "mode-{} product needs {} columns, matrix is {}x{}",
            k + 1,
            x.dims[k],
            m.rows(),
            m.cols()
        )));
    }
    let q = m.rows();
    let mut dims = x.dims;
    dims[k] = q;
    checked_len(dims)?;
    let mut out = vec![0.0; dims.iter().product()];
    match mode {
        Mode::One => gemm(m.as_slice(), q, p1, &x.data, p2 * p3, &mut out),
        Mode::Two => {
            for i1 in 0..p1 {
                let src = &x.data[i1 * p2 * p3..(i1 + 1) * p2 * p3];
                let dst = &mut out[i1 * q * p3..(i1 + 1) * q * p3];
                gemm(m.as_slice(), q, p2, src, p3, dst);
            }
        }
        Mode::Three => gemm_bt(&x.data, p1 * p2, p3, m.as_slice(), q, &mut out),
    }
    Ok(Tensor3::from_raw(dims, out))
}

/// `x ×_k mᵀ`, the contraction of mode `k` against the columns of `m`
/// (`p_k x r`).
pub fn mode_product_transposed(x: &Tensor3, mode: Mode, m: &Matrix) -> Result<Tensor3> {
    mode_product(x, mode, &m.transpose())
}

/// Multilinear rank: `r_k` counts singular values of the mode-`k` unfolding
/// above `tol · σ₁`. A zero tensor has rank `(0, 0, 0)`.
pub fn tucker_rank(x: &Tensor3, tol: f64) -> Result<[usize; 3]> {
    let mut ranks = [0; 3];
    for mode in Mode::ALL {
        let s = singular_values(&matricize(x, mode))?;
        let cutoff = tol * s[0];
        ranks[mode.index()] = if s[0] == 0.0 { 0 } else { s.iter().filter(|&&v| v > cutoff).count() };
    }
    Ok(ranks)
}

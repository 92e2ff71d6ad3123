use serde::Serialize;

use super::matrix::{axpy, dot, Matrix};
use super::svd::{completion_vector, singular_values};
use crate::error::{Error, Result};
use crate::rng::CounterRng;
use crate::tolerances::ORTHONORMALITY;

/// A subspace given by an orthonormal basis (`ambient_dim x rank`).
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Wraps `basis`, checking `basisᵀbasis = I` to within 1e-10.
    pub fn new(basis: Matrix) -> Result<Self> {
        if basis.cols() > basis.rows() {
            return Err(Error::param(format!(
                "rank {} exceeds ambient dimension {}",
                basis.cols(),
                basis.rows()
            )));
        }
        let defect = basis.orthonormality_defect();
        if defect > ORTHONORMALITY {
            return Err(Error::param(format!("basis is not orthonormal (defect {defect:.3e})")));
        }
        Ok(Self { basis })
    }

    pub(crate) fn new_unchecked(basis: Matrix) -> Self {
        Self { basis }
    }

    /// The span of the first `rank` coordinate axes of `ℝ^ambient_dim`.
    pub fn coordinate(ambient_dim: usize, rank: usize) -> Result<Self> {
        if rank == 0 || rank > ambient_dim {
            return Err(Error::param(format!("rank {rank} outside 1..={ambient_dim}")));
        }
        Ok(Self { basis: Matrix::from_fn(ambient_dim, rank, |i, j| f64::from(u8::from(i == j))) })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn into_basis(self) -> Matrix {
        self.basis
    }

    /// Orthogonal projector `B Bᵀ`.
    pub fn projector(&self) -> Matrix {
        self.basis.matmul_t(&self.basis).expect("square projector")
    }

    /// Orthonormal basis of the orthogonal complement (`ambient_dim x
    /// (ambient_dim − rank)`). Returns `None` when the subspace is the whole
    /// space.
    pub fn complement(&self) -> Option<Matrix> {
        let p = self.ambient_dim();
        if self.rank() == p {
            return None;
        }
        let mut cols = self.basis.columns();
        let mut extra = Vec::with_capacity(p - self.rank());
        while cols.len() < p {
            let e = completion_vector(&cols, p);
            cols.push(e.clone());
            extra.push(e);
        }
        Some(Matrix::from_columns(p, &extra))
    }
}

/// Spectral and Frobenius sin-Θ distances between two equal-rank subspaces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SinTheta {
    pub spectral: f64,
    pub frobenius: f64,
}

/// sin-Θ distances between `u` and `v`.
///
/// The sines of the principal angles are the singular values of the residual
/// `(I − UUᵀ)V`, so `spectral = sqrt(1 − σ_min²(UᵀV))` and
/// `frobenius = sqrt(rank − ‖UᵀV‖_F²)`. Working from the residual keeps small
/// angles accurate.
pub fn sin_theta(u: &Subspace, v: &Subspace) -> Result<SinTheta> {
    if u.ambient_dim() != v.ambient_dim() || u.rank() != v.rank() {
        return Err(Error::param(format!(
            "subspace shapes differ: {}x{} vs {}x{}",
            u.ambient_dim(),
            u.rank(),
            v.ambient_dim(),
            v.rank()
        )));
    }
    let coeffs = u.basis.t_matmul(&v.basis)?;
    let residual = v.basis.sub(&u.basis.matmul(&coeffs)?)?;
    let frobenius = residual.frobenius_norm().min((u.rank() as f64).sqrt());
    let spectral = singular_values(&residual)?[0].min(1.0);
    Ok(SinTheta { spectral, frobenius })
}

/// `‖V̂ᵀU_⊥‖` and `‖V̂ᵀU_⊥‖_F` through an explicit orthogonal complement of
/// `u`. Both are zero when `u` spans the ambient space.
pub fn sin_theta_via_complement(u: &Subspace, v: &Subspace) -> Result<SinTheta> {
    if u.ambient_dim() != v.ambient_dim() || u.rank() != v.rank() {
        return Err(Error::param("subspace shapes differ"));
    }
    match u.complement() {
        None => Ok(SinTheta { spectral: 0.0, frobenius: 0.0 }),
        Some(perp) => {
            let m = v.basis.t_matmul(&perp)?;
            Ok(SinTheta { spectral: singular_values(&m)?[0], frobenius: m.frobenius_norm() })
        }
    }
}

/// Random `p x r` orthonormal basis: an i.i.d. standard Gaussian matrix
/// orthonormalized by Gram–Schmidt with a positive triangular diagonal, which
/// gives the orthogonally invariant distribution.
pub fn random_orthonormal(p: usize, r: usize, seed: u64) -> Result<Subspace> {
    random_orthonormal_from(p, r, &CounterRng::stream(seed, "linalg.orthonormal", 0))
}

/// As [`random_orthonormal`], drawing entry `(i, j)` from counter `i·r + j`
/// of `rng`.
pub fn random_orthonormal_from(p: usize, r: usize, rng: &CounterRng) -> Result<Subspace> {
    if r == 0 || r > p {
        return Err(Error::param(format!("cannot draw {r} orthonormal columns in dimension {p}")));
    }
    let mut cols: Vec<Vec<f64>> = (0..r)
        .map(|j| (0..p).map(|i| rng.normal_at((i * r + j) as u64)).collect())
        .collect();
    for j in 0..r {
        let (done, rest) = cols.split_at_mut(j);
        let c = &mut rest[0];
        // Reorthogonalize once; the projection coefficients of the second
        // pass are O(eps) so the triangular diagonal stays positive.
        for _ in 0..2 {
            for q in done.iter() {
                let d = dot(q, c);
                axpy(-d, q, c);
            }
        }
        let norm = dot(c, c).sqrt();
        if norm <= 1e-300 {
            return Err(Error::param("degenerate Gaussian draw"));
        }
        c.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(Subspace::new_unchecked(Matrix::from_columns(p, &cols)))
}

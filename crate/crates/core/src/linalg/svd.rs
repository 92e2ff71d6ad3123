//! Singular value decomposition by Householder QR followed by one-sided
//! (Hestenes) Jacobi rotations on the triangular factor.
//!
//! Wide inputs are handled through their transpose. Only the `n x n`
//! triangular factor is rotated, so a `100 x 10000` unfolding costs one QR of
//! its transpose plus a `100 x 100` Jacobi solve.

use super::matrix::{axpy, dot, Matrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `M = U · diag(sigma) · Vᵀ` with `s = min(rows, cols)` triplets.
///
/// `sigma` is nonincreasing; zero singular values are retained. Each column
/// of `u` has its largest-magnitude entry positive (first such entry on
/// ties), with the matching column of `v` flipped accordingly.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl SvdFactors {
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// `U · diag(sigma) · Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        let k = self.sigma.len();
        for i in 0..us.rows() {
            for j in 0..k {
                us[(i, j)] *= self.sigma[j];
            }
        }
        us.matmul_t(&self.v).expect("consistent factor shapes")
    }

    /// Leading `r` triplets.
    pub fn truncate(&self, r: usize) -> Result<SvdFactors> {
        if r == 0 || r > self.sigma.len() {
            return Err(Error::param(format!(
                "truncation rank {r} outside 1..={}",
                self.sigma.len()
            )));
        }
        Ok(SvdFactors {
            u: self.u.leading_columns(r),
            sigma: self.sigma[..r].to_vec(),
            v: self.v.leading_columns(r),
        })
    }
}

/// Full thin SVD of `m`.
pub fn svd(m: &Matrix) -> Result<SvdFactors> {
    let (rows, cols) = m.shape();
    if rows >= cols {
        let t = tall_svd(m.columns(), rows, true, true).ok_or(Error::Convergence { rows, cols })?;
        let mut f = SvdFactors { u: t.u.unwrap(), sigma: t.sigma, v: t.v.unwrap() };
        canonicalize_signs(&mut f.u, Some(&mut f.v));
        Ok(f)
    } else {
        let t = tall_svd(row_vectors(m), cols, true, true).ok_or(Error::Convergence { rows, cols })?;
        let mut f = SvdFactors { u: t.v.unwrap(), sigma: t.sigma, v: t.u.unwrap() };
        canonicalize_signs(&mut f.u, Some(&mut f.v));
        Ok(f)
    }
}

/// Leading `r` singular triplets of `m` (rank-`r` truncated SVD).
///
/// `r` may exceed the numerical rank; the extra triplets carry zero
/// singular values and an arbitrary orthonormal completion.
pub fn truncated_svd(m: &Matrix, r: usize) -> Result<SvdFactors> {
    let s = m.rows().min(m.cols());
    if r == 0 || r > s {
        return Err(Error::param(format!("truncation rank {r} outside 1..={s}")));
    }
    svd(m)?.truncate(r)
}

/// Singular values of `m` in nonincreasing order, length `min(rows, cols)`.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    let (rows, cols) = m.shape();
    let t = if rows >= cols {
        tall_svd(m.columns(), rows, false, false)
    } else {
        tall_svd(row_vectors(m), cols, false, false)
    };
    t.map(|t| t.sigma).ok_or(Error::Convergence { rows, cols })
}

/// All `min(rows, cols)` left singular vectors of `m`, sign-canonicalized
/// exactly as in [`svd`], together with the singular values.
///
/// For wide matrices the right factor of the transpose's QR is never formed,
/// which makes this the cheap path for tensor unfoldings.
pub fn left_singular_basis(m: &Matrix) -> Result<(Matrix, Vec<f64>)> {
    let (rows, cols) = m.shape();
    if rows >= cols {
        let f = svd(m)?;
        Ok((f.u, f.sigma))
    } else {
        let t = tall_svd(row_vectors(m), cols, false, true).ok_or(Error::Convergence { rows, cols })?;
        let mut u = t.v.unwrap();
        canonicalize_signs(&mut u, None);
        Ok((u, t.sigma))
    }
}

/// Leading `r` left singular vectors of `m`.
pub fn leading_left_singular_vectors(m: &Matrix, r: usize) -> Result<Matrix> {
    let s = m.rows().min(m.cols());
    if r == 0 || r > s {
        return Err(Error::param(format!("rank {r} outside 1..={s}")));
    }
    Ok(left_singular_basis(m)?.0.leading_columns(r))
}

/// Largest singular value.
pub fn operator_norm(m: &Matrix) -> Result<f64> {
    Ok(singular_values(m)?[0])
}

pub fn frobenius_norm(m: &Matrix) -> f64 {
    m.frobenius_norm()
}

fn row_vectors(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

struct TallSvd {
    u: Option<Matrix>,
    sigma: Vec<f64>,
    v: Option<Matrix>,
}

/// SVD of the `len x n` matrix with the given columns, `len >= n`.
/// Returns `None` if Jacobi fails to converge.
fn tall_svd(mut cols: Vec<Vec<f64>>, len: usize, want_u: bool, want_v: bool) -> Option<TallSvd> {
    let n = cols.len();
    debug_assert!(len >= n);
    let qr = householder_qr(&mut cols, len);

    // Columns of the triangular factor, each of length n.
    let mut w: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i <= j { cols[j][i] } else { 0.0 }).collect())
        .collect();
    let mut v: Option<Vec<Vec<f64>>> = want_v.then(|| {
        (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect()
    });

    if !jacobi_sweeps(&mut w, v.as_deref_mut()) {
        return None;
    }

    let norms: Vec<f64> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    let v = v.map(|v| {
        let sorted: Vec<Vec<f64>> = order.iter().map(|&j| v[j].clone()).collect();
        Matrix::from_columns(n, &sorted)
    });

    let u = want_u.then(|| {
        let mut ur: Vec<Vec<f64>> = order
            .iter()
            .map(|&j| {
                let s = norms[j];
                if s > 0.0 {
                    w[j].iter().map(|x| x / s).collect()
                } else {
                    vec![0.0; n]
                }
            })
            .collect();
        orthonormalize_with_completion(&mut ur);
        let full: Vec<Vec<f64>> = ur
            .into_iter()
            .map(|c| {
                let mut y = c;
                y.resize(len, 0.0);
                qr.apply_q(&mut y);
                y
            })
            .collect();
        Matrix::from_columns(len, &full)
    });

    Some(TallSvd { u, sigma, v })
}

/// One-sided Jacobi: rotates column pairs until all are mutually orthogonal
/// to working precision. Rotations are accumulated into `v` when given.
fn jacobi_sweeps(w: &mut [Vec<f64>], mut v: Option<&mut [Vec<f64>]>) -> bool {
    let n = w.len();
    if n < 2 {
        return true;
    }
    let len = w[0].len();
    let tol = f64::EPSILON * (len as f64).sqrt();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let (head, tail) = w.split_at_mut(j);
                let (ci, cj) = (&mut head[i], &mut tail[0]);
                let alpha = dot(ci, ci);
                let beta = dot(cj, cj);
                let gamma = dot(ci, cj);
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                rotate(ci, cj, c, s);
                if let Some(v) = v.as_deref_mut() {
                    let (vh, vt) = v.split_at_mut(j);
                    rotate(&mut vh[i], &mut vt[0], c, s);
                }
            }
        }
        if !rotated {
            return true;
        }
    }
    false
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

struct HouseholderQr {
    /// Reflector `k` acts on entries `k..len` as `I − beta vvᵀ`.
    reflectors: Vec<(Vec<f64>, f64)>,
}

impl HouseholderQr {
    /// `y ← Q y` for a length-`len` vector.
    fn apply_q(&self, y: &mut [f64]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let seg = &mut y[k..];
            let s = beta * dot(v, seg);
            axpy(-s, v, seg);
        }
    }
}

/// In-place Householder QR of the column set; on return `cols[j][..=j]`
/// holds column `j` of `R`.
fn householder_qr(cols: &mut [Vec<f64>], len: usize) -> HouseholderQr {
    let n = cols.len();
    let mut reflectors = Vec::with_capacity(n);
    for k in 0..n.min(len) {
        let x = &cols[k][k..];
        let norm = dot(x, x).sqrt();
        if norm == 0.0 {
            reflectors.push((Vec::new(), 0.0));
            continue;
        }
        let x0 = x[0];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
        cols[k][k] = alpha;
        for e in cols[k][k + 1..].iter_mut() {
            *e = 0.0;
        }
        if beta != 0.0 {
            for col in cols.iter_mut().skip(k + 1) {
                let seg = &mut col[k..];
                let s = beta * dot(&v, seg);
                axpy(-s, &v, seg);
            }
        }
        reflectors.push((v, beta));
    }
    HouseholderQr { reflectors }
}

/// Modified Gram–Schmidt (two passes) over the columns in order; any column
/// that collapses is replaced by the standard basis direction with the
/// largest residual, so the result is always a full orthonormal set.
pub(crate) fn orthonormalize_with_completion(cols: &mut [Vec<f64>]) {
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let c = &mut rest[0];
        let before = dot(c, c).sqrt();
        for _ in 0..2 {
            for q in done.iter() {
                let p = dot(q, c);
                axpy(-p, q, c);
            }
        }
        let after = dot(c, c).sqrt();
        if before > 0.0 && after > 0.5 * before && after > 1e-300 {
            c.iter_mut().for_each(|x| *x /= after);
        } else {
            *c = completion_vector(done, c.len());
        }
    }
}

/// A unit vector orthogonal to the given orthonormal set.
pub(crate) fn completion_vector(basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        for _ in 0..2 {
            for q in basis {
                let p = dot(q, &e);
                axpy(-p, q, &mut e);
            }
        }
        let norm = dot(&e, &e).sqrt();
        if best.as_ref().is_none_or(|(b, _)| norm > *b) {
            best = Some((norm, e));
        }
    }
    let (norm, mut e) = best.expect("completion requires dim > basis size");
    e.iter_mut().for_each(|x| *x /= norm);
    e
}

/// Makes the largest-magnitude entry of each column of `u` positive,
/// flipping the matching column of `v`.
fn canonicalize_signs(u: &mut Matrix, mut v: Option<&mut Matrix>) {
    let (rows, cols) = u.shape();
    for j in 0..cols {
        let mut best = 0.0_f64;
        let mut sign = 1.0;
        for i in 0..rows {
            let x = u[(i, j)];
            if x.abs() > best {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            for i in 0..rows {
                u[(i, j)] = -u[(i, j)];
            }
            if let Some(v) = v.as_deref_mut() {
                for i in 0..v.rows() {
                    v[(i, j)] = -v[(i, j)];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
        let rng = CounterRng::stream(seed, "test.gaussian", 0);
        Matrix::from_fn(rows, cols, |i, j| rng.normal_at((i * cols + j) as u64))
    }

    fn check_factors(m: &Matrix, f: &SvdFactors) {
        let s = m.rows().min(m.cols());
        assert_eq!(f.sigma.len(), s);
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(f.sigma.iter().all(|&x| x >= 0.0));
        assert!(f.u.orthonormality_defect() <= 1e-10, "U defect {}", f.u.orthonormality_defect());
        assert!(f.v.orthonormality_defect() <= 1e-10, "V defect {}", f.v.orthonormality_defect());
        let err = f.reconstruct().sub(m).unwrap().frobenius_norm();
        assert!(err <= 1e-8 * m.frobenius_norm().max(1e-300), "reconstruction {err}");
    }

    #[test]
    fn diagonal_matrix() {
        let m = Matrix::from_diag(3, 3, &[3.0, 2.0, 1.0]);
        let f = svd(&m).unwrap();
        assert_eq!(f.sigma, vec![3.0, 2.0, 1.0]);
        assert_eq!(f.u, Matrix::identity(3));
        assert_eq!(f.v, Matrix::identity(3));
    }

    #[test]
    fn scalar_matrix() {
        let m = Matrix::from_rows(&[[-5.0]]);
        let f = svd(&m).unwrap();
        assert_eq!(f.sigma, vec![5.0]);
        assert_eq!(f.u[(0, 0)], 1.0);
        assert_eq!(f.v[(0, 0)], -1.0);
    }

    #[test]
    fn shapes_and_invariants() {
        for (r, c, seed) in [(5, 3, 1), (3, 5, 2), (1, 7, 3), (7, 1, 4), (20, 20, 5), (40, 6, 6)] {
            let m = gaussian(r, c, seed);
            check_factors(&m, &svd(&m).unwrap());
        }
    }

    #[test]
    fn rank_deficient_inputs_get_orthonormal_completion() {
        let z = Matrix::zeros(4, 3);
        let f = svd(&z).unwrap();
        assert_eq!(f.sigma, vec![0.0; 3]);
        check_factors(&z, &f);

        // rank one 6x4
        let u = [1.0, 2.0, 0.0, -1.0, 0.5, 3.0];
        let v = [0.5, -1.0, 2.0, 1.0];
        let m = Matrix::from_fn(6, 4, |i, j| u[i] * v[j]);
        let f = svd(&m).unwrap();
        check_factors(&m, &f);
        assert!(f.sigma[1] <= 1e-14 * f.sigma[0]);
    }

    #[test]
    fn truncation_residual_is_singular_tail() {
        let m = Matrix::from_diag(3, 3, &[3.0, 2.0, 1.0]);
        let t = truncated_svd(&m, 2).unwrap();
        assert_eq!(t.reconstruct(), Matrix::from_diag(3, 3, &[3.0, 2.0, 0.0]));
        assert_eq!(m.sub(&t.reconstruct()).unwrap().frobenius_norm(), 1.0);
        assert!(truncated_svd(&m, 0).is_err());
        assert!(truncated_svd(&m, 4).is_err());

        let g = gaussian(6, 4, 9);
        let full = truncated_svd(&g, 4).unwrap();
        assert!(full.reconstruct().sub(&g).unwrap().frobenius_norm() <= 1e-10 * g.frobenius_norm());
    }

    #[test]
    fn left_basis_matches_full_svd() {
        for (r, c) in [(4, 30), (30, 4), (6, 6)] {
            let m = gaussian(r, c, 17);
            let (u, s) = left_singular_basis(&m).unwrap();
            let f = svd(&m).unwrap();
            assert_eq!(s, f.sigma);
            assert_eq!(u, f.u);
            assert_eq!(singular_values(&m).unwrap(), f.sigma);
        }
    }

    #[test]
    fn operator_norm_of_rank_one() {
        let u = [0.6, 0.8];
        let v = [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0];
        let m = Matrix::from_fn(2, 3, |i, j| u[i] * v[j]);
        assert!((operator_norm(&m).unwrap() - 1.0).abs() <= 1e-12);
        assert!((m.frobenius_norm() - 1.0).abs() <= 1e-12);
        assert_eq!(operator_norm(&Matrix::zeros(2, 2)).unwrap(), 0.0);
    }
}

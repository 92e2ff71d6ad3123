use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use super::{mode_product, Mode, Tensor3};
use crate::error::{Error, Result};
use crate::linalg::{dot, Subspace};

/// Arithmetic cost; one multiply-add counts as 2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlopCount(pub u64);

impl Add for FlopCount {
    type Output = FlopCount;

    fn add(self, rhs: FlopCount) -> FlopCount {
        FlopCount(self.0 + rhs.0)
    }
}

impl AddAssign for FlopCount {
    fn add_assign(&mut self, rhs: FlopCount) {
        self.0 += rhs.0;
    }
}

impl Sum for FlopCount {
    fn sum<I: Iterator<Item = FlopCount>>(iter: I) -> FlopCount {
        iter.fold(FlopCount(0), Add::add)
    }
}

impl fmt::Display for FlopCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} flops", self.0)
    }
}

/// Core tensor `S` (`r1 x r2 x r3`) with orthonormal factors `U_k`
/// (`p_k x r_k`), representing `S ×₁ U₁ ×₂ U₂ ×₃ U₃`.
#[derive(Clone, Debug, PartialEq)]
pub struct TuckerDecomposition {
    core: Tensor3,
    factors: [Subspace; 3],
}

impl TuckerDecomposition {
    pub fn new(core: Tensor3, factors: [Subspace; 3]) -> Result<Self> {
        let ranks = core.dims();
        for (k, f) in factors.iter().enumerate() {
            if f.rank() != ranks[k] {
                return Err(Error::param(format!(
                    "factor {} has rank {} but the core has {} along that mode",
                    k + 1,
                    f.rank(),
                    ranks[k]
                )));
            }
        }
        Ok(Self { core, factors })
    }

    pub fn core(&self) -> &Tensor3 {
        &self.core
    }

    pub fn factors(&self) -> &[Subspace; 3] {
        &self.factors
    }

    pub fn ranks(&self) -> [usize; 3] {
        self.core.dims()
    }

    pub fn dims(&self) -> [usize; 3] {
        [0, 1, 2].map(|k| self.factors[k].ambient_dim())
    }

    /// Scalars needed to store the representation: `Σ p_k r_k + r1 r2 r3`.
    pub fn storage(&self) -> usize {
        let [p, r] = [self.dims(), self.ranks()];
        (0..3).map(|k| p[k] * r[k]).sum::<usize>() + r.iter().product::<usize>()
    }

    /// Dense tensor `S ×₁ U₁ ×₂ U₂ ×₃ U₃`.
    pub fn reconstruct(&self) -> Tensor3 {
        let mut t = self.core.clone();
        for mode in Mode::ALL {
            t = mode_product(&t, mode, self.factors[mode.index()].basis())
                .expect("factor shapes validated at construction");
        }
        t
    }
}

/// Dense tensor represented by `t`; see [`TuckerDecomposition::reconstruct`].
pub fn tucker_reconstruct(t: &TuckerDecomposition) -> Tensor3 {
    t.reconstruct()
}

fn check_lengths(dims: [usize; 3], v: [&[f64]; 3]) -> Result<()> {
    for k in 0..3 {
        if v[k].len() != dims[k] {
            return Err(Error::param(format!(
                "vector {} has length {} but mode {} has dimension {}",
                k + 1,
                v[k].len(),
                k + 1,
                dims[k]
            )));
        }
    }
    Ok(())
}

/// `X ×₁ v₁ ×₂ v₂ ×₃ v₃` on the dense tensor; costs `2 p1 p2 p3`.
pub fn contract_vectors_dense(x: &Tensor3, v1: &[f64], v2: &[f64], v3: &[f64]) -> Result<(f64, FlopCount)> {
    let [p1, p2, p3] = x.dims();
    check_lengths(x.dims(), [v1, v2, v3])?;
    let data = x.as_slice();
    let mut value = 0.0;
    for i in 0..p1 {
        let mut inner = 0.0;
        for j in 0..p2 {
            let fiber = &data[(i * p2 + j) * p3..(i * p2 + j + 1) * p3];
            inner += v2[j] * dot(fiber, v3);
        }
        value += v1[i] * inner;
    }
    Ok((value, FlopCount(2 * (p1 * p2 * p3) as u64)))
}

/// The same contraction through the factors:
///
/// ```text
/// t_k = U_kᵀ v_k        2 Σ p_k r_k
/// S'  = S ×₁ t₁         2 r1 r2 r3
/// s   = t₂ᵀ S'          2 r2 r3
/// w   = sᵀ t₃           r3
/// ```
pub fn contract_vectors_tucker(
    t: &TuckerDecomposition,
    v1: &[f64],
    v2: &[f64],
    v3: &[f64],
) -> Result<(f64, FlopCount)> {
    check_lengths(t.dims(), [v1, v2, v3])?;
    let [r1, r2, r3] = t.ranks();
    let vs = [v1, v2, v3];
    let mut flops = FlopCount(0);
    let tk: Vec<Vec<f64>> = (0..3)
        .map(|k| {
            let u = t.factors[k].basis();
            flops += FlopCount(2 * (u.rows() * u.cols()) as u64);
            u.t_matvec(vs[k]).expect("lengths checked")
        })
        .collect();

    let core = t.core.as_slice();
    let mut s_prime = vec![0.0; r2 * r3];
    for (i, &w) in tk[0].iter().enumerate() {
        let slab = &core[i * r2 * r3..(i + 1) * r2 * r3];
        for (o, &c) in s_prime.iter_mut().zip(slab) {
            *o += w * c;
        }
    }
    flops += FlopCount(2 * (r1 * r2 * r3) as u64);

    let mut s = vec![0.0; r3];
    for (j, &w) in tk[1].iter().enumerate() {
        for (o, &c) in s.iter_mut().zip(&s_prime[j * r3..(j + 1) * r3]) {
            *o += w * c;
        }
    }
    flops += FlopCount(2 * (r2 * r3) as u64);

    let value = dot(&s, &tk[2]);
    flops += FlopCount(r3 as u64);
    Ok((value, flops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn unit(n: usize, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    }

    #[test]
    fn all_ones_dense_contraction() {
        let x = Tensor3::from_fn([2, 2, 2], |_, _, _| 1.0);
        let ones = [1.0, 1.0];
        let (v, f) = contract_vectors_dense(&x, &ones, &ones, &ones).unwrap();
        assert_eq!(v, 8.0);
        assert_eq!(f, FlopCount(16));
    }

    #[test]
    fn delta_vectors_select_an_entry() {
        let x = Tensor3::from_fn([3, 4, 2], |i, j, k| (i * 100 + j * 10 + k) as f64);
        let (v, _) = contract_vectors_dense(&x, &unit(3, 2), &unit(4, 1), &unit(2, 1)).unwrap();
        assert_eq!(v, 211.0);
        assert!(contract_vectors_dense(&x, &unit(2, 0), &unit(4, 1), &unit(2, 1)).is_err());
    }

    #[test]
    fn rank_one_reconstruction() {
        let u = Subspace::new(Matrix::from_rows(&[[0.6], [0.8]])).unwrap();
        let v = Subspace::new(Matrix::from_rows(&[[1.0], [0.0], [0.0]])).unwrap();
        let w = Subspace::new(Matrix::from_rows(&[[0.0], [1.0]])).unwrap();
        let t = TuckerDecomposition::new(Tensor3::from_vec([1, 1, 1], vec![2.5]).unwrap(), [u, v, w]).unwrap();
        let expected = Tensor3::outer(&[0.6, 0.8], &[1.0, 0.0, 0.0], &[0.0, 1.0]).scale(2.5);
        assert_eq!(t.reconstruct(), expected);
    }

    #[test]
    fn identity_factors_give_the_core() {
        let core = Tensor3::from_fn([2, 3, 2], |i, j, k| (i + j * k) as f64);
        let f = [2, 3, 2].map(|p| Subspace::new(Matrix::identity(p)).unwrap());
        let t = TuckerDecomposition::new(core.clone(), f).unwrap();
        assert_eq!(t.reconstruct(), core);
        let (a, _) = contract_vectors_dense(&core, &[1.0, 2.0], &[0.5, -1.0, 1.0], &[3.0, 1.0]).unwrap();
        let (b, _) = contract_vectors_tucker(&t, &[1.0, 2.0], &[0.5, -1.0, 1.0], &[3.0, 1.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tucker_flop_formula() {
        let p = 100;
        let f = [0, 1, 2].map(|_| Subspace::coordinate(p, 5).unwrap());
        let t = TuckerDecomposition::new(Tensor3::zeros([5, 5, 5]), f).unwrap();
        let v = vec![1.0; p];
        let (_, flops) = contract_vectors_tucker(&t, &v, &v, &v).unwrap();
        assert_eq!(flops, FlopCount(3305));
        assert_eq!(t.storage(), 1500 + 125);
    }

    #[test]
    fn rank_mismatch_is_rejected() {
        let f = [0, 1, 2].map(|_| Subspace::coordinate(4, 2).unwrap());
        assert!(TuckerDecomposition::new(Tensor3::zeros([2, 3, 2]), f).is_err());
    }
}

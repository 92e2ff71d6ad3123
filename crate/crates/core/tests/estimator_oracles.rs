mod common;

use common::{gaussian_matrix, gaussian_tensor, int_in, matrix_with_spectrum, random_tucker};
use nalgebra::DMatrix;
use tucker_denoise::bounds::thm2_bound;
use tucker_denoise::estimators::{
    hooi_refine, matrix_bias, one_step_hosvd, sample_cov_truncated, tucker_bias_bracket, truncated_svd_estimate,
    TargetRanks,
};
use tucker_denoise::linalg::{operator_norm, singular_values, Matrix};
use tucker_denoise::rng::CounterRng;
use tucker_denoise::tensor::{tucker_rank, Tensor3};

// ---------- straight-line Algorithm 1 oracle on nalgebra ----------

fn unfold(x: &Tensor3, mode: usize) -> DMatrix<f64> {
    let [p1, p2, p3] = x.dims();
    match mode {
        0 => DMatrix::from_fn(p1, p2 * p3, |i, c| x.get(i, c / p3, c % p3)),
        1 => DMatrix::from_fn(p2, p1 * p3, |j, c| x.get(c / p3, j, c % p3)),
        _ => DMatrix::from_fn(p3, p1 * p2, |k, c| x.get(c / p2, c % p2, k)),
    }
}

/// Leading `r` left singular vectors, sorted by singular value.
fn leading_left(m: &DMatrix<f64>, r: usize) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    DMatrix::from_fn(m.nrows(), r, |i, j| u[(i, idx[j])])
}

fn oracle_one_step(y: &Tensor3, r: [usize; 3]) -> Tensor3 {
    let u0: Vec<DMatrix<f64>> = (0..3).map(|k| leading_left(&unfold(y, k), r[k])).collect();
    let u1 = [
        leading_left(&(unfold(y, 0) * u0[1].kronecker(&u0[2])), r[0]),
        leading_left(&(unfold(y, 1) * u0[0].kronecker(&u0[2])), r[1]),
        leading_left(&(unfold(y, 2) * u0[0].kronecker(&u0[1])), r[2]),
    ];
    let p: Vec<DMatrix<f64>> = u1.iter().map(|u| u * u.transpose()).collect();
    let m1 = &p[0] * unfold(y, 0) * p[1].kronecker(&p[2]);
    let p3 = y.dims()[2];
    Tensor3::from_fn(y.dims(), |i, j, k| m1[(i, j * p3 + k)])
}

#[test]
fn one_step_matches_straight_line_oracle_4x4x4() {
    let y = gaussian_tensor([4, 4, 4], 17, "test.hosvd.y");
    let ours = one_step_hosvd(&y, TargetRanks::uniform(2)).unwrap();
    let oracle = oracle_one_step(&y, [2, 2, 2]);
    let diff = ours.estimate.sub(&oracle).unwrap().as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(diff <= 1e-9, "max diff {diff}");
    let recon = ours.decomposition.reconstruct();
    assert!(recon.sub(&ours.estimate).unwrap().frobenius_norm() <= 1e-10 * ours.estimate.frobenius_norm());
}

#[test]
fn one_step_matches_oracle_on_unequal_shapes() {
    for (t, (dims, r)) in [([5, 3, 4], [2, 3, 2]), ([6, 6, 2], [3, 2, 2]), ([3, 7, 5], [2, 2, 3])].into_iter().enumerate() {
        let y = gaussian_tensor(dims, t as u64, "test.hosvd.shapes");
        let ours = one_step_hosvd(&y, TargetRanks(r)).unwrap();
        let oracle = oracle_one_step(&y, r);
        assert!(ours.estimate.sub(&oracle).unwrap().frobenius_norm() <= 1e-9 * y.frobenius_norm());
    }
}

// ---------- one-step HOSVD properties ----------

#[test]
fn exact_recovery_of_100_tucker_signals() {
    for t in 0..100u64 {
        let rng = CounterRng::stream(t, "test.exact", 0);
        let dims = [0, 1, 2].map(|k| int_in(&rng, k, 2, 9));
        let ranks = [0, 1, 2].map(|k| int_in(&rng, 3 + k as u64, 1, dims[k]));
        // A Tucker core with ranks exceeding the product of the other two is
        // not realisable; clamp to a feasible multilinear rank.
        let ranks = [
            ranks[0].min(ranks[1] * ranks[2]),
            ranks[1].min(ranks[0] * ranks[2]),
            ranks[2].min(ranks[0] * ranks[1]),
        ];
        let x = random_tucker(dims, ranks, t).reconstruct();
        let est = one_step_hosvd(&x, TargetRanks(ranks)).unwrap().estimate;
        let rel = est.sub(&x).unwrap().frobenius_norm() / x.frobenius_norm();
        assert!(rel <= 1e-9, "trial {t}: {dims:?} {ranks:?} rel {rel}");
    }
}

#[test]
fn rank_one_and_full_rank_cases() {
    let x = Tensor3::outer(&[1.0, -2.0, 0.5], &[3.0, 1.0], &[1.0, 1.0, -1.0, 2.0]);
    let est = one_step_hosvd(&x, TargetRanks::uniform(1)).unwrap().estimate;
    assert!(est.sub(&x).unwrap().frobenius_norm() <= 1e-10 * x.frobenius_norm());
    let y = gaussian_tensor([3, 4, 5], 2, "test.full");
    let est = one_step_hosvd(&y, TargetRanks::new(3, 4, 5)).unwrap().estimate;
    assert!(est.sub(&y).unwrap().frobenius_norm() <= 1e-12 * y.frobenius_norm());
    assert!(one_step_hosvd(&y, TargetRanks::new(4, 1, 1)).is_err());
}

#[test]
fn output_rank_idempotence_and_contraction() {
    for t in 0..20u64 {
        let y = gaussian_tensor([6, 5, 4], t, "test.idem");
        let ranks = TargetRanks::new(3, 2, 2);
        let est = one_step_hosvd(&y, ranks).unwrap().estimate;
        assert!(est.frobenius_norm() <= y.frobenius_norm() + 1e-12);
        let tr = tucker_rank(&est, 1e-8).unwrap();
        assert!(tr.iter().zip(ranks.0).all(|(&a, b)| a <= b), "{tr:?}");
        let again = one_step_hosvd(&est, ranks).unwrap().estimate;
        assert!((again.frobenius_norm() - est.frobenius_norm()).abs() <= 1e-8 * est.frobenius_norm());

        let m = gaussian_matrix(8, 6, t, "test.idem.m");
        assert!(truncated_svd_estimate(&m, 3).unwrap().frobenius_norm() <= m.frobenius_norm() + 1e-12);
    }
}

// ---------- truncated SVD and Theorem 2 ----------

#[test]
fn truncated_svd_cases() {
    let d = Matrix::from_diag(3, 3, &[3.0, 2.0, 1.0]);
    assert!(truncated_svd_estimate(&d, 1).unwrap().sub(&Matrix::from_diag(3, 3, &[3.0, 0.0, 0.0])).unwrap().max_abs() <= 1e-12);
    let m = gaussian_matrix(7, 5, 4, "test.tsvd");
    let sigma = singular_values(&m).unwrap();
    let res = m.sub(&truncated_svd_estimate(&m, 2).unwrap()).unwrap().frobenius_norm();
    assert!((res - matrix_bias(&sigma, 2).upper).abs() <= 1e-9);
    assert!(truncated_svd_estimate(&m, 0).is_err() && truncated_svd_estimate(&m, 6).is_err());
}

#[test]
fn exact_recovery_of_100_low_rank_matrices() {
    for t in 0..100u64 {
        let rng = CounterRng::stream(t, "test.exact.m", 0);
        let (m, n) = (int_in(&rng, 0, 2, 20), int_in(&rng, 1, 2, 20));
        let r = int_in(&rng, 2, 1, m.min(n));
        let sigma: Vec<f64> = (0..r).map(|i| 1.0 + 5.0 * rng.uniform_at(10 + i as u64)).collect();
        let x = matrix_with_spectrum(m, n, &sigma, t);
        let est = truncated_svd_estimate(&x, r).unwrap();
        assert!(est.sub(&x).unwrap().frobenius_norm() <= 1e-9 * x.frobenius_norm(), "trial {t}");
    }
}

#[test]
fn theorem2_deterministic_bound_on_200_instances() {
    for t in 0..200u64 {
        let rng = CounterRng::stream(t, "test.thm2", 0);
        let (m, n) = (int_in(&rng, 0, 2, 25), int_in(&rng, 1, 2, 25));
        let s = m.min(n);
        // Even trials: full-rank geometric spectrum; odd: exactly low-rank.
        let sigma: Vec<f64> = if t % 2 == 0 {
            let beta = 0.5 + 0.45 * rng.uniform_at(2);
            (0..s).map(|i| 10.0 * beta.powi(i as i32)).collect()
        } else {
            let k = int_in(&rng, 3, 1, s);
            (0..k).map(|i| 1.0 + 10.0 * rng.uniform_at(10 + i as u64)).collect()
        };
        let x = matrix_with_spectrum(m, n, &sigma, t);
        let z = gaussian_matrix(m, n, t, "test.thm2.z").scale(0.01 + 2.0 * rng.uniform_at(4));
        let r = int_in(&rng, 5, 1, s);
        let est = truncated_svd_estimate(&x.add(&z).unwrap(), r).unwrap();
        let err = est.sub(&x).unwrap().frobenius_norm();
        let xi = matrix_bias(&singular_values(&x).unwrap(), r).upper;
        let bound = thm2_bound(r, operator_norm(&z).unwrap(), xi);
        assert!(err <= bound + 1e-8, "trial {t}: {err} > {bound}");
    }
}

// ---------- bias terms ----------

#[test]
fn matrix_bias_cases_and_monotonicity() {
    assert!((matrix_bias(&[3.0, 2.0, 1.0], 1).upper - 5f64.sqrt()).abs() <= 1e-15);
    assert_eq!(matrix_bias(&[3.0, 2.0, 1.0], 3).upper, 0.0);
    assert_eq!(matrix_bias(&[3.0, 2.0, 1.0], 7).upper, 0.0);
    let sigma: Vec<f64> = (1..=15).map(|i| 0.8f64.powi(i)).collect();
    let direct = (11..=15).map(|i| 0.8f64.powi(2 * i)).sum::<f64>().sqrt();
    assert!((matrix_bias(&sigma, 10).upper - direct).abs() <= 1e-12);
    for r in 0..15 {
        assert!(matrix_bias(&sigma, r + 1).lower <= matrix_bias(&sigma, r).lower);
    }
}

#[test]
fn tucker_bracket_properties() {
    for t in 0..20u64 {
        let x = gaussian_tensor([4, 4, 4], t, "test.bracket");
        let b = tucker_bias_bracket(&x, TargetRanks::uniform(2)).unwrap();
        assert!(b.lower <= b.upper + 1e-12);
        let tails: f64 = (0..3)
            .map(|k| {
                let s = leading_sigma(&unfold(&x, k));
                s[2..].iter().map(|v| v * v).sum::<f64>()
            })
            .sum();
        assert!(b.upper <= tails.sqrt() + 1e-9);
        let max_tail = (0..3)
            .map(|k| leading_sigma(&unfold(&x, k))[2..].iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        assert!((b.lower - max_tail).abs() <= 1e-9);

        let full = tucker_bias_bracket(&x, TargetRanks::uniform(4)).unwrap();
        assert!(full.lower <= 1e-10 && full.upper <= 1e-10);
    }
    let d = random_tucker([6, 5, 4], [2, 2, 3], 1);
    let b = tucker_bias_bracket(&d.reconstruct(), TargetRanks::new(2, 2, 3)).unwrap();
    assert!(b.lower <= 1e-10 && b.upper <= 1e-10);
}

#[test]
fn tucker_bracket_lower_is_monotone_in_each_rank() {
    let x = gaussian_tensor([5, 4, 6], 3, "test.bracket.mono");
    for r1 in 1..=5 {
        for r2 in 1..=4 {
            for r3 in 1..=6 {
                let b = tucker_bias_bracket(&x, TargetRanks::new(r1, r2, r3)).unwrap().lower;
                for next in [(r1 + 1, r2, r3), (r1, r2 + 1, r3), (r1, r2, r3 + 1)] {
                    if next.0 <= 5 && next.1 <= 4 && next.2 <= 6 {
                        let n = tucker_bias_bracket(&x, TargetRanks::new(next.0, next.1, next.2)).unwrap().lower;
                        assert!(n <= b, "{next:?}");
                    }
                }
            }
        }
    }
}

fn leading_sigma(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

// ---------- HOOI ----------

#[test]
fn hooi_is_monotone_and_starts_at_hosvd() {
    let x = gaussian_tensor([5, 5, 5], 8, "test.hooi");
    let ranks = TargetRanks::uniform(2);
    let bracket = tucker_bias_bracket(&x, ranks).unwrap();
    let one = hooi_refine(&x, ranks, 1, 0.0).unwrap();
    assert!((one.achieved_error - bracket.upper).abs() <= 1e-12);
    let ten = hooi_refine(&x, ranks, 10, 0.0).unwrap();
    assert!(ten.history.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", ten.history);
    assert!(ten.achieved_error <= bracket.upper + 1e-12 && ten.achieved_error >= bracket.lower - 1e-12);
    assert!(hooi_refine(&x, ranks, 0, 0.0).is_err());

    let low = random_tucker([5, 6, 4], [2, 3, 2], 2).reconstruct();
    assert!(hooi_refine(&low, TargetRanks::new(2, 3, 2), 1, 0.0).unwrap().achieved_error <= 1e-10 * low.frobenius_norm());
}

// ---------- sample covariance ----------

#[test]
fn sample_covariance_concentrates_over_20_seeds() {
    for seed in 0..20u64 {
        let z = gaussian_matrix(10_000, 5, seed, "test.cov");
        let (est, cov) = sample_cov_truncated(&z, 5).unwrap();
        assert_eq!(est, cov);
        let dev = operator_norm(&cov.sub(&Matrix::identity(5)).unwrap()).unwrap();
        assert!(dev <= 0.15, "seed {seed}: {dev}");
    }
}

#[test]
fn sample_covariance_truncation_is_symmetric_psd() {
    let z = gaussian_matrix(1, 4, 2, "test.cov.one");
    let (est, cov) = sample_cov_truncated(&z, 1).unwrap();
    let zz = z.t_matmul(&z).unwrap();
    assert!(cov.sub(&zz).unwrap().max_abs() <= 1e-12 && est.sub(&zz).unwrap().max_abs() <= 1e-10);

    let z = gaussian_matrix(30, 6, 3, "test.cov.psd");
    let (est, _) = sample_cov_truncated(&z, 3).unwrap();
    assert!(est.sub(&est.transpose()).unwrap().max_abs() <= 1e-10);
    let eig = common::to_nalgebra(&est).symmetric_eigen().eigenvalues;
    assert!(eig.iter().all(|&l| l >= -1e-10));
    assert_eq!(eig.iter().filter(|&&l| l > 1e-8).count(), 3);
    assert!(sample_cov_truncated(&z, 7).is_err() && sample_cov_truncated(&z, 0).is_err());
}

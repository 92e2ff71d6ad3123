mod common;

use common::{gaussian_matrix, gaussian_tensor, int_in, random_tucker};
use tucker_denoise::linalg::{kronecker, Matrix};
use tucker_denoise::rng::CounterRng;
use tucker_denoise::synth::{gen_tensor_signal, TensorSignalSpec};
use tucker_denoise::tensor::{
    contract_vectors_dense, contract_vectors_tucker, matricize, mode_product, mode_product_transposed, tensorize,
    tucker_rank, Mode, Tensor3,
};

fn random_dims(rng: &CounterRng, lo: usize, hi: usize) -> [usize; 3] {
    [0, 1, 2].map(|k| int_in(rng, k, lo, hi))
}

#[test]
fn frobenius_norm_is_exact_under_matricize() {
    for t in 0..20u64 {
        let dims = random_dims(&CounterRng::stream(t, "test.dims", 0), 1, 6);
        let x = gaussian_tensor(dims, t, "test.x");
        let sq: f64 = x.as_slice().iter().map(|v| v * v).sum();
        for mode in Mode::ALL {
            let m = matricize(&x, mode);
            let msq: f64 = m.as_slice().iter().map(|v| v * v).sum();
            assert!((msq - sq).abs() <= 1e-12 * sq.max(1.0));
            assert_eq!(tensorize(&m, mode, dims).unwrap(), x);
        }
    }
}

#[test]
fn unfolding_column_order_by_enumeration() {
    let x = Tensor3::from_fn([2, 3, 4], |i, j, k| (100 * (i + 1) + 10 * (j + 1) + (k + 1)) as f64);
    let m1 = matricize(&x, Mode::One);
    let m2 = matricize(&x, Mode::Two);
    let m3 = matricize(&x, Mode::Three);
    for i in 0..2 {
        for j in 0..3 {
            for k in 0..4 {
                let v = x.get(i, j, k);
                assert_eq!(m1[(i, j * 4 + k)], v);
                assert_eq!(m2[(j, i * 4 + k)], v);
                assert_eq!(m3[(k, i * 3 + j)], v);
            }
        }
    }
}

#[test]
fn mode_products_along_distinct_modes_commute() {
    for t in 0..30u64 {
        let rng = CounterRng::stream(t, "test.commute", 0);
        let dims = random_dims(&rng, 1, 5);
        let x = gaussian_tensor(dims, t, "test.x");
        let q = [3, 4, 5].map(|i| int_in(&rng, i, 1, 4));
        let ms: Vec<Matrix> = (0..3).map(|k| gaussian_matrix(q[k], dims[k], t, &format!("m{k}"))).collect();
        for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let (ma, mb) = (Mode::ALL[a], Mode::ALL[b]);
            let l = mode_product(&mode_product(&x, ma, &ms[a]).unwrap(), mb, &ms[b]).unwrap();
            let r = mode_product(&mode_product(&x, mb, &ms[b]).unwrap(), ma, &ms[a]).unwrap();
            assert!(l.sub(&r).unwrap().frobenius_norm() <= 1e-12 * l.frobenius_norm().max(1.0));
        }
    }
}

#[test]
fn mode_product_associativity_and_identity() {
    let x = gaussian_tensor([3, 4, 2], 1, "test.x");
    let m1 = gaussian_matrix(5, 3, 1, "m1");
    let m2 = gaussian_matrix(2, 5, 1, "m2");
    let lhs = mode_product(&mode_product(&x, Mode::One, &m1).unwrap(), Mode::One, &m2).unwrap();
    let rhs = mode_product(&x, Mode::One, &m2.matmul(&m1).unwrap()).unwrap();
    assert!(lhs.sub(&rhs).unwrap().frobenius_norm() <= 1e-12 * lhs.frobenius_norm());
    assert_eq!(mode_product(&x, Mode::Two, &Matrix::identity(4)).unwrap(), x);
}

/// `matricize(X ×₂ Aᵀ ×₃ Bᵀ, 1) = matricize(X, 1)·(A ⊗ B)` and its cyclic
/// counterparts, on 100 random shapes.
#[test]
fn kronecker_compatibility_identity_on_100_instances() {
    for t in 0..100u64 {
        let rng = CounterRng::stream(t, "test.compat", 0);
        let dims = random_dims(&rng, 1, 6);
        let r = [3, 4, 5].map(|i| int_in(&rng, i, 1, 4));
        let x = gaussian_tensor(dims, t, "test.x");
        let a: Vec<Matrix> = (0..3).map(|k| gaussian_matrix(dims[k], r[k], t, &format!("a{k}"))).collect();
        for (mode, (o1, o2)) in [(Mode::One, (1, 2)), (Mode::Two, (0, 2)), (Mode::Three, (0, 1))] {
            let lhs = matricize(
                &mode_product_transposed(
                    &mode_product_transposed(&x, Mode::ALL[o1], &a[o1]).unwrap(),
                    Mode::ALL[o2],
                    &a[o2],
                )
                .unwrap(),
                mode,
            );
            let rhs = matricize(&x, mode).matmul(&kronecker(&a[o1], &a[o2]).unwrap()).unwrap();
            let scale = rhs.max_abs().max(1.0);
            assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-10 * scale, "trial {t}, {mode:?}");
        }
    }
}

#[test]
fn reconstruction_preserves_core_norm() {
    for t in 0..20u64 {
        let rng = CounterRng::stream(t, "test.recon", 0);
        let dims = random_dims(&rng, 2, 7);
        let ranks = [0, 1, 2].map(|k| int_in(&rng, 3 + k as u64, 1, dims[k]));
        let d = random_tucker(dims, ranks, t);
        let x = d.reconstruct();
        assert_eq!(x.dims(), dims);
        assert!((x.frobenius_norm() - d.core().frobenius_norm()).abs() <= 1e-10 * d.core().frobenius_norm());
    }
}

#[test]
fn tucker_contraction_cost_and_value_on_50_shapes() {
    for t in 0..50u64 {
        let rng = CounterRng::stream(t, "test.cost", 0);
        let dims = random_dims(&rng, 2, 12);
        let ranks = [0, 1, 2].map(|k| int_in(&rng, 3 + k as u64, 1, dims[k] - 1));
        let d = random_tucker(dims, ranks, t);
        let v: Vec<Vec<f64>> = (0..3).map(|k| common::gaussian_vec(dims[k], t, &format!("v{k}"))).collect();
        let (dense, fd) = contract_vectors_dense(&d.reconstruct(), &v[0], &v[1], &v[2]).unwrap();
        let (fact, ft) = contract_vectors_tucker(&d, &v[0], &v[1], &v[2]).unwrap();
        let [p1, p2, p3] = dims.map(|p| p as u64);
        let [r1, r2, r3] = ranks.map(|r| r as u64);
        assert_eq!(fd.0, 2 * p1 * p2 * p3);
        assert_eq!(ft.0, 2 * (p1 * r1 + p2 * r2 + p3 * r3) + 2 * r1 * r2 * r3 + 2 * r2 * r3 + r3);
        if dims.iter().all(|&p| p >= 4) && (0..3).all(|k| 2 * ranks[k] <= dims[k]) {
            assert!(ft < fd, "{dims:?} {ranks:?}: {ft} vs {fd}");
        }
        assert!((dense - fact).abs() <= 1e-10 * dense.abs() + 1e-12);
    }
}

/// Factored contraction is not always cheaper: with r_k = p_k − 1 on tiny
/// shapes the core terms dominate.
#[test]
fn tucker_contraction_can_cost_more_on_tiny_shapes() {
    let d = random_tucker([2, 2, 2], [1, 1, 1], 0);
    let v = [1.0, 1.0];
    let (_, fd) = contract_vectors_dense(&d.reconstruct(), &v, &v, &v).unwrap();
    let (_, ft) = contract_vectors_tucker(&d, &v, &v, &v).unwrap();
    assert_eq!((fd.0, ft.0), (16, 17));
    let big = random_tucker([100, 100, 100], [5, 5, 5], 0);
    let w = vec![0.1; 100];
    assert_eq!(contract_vectors_tucker(&big, &w, &w, &w).unwrap().1 .0, 3305);
}

#[test]
fn tucker_contraction_seed_5() {
    let d = random_tucker([6, 5, 4], [3, 2, 2], 5);
    let v: Vec<Vec<f64>> = [6, 5, 4].iter().enumerate().map(|(k, &p)| common::gaussian_vec(p, 5, &format!("v{k}"))).collect();
    let (dense, _) = contract_vectors_dense(&d.reconstruct(), &v[0], &v[1], &v[2]).unwrap();
    let (fact, _) = contract_vectors_tucker(&d, &v[0], &v[1], &v[2]).unwrap();
    assert!((dense - fact).abs() <= 1e-10 * dense.abs() + 1e-12);
}

#[test]
fn tucker_rank_cases() {
    assert_eq!(tucker_rank(&Tensor3::zeros([3, 4, 5]), 1e-10).unwrap(), [0, 0, 0]);
    let x = Tensor3::outer(&[1.0, 2.0], &[0.5, -1.0, 3.0], &[1.0, 1.0, 1.0, 2.0]);
    assert_eq!(tucker_rank(&x, 1e-10).unwrap(), [1, 1, 1]);
    let sig = gen_tensor_signal(&TensorSignalSpec::new(8, 3, 10.0, 4)).unwrap();
    assert_eq!(tucker_rank(&sig, 1e-10).unwrap(), [3, 3, 3]);
    let d = random_tucker([5, 6, 7], [2, 3, 4], 9);
    assert_eq!(tucker_rank(&d.reconstruct(), 1e-10).unwrap(), [2, 3, 4]);
}

//! Property tests: the sparse kernels agree with dense references on
//! arbitrary inputs, and the structural invariants of the sparse types and
//! the small SVD hold under permutation and round trips.

use proptest::prelude::*;
use svdstream::dense::{DenseTallMatrix, SmallDense};
use svdstream::lcov::LcovSpace;
use svdstream::rng::seeded_orthonormal_tall;
use svdstream::sparse::{sparse_axpy_block, spmv_transpose, SparseMatrix, SparseVector};
use svdstream::svd::small_svd;
use svdstream::testkit::{dense_projected, vec_dot};

fn sparse_vector(dim: usize) -> impl Strategy<Value = SparseVector> {
    proptest::collection::vec((0..dim, -5.0f64..5.0), 0..dim.min(12))
        .prop_map(move |pairs| SparseVector::from_pairs(dim, &pairs))
}

fn sparse_matrix(rows: usize, cols: usize) -> impl Strategy<Value = SparseMatrix> {
    proptest::collection::vec(sparse_vector(rows), cols)
        .prop_map(move |cols_vec| SparseMatrix::from_columns(rows, cols_vec))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Stored sparse vectors keep strictly increasing indices and no zeros.
    #[test]
    fn sparse_vector_invariants(pairs in proptest::collection::vec((0usize..30, -3.0f64..3.0), 0..40)) {
        let v = SparseVector::from_pairs(30, &pairs);
        let idx: Vec<usize> = v.iter().map(|(i, _)| i).collect();
        prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(v.iter().all(|(_, x)| x != 0.0));
        // Dense agreement.
        let mut dense = vec![0.0; 30];
        for (i, x) in pairs { dense[i] += x; }
        for (i, &want) in dense.iter().enumerate() {
            prop_assert!((v.get(i) - want).abs() < 1e-12);
        }
    }

    /// Merged addition and dot products agree with the dense operations.
    #[test]
    fn sparse_ops_match_dense(a in sparse_vector(25), b in sparse_vector(25), alpha in -3.0f64..3.0) {
        let sum = a.add_scaled(alpha, &b);
        let da = a.to_dense();
        let db = b.to_dense();
        for i in 0..25 {
            prop_assert!((sum.get(i) - (da[i] + alpha * db[i])).abs() < 1e-12);
        }
        let dot = a.dot(&b);
        let want = vec_dot(&da, &db);
        prop_assert!((dot - want).abs() < 1e-12 * want.abs().max(1.0));
    }

    /// The gather-based transpose product equals the dense product.
    #[test]
    fn spmv_transpose_matches_dense(m in sparse_matrix(20, 5), seed in 0u64..500) {
        let x = seeded_orthonormal_tall(20, 4, seed).unwrap();
        let got = spmv_transpose(&m, &x).unwrap();
        for i in 0..5 {
            for j in 0..4 {
                let want: f64 = (0..20).map(|t| m.col(i).get(t) * x.get(t, j)).sum();
                prop_assert!((got.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    /// Row-sparse accumulation equals the dense product and touches only
    /// supported rows.
    #[test]
    fn sparse_axpy_matches_dense(b in sparse_matrix(18, 3), seed in 0u64..500) {
        let w = svdstream::rng::seeded_gaussian_small(3, 4, seed);
        let mut y = DenseTallMatrix::zeros(18, 4);
        sparse_axpy_block(&mut y, &b, &w).unwrap();
        for i in 0..18 {
            for j in 0..4 {
                let want: f64 = (0..3).map(|t| b.col(t).get(i) * w.get(t, j)).sum();
                prop_assert!((y.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    /// Singular values are invariant under row and column permutations.
    #[test]
    fn svd_permutation_invariance(seed in 0u64..300, rot in 0usize..5, cot in 0usize..4) {
        let m = svdstream::rng::seeded_gaussian_small(5, 4, seed);
        let perm_rows: Vec<usize> = (0..5).map(|i| (i + rot) % 5).collect();
        let perm_cols: Vec<usize> = (0..4).map(|j| (j + cot) % 4).collect();
        let p = SmallDense::from_fn(5, 4, |i, j| m.get(perm_rows[i], perm_cols[j]));
        let (_, t1, _) = small_svd(&m, 4).unwrap();
        let (_, t2, _) = small_svd(&p, 4).unwrap();
        let scale = t1[0].max(1e-300);
        for (a, b) in t1.iter().zip(&t2) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    /// The tuple inner product is an isometry of the projected space.
    #[test]
    fn lcov_isometry(b1 in sparse_vector(30), b2 in sparse_vector(30), seed in 0u64..200) {
        let u = seeded_orthonormal_tall(30, 3, seed).unwrap();
        let space = LcovSpace::new(&u);
        let x1 = space.lift(&b1).unwrap();
        let x2 = space.lift(&b2).unwrap();
        let got = x1.dot(&x2).unwrap();
        let z1 = dense_projected(&b1, &u);
        let z2 = dense_projected(&b2, &u);
        let want = vec_dot(&z1, &z2);
        let scale = vec_dot(&z1, &z1).sqrt() * vec_dot(&z2, &z2).sqrt();
        prop_assert!((got - want).abs() <= 1e-10 * scale.max(1e-9));
    }

    /// Matrix market text round trip reproduces the matrix exactly.
    #[test]
    fn matrix_market_round_trip(m in sparse_matrix(12, 7)) {
        let mut buf = Vec::new();
        svdstream::mmio::write_matrix_market(&mut buf, &m).unwrap();
        let back = svdstream::mmio::read_matrix_market(std::io::Cursor::new(&buf)).unwrap();
        prop_assert_eq!(m, back);
    }
}

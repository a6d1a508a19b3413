use proptest::prelude::*;
use structmat::displacement::{
    apply_displacement, cauchy_dense, displacement_rank, eliminate, generalized_schur_lu, generator_add,
    generator_multiply, generators_cauchy, generators_toeplitz, identity_product_factors, reconstruct,
    DisplacementOp,
};
use structmat::kernel::{dense_inverse, numerical_rank, orthonormal_factor, toeplitz_dense, DenseMatrix};
use structmat::ops;
use structmat::random::{random_matrix, Rng64};

/// Diagonally dominant random Toeplitz matrix: first column and row.
fn toeplitz_data(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = Rng64::new(seed);
    let mut col: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let mut row: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    col[0] = 2.0 * n as f64;
    row[0] = col[0];
    (col, row)
}

/// Interlaced nodes keep the Cauchy matrix well conditioned.
fn cauchy_nodes(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = Rng64::new(seed);
    let x = (0..n).map(|j| j as f64 + rng.uniform(-0.2, 0.2)).collect();
    let y = (0..n).map(|i| i as f64 + 0.5 + rng.uniform(-0.2, 0.2)).collect();
    (x, y)
}

fn dense_displacement(t: &DenseMatrix, a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    t - &(&(a * t) * &b.transpose())
}

fn shift(n: usize) -> DisplacementOp {
    DisplacementOp::shift(n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn rank_is_similarity_invariant(n in 2usize..=24, seed in any::<u64>()) {
        let (col, row) = toeplitz_data(n, seed);
        let t = toeplitz_dense(&col, &row);
        let z = shift(n).to_dense();
        let (v, _) = orthonormal_factor(&random_matrix(n, n, seed ^ 1));
        let (w, _) = orthonormal_factor(&random_matrix(n, n, seed ^ 2));
        prop_assume!(v.cols() == n && w.cols() == n);
        let a2 = (&v * &z).mul_t(&v);
        let b2 = (&w * &z).mul_t(&w);
        let t2 = (&v * &t).mul_t(&w);
        let before = numerical_rank(&dense_displacement(&t, &z, &z), 1e-9);
        let after = numerical_rank(&dense_displacement(&t2, &a2, &b2), 1e-9);
        prop_assert_eq!(before, after);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn inverse_swaps_the_operators(n in 2usize..=32, seed in any::<u64>()) {
        let (col, row) = toeplitz_data(n, seed);
        let t = toeplitz_dense(&col, &row);
        let z = shift(n);
        prop_assert_eq!(
            displacement_rank(&t, &z, &z, 1e-9).unwrap(),
            displacement_rank(&dense_inverse(&t).unwrap(), &z, &z, 1e-9).unwrap()
        );

        let (x, y) = cauchy_nodes(n, seed);
        let g = generators_cauchy(&x, &y).unwrap();
        let c = cauchy_dense(&x, &y);
        prop_assert_eq!(
            displacement_rank(&c, g.op_a(), g.op_b(), 1e-9).unwrap(),
            displacement_rank(&dense_inverse(&c).unwrap(), g.op_b(), g.op_a(), 1e-9).unwrap()
        );
    }

    #[test]
    fn sum_rank_is_subadditive(n in 2usize..=32, seed in any::<u64>()) {
        let (c1, r1) = toeplitz_data(n, seed);
        let (x, y) = cauchy_nodes(n, seed);
        let z = shift(n);
        // A Toeplitz matrix plus a rank-one update under the shift pair.
        let u = random_matrix(n, 1, seed ^ 3);
        let t1 = toeplitz_dense(&c1, &r1);
        let t2 = u.mul_t(&u);
        let rank = |m: &DenseMatrix| displacement_rank(m, &z, &z, 1e-10).unwrap();
        prop_assert!(rank(&(&t1 + &t2)) <= rank(&t1) + rank(&t2));

        let g = generators_cauchy(&x, &y).unwrap();
        let c = cauchy_dense(&x, &y);
        let d = DenseMatrix::diag(&Rng64::new(seed).vector(n));
        let rank_c = |m: &DenseMatrix| displacement_rank(m, g.op_a(), g.op_b(), 1e-10).unwrap();
        prop_assert!(rank_c(&(&c + &d)) <= rank_c(&c) + rank_c(&d));
    }

    #[test]
    fn generator_sum_matches_dense(n in 2usize..=32, seed in any::<u64>()) {
        let (c1, r1) = toeplitz_data(n, seed);
        let (c2, r2) = toeplitz_data(n, seed ^ 7);
        let g1 = generators_toeplitz(&c1, &r1).unwrap();
        let g2 = generators_toeplitz(&c2, &r2).unwrap();
        let s = generator_add(&g1, &g2).unwrap();
        prop_assert!(s.rank() <= g1.rank() + g2.rank());
        let oracle = &toeplitz_dense(&c1, &r1) + &toeplitz_dense(&c2, &r2);
        prop_assert!(reconstruct(&s).unwrap().rel_diff(&oracle) <= 1e-12);
    }

    #[test]
    fn product_rank_bound(n in 2usize..=32, seed in any::<u64>()) {
        let (c1, r1) = toeplitz_data(n, seed);
        let (c2, r2) = toeplitz_data(n, seed ^ 5);
        let (t1, t2) = (toeplitz_dense(&c1, &r1), toeplitz_dense(&c2, &r2));
        let z = shift(n);
        let zd = z.to_dense();
        let defect = numerical_rank(&(&DenseMatrix::identity(n) - &zd.t_mul(&zd)), 1e-12);
        let rank = |m: &DenseMatrix| displacement_rank(m, &z, &z, 1e-10).unwrap();
        let prod = &t1 * &t2;
        prop_assert!(rank(&prod) <= rank(&t1) + rank(&t2) + defect);

        let g1 = generators_toeplitz(&c1, &r1).unwrap();
        let g2 = generators_toeplitz(&c2, &r2).unwrap();
        let xy = identity_product_factors(&g1).unwrap();
        let g = generator_multiply(&g1, &g2, &xy).unwrap();
        prop_assert!(g.rank() <= g1.rank() + g2.rank() + xy.rank());
        prop_assert!(reconstruct(&g).unwrap().rel_diff(&prod) <= 1e-10);
    }

    #[test]
    fn schur_complements_keep_rank_two(n in 3usize..=40, k in 1usize..3, seed in any::<u64>()) {
        let (col, row) = toeplitz_data(n, seed);
        let t = toeplitz_dense(&col, &row);
        let g = generators_toeplitz(&col, &row).unwrap();
        let (_, _, rest) = eliminate(&g, k, 1e-12).unwrap();
        let t11 = t.submatrix(0, k, 0, k);
        let schur = &t.submatrix(k, n, k, n)
            - &(&(&t.submatrix(k, n, 0, k) * &dense_inverse(&t11).unwrap()) * &t.submatrix(0, k, k, n));
        let zt = shift(n - k);
        prop_assert!(displacement_rank(&schur, &zt, &zt, 1e-10).unwrap() <= 2);
        prop_assert!(rest.rank() <= 2);
        prop_assert!(reconstruct(&rest).unwrap().rel_diff(&schur) <= 1e-11);
    }
}

#[test]
fn cauchy_displacement_is_rank_one_exactly() {
    let (x, y) = cauchy_nodes(16, 3);
    let g = generators_cauchy(&x, &y).unwrap();
    let d = apply_displacement(&cauchy_dense(&x, &y), g.op_a(), g.op_b()).unwrap();
    assert!(d.rel_diff(&g.displacement()) <= 1e-14);
}

#[test]
fn schur_lu_operation_count_is_quadratic() {
    let sizes = [64usize, 128, 256, 512, 1024, 2048];
    let ratios: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let (col, row) = toeplitz_data(n, n as u64);
            let g = generators_toeplitz(&col, &row).unwrap();
            let p = g.rank() as f64;
            let (res, count) = ops::measure(|| generalized_schur_lu(&g, 1e-12));
            res.unwrap();
            count as f64 / ((n * n) as f64 * p)
        })
        .collect();
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let c = (sorted[0] + sorted[sorted.len() - 1]) / 2.0;
    for (n, r) in sizes.iter().zip(&ratios) {
        assert!((r / c - 1.0).abs() <= 0.15, "n = {n}: ratio {r}, fitted c = {c}, all {ratios:?}");
    }
}

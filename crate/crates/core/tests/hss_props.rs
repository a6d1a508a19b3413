use proptest::prelude::*;
use structmat::hss::{
    hss_construct, hss_diagonal_representation_check, hss_hankel_ranks, hss_matvec, hss_sparse_solve_with_stats,
    hss_to_dense, PartitionTree,
};
use structmat::ops;
use structmat::random::{random_hss, random_vector};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tree_sizes_add_up(n in 1usize..5000, leaf in 1usize..300) {
        let t = PartitionTree::build(n, leaf).unwrap();
        prop_assert!(t.leaf_sizes().iter().all(|&s| s <= leaf));
        for c in 0..t.first_leaf() {
            let (a, b) = PartitionTree::children(c);
            prop_assert_eq!(t.size(a) + t.size(b), t.size(c));
            prop_assert!(t.size(a) - t.size(b) <= 1);
        }
        for k in 0..=t.depth() {
            prop_assert_eq!(t.level_sizes(k).iter().sum::<usize>(), n);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bases_nest(n in 2usize..200, leaf in 1usize..20, rank in 0usize..4, seed in any::<u64>()) {
        let t = PartitionTree::build(n, leaf).unwrap();
        let h = random_hss(&t, rank, 1.0, seed);
        let (ub, vb) = (h.row_bases(), h.col_bases());
        for c in 0..t.first_leaf() {
            let (l, r) = PartitionTree::children(c);
            prop_assert_eq!(&ub[c], &(&ub[l] * h.r(l)).vstack(&(&ub[r] * h.r(r))));
            prop_assert_eq!(&vb[c], &(&vb[l] * h.w(l)).vstack(&(&vb[r] * h.w(r))));
        }
    }

    #[test]
    fn round_trip_with_optimal_ranks(n in 16usize..=512, leaf in 8usize..64, rank in 1usize..4, seed in any::<u64>()) {
        let t = PartitionTree::build(n, leaf).unwrap();
        let a = hss_to_dense(&random_hss(&t, rank, 1.0, seed));
        let h = hss_construct(&a, &t, 1e-10).unwrap();
        prop_assert!(hss_to_dense(&h).rel_diff(&a) <= 1e-10);
        let (rows, cols) = hss_hankel_ranks(&a, &t, 1e-10);
        prop_assert_eq!(h.row_ranks(), rows);
        prop_assert_eq!(h.col_ranks(), cols);
    }

    #[test]
    fn diagonal_representation_equals_dense(n in 2usize..=64, leaf in 1usize..12, rank in 0usize..4, seed in any::<u64>()) {
        let t = PartitionTree::build(n, leaf).unwrap();
        let h = random_hss(&t, rank, 1.0, seed);
        let via_formula = hss_diagonal_representation_check(&h).unwrap();
        prop_assert!(via_formula.rel_diff(&hss_to_dense(&h)) <= 1e-12);
    }

    #[test]
    fn sparse_solve_is_fill_free(n in 2usize..=300, leaf in 2usize..32, rank in 0usize..4, seed in any::<u64>()) {
        let t = PartitionTree::build(n, leaf).unwrap();
        let h = random_hss(&t, rank, 3.0, seed);
        let b = random_vector(n, seed ^ 1);
        let (x, stats) = hss_sparse_solve_with_stats(&h, &b, 1e-14).unwrap();
        prop_assert_eq!(stats.fill_in_blocks, 0);
        prop_assert_eq!(stats.fill_in_entries, 0);
        let r = hss_matvec(&h, &x).unwrap();
        let err: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|q| q * q).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-8 * nb);
    }
}

fn assert_linear(label: &str, sizes: &[usize], counts: &[u64]) {
    let ratios: Vec<f64> = sizes.iter().zip(counts).map(|(&n, &c)| c as f64 / n as f64).collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let c = (lo + hi) / 2.0;
    assert!(ratios.iter().all(|r| (r / c - 1.0).abs() <= 0.2), "{label}: ratios {ratios:?}");
}

#[test]
fn matvec_and_solve_scale_linearly() {
    let sizes: Vec<usize> = (8..=13).map(|k| 1usize << k).collect();
    let mut mv = Vec::new();
    let mut sv = Vec::new();
    for &n in &sizes {
        let t = PartitionTree::build(n, 32).unwrap();
        let h = random_hss(&t, 4, 3.0, n as u64);
        let x = random_vector(n, 2);
        let (y, c) = ops::measure(|| hss_matvec(&h, &x).unwrap());
        mv.push(c);
        let ((z, stats), c) = ops::measure(|| hss_sparse_solve_with_stats(&h, &y, 1e-14).unwrap());
        assert_eq!(stats.fill_in_blocks, 0);
        let err = z.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-8, "n = {n}: error {err}");
        sv.push(c);
    }
    assert_linear("matvec", &sizes, &mv);
    assert_linear("solve", &sizes, &sv);
}

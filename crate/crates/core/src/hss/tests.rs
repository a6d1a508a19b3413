use super::*;
use crate::kernel::{dense_inverse, dense_lu_no_pivot, numerical_rank};
use crate::random::{random_hss, random_vector};

fn vec_rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// Kernel matrix made diagonally dominant by a shift of `2n`.
fn shifted_kernel(n: usize) -> DenseMatrix {
    let mut a = separated_kernel(n);
    for i in 0..n {
        a[(i, i)] += 2.0 * n as f64;
    }
    a
}

fn all_ranks(h: &HssForm) -> Vec<usize> {
    h.row_ranks().into_iter().chain(h.col_ranks()).collect()
}

/// Two leaves of size two, ranks one, hand-chosen entries.
fn hand_hss() -> HssForm {
    let tree = PartitionTree::build(4, 2).unwrap();
    let m = |rows: &[&[f64]]| DenseMatrix::from_rows(rows);
    HssForm::new(
        tree,
        vec![m(&[&[4.0, 1.0], &[2.0, 5.0]]), m(&[&[3.0, -1.0], &[1.0, 6.0]])],
        vec![m(&[&[1.0], &[2.0]]), m(&[&[-1.0], &[1.0]])],
        vec![m(&[&[0.5], &[1.0]]), m(&[&[2.0], &[-1.0]])],
        vec![DenseMatrix::zeros(0, 0), DenseMatrix::zeros(1, 0), DenseMatrix::zeros(1, 0)],
        vec![DenseMatrix::zeros(0, 0), DenseMatrix::zeros(1, 0), DenseMatrix::zeros(1, 0)],
        vec![DenseMatrix::zeros(0, 0), m(&[&[0.25]]), m(&[&[-0.5]])],
    )
    .unwrap()
}

fn hand_dense() -> DenseMatrix {
    // A_01 = U_0 B_1 V_1^T = [1; 2] 0.25 [2, -1], A_10 = U_1 B_2 V_0^T = [-1; 1] (-0.5) [0.5, 1].
    DenseMatrix::from_rows(&[
        &[4.0, 1.0, 0.5, -0.25],
        &[2.0, 5.0, 1.0, -0.5],
        &[0.25, 0.5, 3.0, -1.0],
        &[-0.25, -0.5, 1.0, 6.0],
    ])
}

#[test]
fn construct_zero_matrix() {
    let tree = PartitionTree::build(32, 4).unwrap();
    let h = hss_construct(&DenseMatrix::zeros(32, 32), &tree, 1e-10).unwrap();
    assert_eq!(h.max_rank(), 0);
    assert!((0..tree.num_leaves()).all(|i| h.d(i).max_abs() == 0.0));
}

#[test]
fn construct_block_diagonal() {
    let tree = PartitionTree::build(24, 6).unwrap();
    let a = DenseMatrix::from_fn(24, 24, |i, j| if i / 6 == j / 6 { (i * 7 + j) as f64 } else { 0.0 });
    let h = hss_construct(&a, &tree, 1e-10).unwrap();
    assert_eq!(h.max_rank(), 0);
    assert_eq!(hss_to_dense(&h), a);
}

#[test]
fn construct_kernel_256() {
    let a = separated_kernel(256);
    let tree = PartitionTree::build(256, 16).unwrap();
    let h = hss_construct(&a, &tree, 1e-10).unwrap();
    assert!(h.max_rank() <= 10, "max rank {}", h.max_rank());
    assert!(hss_to_dense(&h).rel_diff(&a) <= 1e-9);
}

#[test]
fn construct_ranks_are_optimal() {
    for (n, leaf, rank, seed) in [(64, 8, 2, 1), (128, 16, 3, 2), (200, 16, 4, 3)] {
        let tree = PartitionTree::build(n, leaf).unwrap();
        let a = hss_to_dense(&random_hss(&tree, rank, 1.0, seed));
        let h = hss_construct(&a, &tree, 1e-10).unwrap();
        let (rows, cols) = hss_hankel_ranks(&a, &tree, 1e-10);
        assert_eq!(h.row_ranks(), rows);
        assert_eq!(h.col_ranks(), cols);
        assert!(hss_to_dense(&h).rel_diff(&a) <= 1e-10);
    }
}

#[test]
fn bases_nest_exactly() {
    let tree = PartitionTree::build(100, 8).unwrap();
    let h = random_hss(&tree, 3, 1.0, 5);
    let ub = h.row_bases();
    let vb = h.col_bases();
    for id in 1..tree.first_leaf() {
        let (l, r) = PartitionTree::children(id);
        assert_eq!(ub[id], (&ub[l] * h.r(l)).vstack(&(&ub[r] * h.r(r))));
        assert_eq!(vb[id], (&vb[l] * h.w(l)).vstack(&(&vb[r] * h.w(r))));
    }
}

#[test]
fn matvec_block_diagonal() {
    let tree = PartitionTree::build(10, 3).unwrap();
    let d: Vec<_> = tree.leaf_sizes().iter().enumerate().map(|(k, &m)| DenseMatrix::identity(m).scale(k as f64 + 1.0)).collect();
    let h = HssForm::block_diagonal(&tree, d).unwrap();
    let x = random_vector(10, 3);
    let y = hss_matvec(&h, &x).unwrap();
    for id in tree.leaf_ids() {
        let k = tree.leaf_index(id) as f64 + 1.0;
        for i in tree.range(id) {
            assert_eq!(y[i], k * x[i]);
        }
    }
}

#[test]
fn matvec_hand_case() {
    let h = hand_hss();
    assert_eq!(hss_to_dense(&h), hand_dense());
    let x = [1.0, -2.0, 3.0, 0.5];
    assert_eq!(hss_matvec(&h, &x).unwrap(), hand_dense().matvec(&x));
}

#[test]
fn matvec_random_1024() {
    let tree = PartitionTree::build(1024, 32).unwrap();
    let h = random_hss(&tree, 4, 1.0, 11);
    let x = random_vector(1024, 12);
    let y = hss_matvec(&h, &x).unwrap();
    assert!(vec_rel(&y, &hss_to_dense(&h).matvec(&x)) <= 1e-11);
}

#[test]
fn matvec_rejects_wrong_length() {
    let tree = PartitionTree::build(8, 2).unwrap();
    assert!(hss_matvec(&HssForm::identity(&tree), &[1.0; 7]).is_err());
}

#[test]
fn zero_coupling_to_dense_is_block_diagonal() {
    let tree = PartitionTree::build(12, 3).unwrap();
    let mut h = random_hss(&tree, 2, 0.0, 4);
    h.b.iter_mut().for_each(|m| *m = m.scale(0.0));
    let a = hss_to_dense(&h);
    for i in 0..12 {
        for j in 0..12 {
            if i / 3 != j / 3 {
                assert_eq!(a[(i, j)], 0.0);
            }
        }
    }
}

#[test]
fn sparse_solve_block_diagonal() {
    let tree = PartitionTree::build(12, 4).unwrap();
    let d: Vec<_> = tree
        .leaf_sizes()
        .iter()
        .enumerate()
        .map(|(k, &m)| DenseMatrix::from_fn(m, m, |i, j| if i == j { 2.0 + k as f64 } else { 0.25 }))
        .collect();
    let h = HssForm::block_diagonal(&tree, d.clone()).unwrap();
    let b = random_vector(12, 9);
    let x = hss_sparse_solve(&h, &b, 1e-14).unwrap();
    for id in tree.leaf_ids() {
        let i = tree.leaf_index(id);
        let xi = crate::kernel::dense_solve(&d[i], &b[tree.range(id)]).unwrap();
        assert!(vec_rel(&x[tree.range(id)], &xi) <= 1e-14);
    }
}

#[test]
fn sparse_solve_kernel_64() {
    let a = shifted_kernel(64);
    let tree = PartitionTree::build(64, 8).unwrap();
    let h = hss_construct(&a, &tree, 1e-12).unwrap();
    let ones = vec![1.0; 64];
    let b = a.matvec(&ones);
    let (x, stats) = hss_sparse_solve_with_stats(&h, &b, 1e-14).unwrap();
    assert_eq!(stats.fill_in_blocks, 0);
    assert!(x.iter().all(|v| (v - 1.0).abs() <= 1e-8));
}

#[test]
fn sparse_solve_random_512() {
    let tree = PartitionTree::build(512, 32).unwrap();
    let h = random_hss(&tree, 4, 2.0, 21);
    let b = random_vector(512, 22);
    let (x, stats) = hss_sparse_solve_with_stats(&h, &b, 1e-14).unwrap();
    assert_eq!(stats.fill_in_blocks, 0);
    assert!(vec_rel(&hss_matvec(&h, &x).unwrap(), &b) <= 1e-8);
}

#[test]
fn sparse_solve_single_leaf() {
    let tree = PartitionTree::build(5, 8).unwrap();
    let d = DenseMatrix::from_fn(5, 5, |i, j| if i == j { 3.0 } else { 1.0 / (1 + i + j) as f64 });
    let h = HssForm::block_diagonal(&tree, vec![d.clone()]).unwrap();
    let b = random_vector(5, 1);
    let x = hss_sparse_solve(&h, &b, 1e-14).unwrap();
    assert!(vec_rel(&d.matvec(&x), &b) <= 1e-14);
}

#[test]
fn diagonal_representation_zero_coupling() {
    let tree = PartitionTree::build(16, 4).unwrap();
    let mut h = random_hss(&tree, 2, 0.0, 8);
    h.b.iter_mut().for_each(|m| *m = m.scale(0.0));
    let d = hss_diagonal_representation_check(&h).unwrap();
    assert_eq!(d, hss_to_dense(&HssForm::block_diagonal(&tree, h.d.clone()).unwrap()));
}

#[test]
fn diagonal_representation_hand_case() {
    let tree = PartitionTree::build(8, 2).unwrap();
    let h = random_hss(&tree, 1, 1.0, 3);
    let a = hss_diagonal_representation_check(&h).unwrap();
    assert!(a.rel_diff(&hss_to_dense(&h)) <= 1e-15);
    assert_eq!(hss_diagonal_representation_check(&hand_hss()).unwrap(), hand_dense());
}

#[test]
fn diagonal_representation_random_32() {
    for seed in 0..5 {
        let tree = PartitionTree::build(32, 4).unwrap();
        let h = random_hss(&tree, 3, 1.0, seed);
        let a = hss_diagonal_representation_check(&h).unwrap();
        assert!(a.rel_diff(&hss_to_dense(&h)) <= 1e-12);
    }
}

#[test]
fn add_zero_and_negation() {
    let tree = PartitionTree::build(64, 8).unwrap();
    let h = random_hss(&tree, 3, 1.0, 30);
    let s = hss_add(&h, &HssForm::zero(&tree)).unwrap();
    assert!(hss_to_dense(&s).rel_diff(&hss_to_dense(&h)) <= 1e-12);
    let z = hss_add(&h, &h.scale(-1.0)).unwrap();
    assert_eq!(z.max_rank(), 0);
}

#[test]
fn add_random_pair_256() {
    let tree = PartitionTree::build(256, 16).unwrap();
    let a = random_hss(&tree, 3, 1.0, 31);
    let b = random_hss(&tree, 2, 1.0, 32);
    let raw = hss_add_uncompressed(&a, &b).unwrap();
    for c in 1..tree.num_nodes() {
        assert_eq!(raw.p(c), a.p(c) + b.p(c));
    }
    let s = hss_add(&a, &b).unwrap();
    let oracle = &hss_to_dense(&a) + &hss_to_dense(&b);
    assert!(hss_to_dense(&s).rel_diff(&oracle) <= 1e-11);
    assert!(s.max_rank() <= 5);
}

#[test]
fn multiply_identity_and_block_diagonal() {
    let tree = PartitionTree::build(48, 6).unwrap();
    let h = random_hss(&tree, 2, 1.0, 40);
    let p = hss_multiply(&h, &HssForm::identity(&tree)).unwrap();
    assert!(hss_to_dense(&p).rel_diff(&hss_to_dense(&h)) <= 1e-12);
    let d1: Vec<_> = tree.leaf_sizes().iter().map(|&m| crate::random::random_matrix(m, m, 1)).collect();
    let d2: Vec<_> = tree.leaf_sizes().iter().map(|&m| crate::random::random_matrix(m, m, 2)).collect();
    let a = HssForm::block_diagonal(&tree, d1.clone()).unwrap();
    let b = HssForm::block_diagonal(&tree, d2.clone()).unwrap();
    let p = hss_multiply(&a, &b).unwrap();
    assert_eq!(p.max_rank(), 0);
    for i in 0..tree.num_leaves() {
        assert!(p.d(i).rel_diff(&(&d1[i] * &d2[i])) <= 1e-14);
    }
}

#[test]
fn multiply_random_pair_256() {
    let tree = PartitionTree::build(256, 16).unwrap();
    let a = random_hss(&tree, 3, 1.0, 41);
    let b = random_hss(&tree, 3, 1.0, 42);
    let (da, db) = (hss_to_dense(&a), hss_to_dense(&b));
    let oracle = &da * &db;
    let raw = hss_multiply_uncompressed(&a, &b).unwrap();
    assert!(hss_to_dense(&raw).rel_diff(&oracle) <= 1e-12);
    let p = hss_multiply(&a, &b).unwrap();
    assert!(hss_to_dense(&p).rel_diff(&oracle) <= 1e-10);
    let (rows, cols) = hss_hankel_ranks(&oracle, &tree, 1e-12);
    for c in 1..tree.num_nodes() {
        assert_eq!(raw.p(c), a.p(c) + b.p(c));
        assert!(rows[c] <= a.p(c) + b.p(c));
        assert!(cols[c] <= a.q(c) + b.q(c));
    }
}

#[test]
fn multiply_rejects_tree_mismatch() {
    let a = HssForm::identity(&PartitionTree::build(16, 4).unwrap());
    let b = HssForm::identity(&PartitionTree::build(16, 2).unwrap());
    assert!(hss_multiply(&a, &b).is_err());
    assert!(hss_add(&a, &b).is_err());
}

#[test]
fn lu_block_diagonal() {
    let tree = PartitionTree::build(16, 4).unwrap();
    let d: Vec<_> = (0..4).map(|k| DenseMatrix::from_fn(4, 4, |i, j| if i <= j { 1.0 + (k + i + j) as f64 } else { 0.0 })).collect();
    let h = HssForm::block_diagonal(&tree, d).unwrap();
    let (l, u) = hss_lu(&h, 1e-14).unwrap();
    assert_eq!(hss_to_dense(&l), DenseMatrix::identity(16));
    assert_eq!(hss_to_dense(&u), hss_to_dense(&h));
}

#[test]
fn lu_kernel_64() {
    let a = shifted_kernel(64);
    let tree = PartitionTree::build(64, 8).unwrap();
    let h = hss_construct(&a, &tree, 1e-12).unwrap();
    let (l, u) = hss_lu(&h, 1e-14).unwrap();
    let (dl, du) = (hss_to_dense(&l), hss_to_dense(&u));
    assert!((&dl * &du).rel_diff(&a) <= 1e-9);
    let (ol, ou) = dense_lu_no_pivot(&a, 1e-14).unwrap();
    assert!(dl.rel_diff(&ol) <= 1e-9);
    assert!(du.rel_diff(&ou) <= 1e-9);
}

#[test]
fn lu_ranks_do_not_grow() {
    let tree = PartitionTree::build(32, 4).unwrap();
    for seed in 0..25 {
        let h = random_hss(&tree, 2, 2.0, 100 + seed);
        let a = hss_to_dense(&h);
        let (ar, ac) = hss_hankel_ranks(&a, &tree, 1e-10);
        let (l, u) = hss_lu(&h, 1e-14).unwrap();
        for f in [&l, &u] {
            let (fr, fc) = hss_hankel_ranks(&hss_to_dense(f), &tree, 1e-10);
            for c in 1..tree.num_nodes() {
                assert!(fr[c] <= ar[c].max(ac[c]) && fc[c] <= ar[c].max(ac[c]), "seed {seed} node {c}");
            }
        }
    }
}

#[test]
fn lu_reports_breakdown() {
    let tree = PartitionTree::build(4, 2).unwrap();
    let d = vec![DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]), DenseMatrix::identity(2)];
    let h = HssForm::block_diagonal(&tree, d).unwrap();
    assert!(matches!(hss_lu(&h, 1e-14), Err(Error::PivotBreakdown { step: 0, .. })));
}

#[test]
fn invert_triangular_identity() {
    let tree = PartitionTree::build(20, 4).unwrap();
    let i = HssForm::identity(&tree);
    for lower in [true, false] {
        assert_eq!(hss_to_dense(&hss_invert_triangular(&i, lower).unwrap()), DenseMatrix::identity(20));
    }
}

#[test]
fn invert_triangular_kernel_factors() {
    let a = shifted_kernel(64);
    let tree = PartitionTree::build(64, 8).unwrap();
    let h = hss_construct(&a, &tree, 1e-12).unwrap();
    let (l, u) = hss_lu(&h, 1e-14).unwrap();
    for (f, lower) in [(&l, true), (&u, false)] {
        let inv = hss_invert_triangular(f, lower).unwrap();
        let oracle = dense_inverse(&hss_to_dense(f)).unwrap();
        assert!(hss_to_dense(&inv).rel_diff(&oracle) <= 1e-9);
    }
}

#[test]
fn invert_triangular_rank_equality() {
    let tree = PartitionTree::build(32, 4).unwrap();
    for seed in 0..25 {
        let h = random_hss(&tree, 2, 2.0, 200 + seed);
        let (l, u) = hss_lu(&h, 1e-14).unwrap();
        for (f, lower) in [(&l, true), (&u, false)] {
            let df = hss_to_dense(f);
            let di = hss_to_dense(&hss_invert_triangular(f, lower).unwrap());
            assert_eq!(hss_hankel_ranks(&df, &tree, 1e-10), hss_hankel_ranks(&di, &tree, 1e-10), "seed {seed}");
        }
    }
}

#[test]
fn invert_triangular_singular_block() {
    let tree = PartitionTree::build(4, 2).unwrap();
    let h = HssForm::block_diagonal(&tree, vec![DenseMatrix::identity(2), DenseMatrix::zeros(2, 2)]).unwrap();
    assert_eq!(hss_invert_triangular(&h, true).unwrap_err(), Error::SingularBlock(1));
}

#[test]
fn invert_identity_and_hand_case() {
    let tree = PartitionTree::build(16, 4).unwrap();
    assert!(hss_to_dense(&hss_invert(&HssForm::identity(&tree)).unwrap()).rel_diff(&DenseMatrix::identity(16)) <= 1e-15);
    let inv = hss_to_dense(&hss_invert(&hand_hss()).unwrap());
    assert!(inv.rel_diff(&dense_inverse(&hand_dense()).unwrap()) <= 1e-14);
}

#[test]
fn invert_kernel_256() {
    let a = shifted_kernel(256);
    let tree = PartitionTree::build(256, 16).unwrap();
    let h = hss_construct(&a, &tree, 1e-12).unwrap();
    let inv = hss_to_dense(&hss_invert(&h).unwrap());
    let res = (&a * &inv).rel_diff(&DenseMatrix::identity(256));
    assert!(res <= 1e-7, "residual {res}");
}

#[test]
fn invert_rank_bound_64() {
    let a = shifted_kernel(64);
    let tree = PartitionTree::build(64, 8).unwrap();
    let h = hss_construct(&a, &tree, 1e-10).unwrap();
    let inv = hss_invert(&h).unwrap();
    for c in 1..tree.num_nodes() {
        assert!(inv.p(c) <= h.p(c) && inv.q(c) <= h.q(c), "node {c}: {} vs {}", inv.p(c), h.p(c));
    }
}

#[test]
fn inverse_hankel_ranks_bounded() {
    // Exact-rank family: numerical ranks of a smooth kernel and of its
    // inverse may straddle the threshold differently.
    let tree = PartitionTree::build(64, 8).unwrap();
    for seed in 0..25 {
        let h = random_hss(&tree, 2, 2.0, 300 + seed);
        let a = hss_to_dense(&h);
        let (ar, ac) = hss_hankel_ranks(&a, &tree, 1e-10);
        let (ir, ic) = hss_hankel_ranks(&dense_inverse(&a).unwrap(), &tree, 1e-10);
        assert!(ir.iter().zip(&ar).all(|(i, a)| i <= a), "{ir:?} {ar:?}");
        assert!(ic.iter().zip(&ac).all(|(i, a)| i <= a), "{ic:?} {ac:?}");
        let inv = hss_invert(&h).unwrap();
        assert!(all_ranks(&inv).iter().zip(all_ranks(&h)).all(|(i, a)| *i <= a), "seed {seed}");
    }
}

#[test]
fn recompress_restores_planted_ranks() {
    let tree = PartitionTree::build(128, 8).unwrap();
    let h = random_hss(&tree, 3, 1.0, 50);
    let doubled = hss_add_uncompressed(&h, &h).unwrap();
    let r = hss_recompress(&doubled, 1e-12);
    assert!(all_ranks(&r).iter().all(|&k| k <= 3));
    assert!(hss_to_dense(&r).rel_diff(&hss_to_dense(&h).scale(2.0)) <= 1e-12);
}

#[test]
fn hankel_rank_helpers_agree_with_blocks() {
    let tree = PartitionTree::build(16, 4).unwrap();
    let a = hss_to_dense(&random_hss(&tree, 1, 1.0, 60));
    let (rows, _) = hss_hankel_ranks(&a, &tree, 1e-10);
    assert_eq!(rows[1], numerical_rank(&row_hankel_block(&a, &tree, 1), 1e-10));
    assert_eq!(col_hankel_block(&a, &tree, 3).shape(), (12, 4));
}

#[test]
fn sum_and_product_hankel_ranks_bounded() {
    let tree = PartitionTree::build(48, 6).unwrap();
    for seed in 0..25 {
        let a = random_hss(&tree, 2, 1.0, 400 + seed);
        let b = random_hss(&tree, 1, 1.0, 500 + seed);
        let (da, db) = (hss_to_dense(&a), hss_to_dense(&b));
        let (ar, ac) = hss_hankel_ranks(&da, &tree, 1e-10);
        let (br, bc) = hss_hankel_ranks(&db, &tree, 1e-10);
        for m in [&da + &db, &da * &db] {
            let (mr, mc) = hss_hankel_ranks(&m, &tree, 1e-10);
            for c in 0..tree.num_nodes() {
                assert!(mr[c] <= ar[c] + br[c] && mc[c] <= ac[c] + bc[c], "seed {seed} node {c}");
            }
        }
    }
}

use super::arith::{sss_add_uncompressed, sss_multiply_uncompressed};
use super::*;
use crate::kernel::{dense_inverse, dense_lu_no_pivot, matmul};
use crate::random::{random_matrix, random_sss, random_vector, Rng64};

fn tridiag(n: usize, a: f64, b: f64, c: f64) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            b
        } else if i == j + 1 {
            a
        } else if j == i + 1 {
            c
        } else {
            0.0
        }
    })
}

fn vec_rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// Random matrix whose upper and lower Hankel blocks have rank `r`: a sum of
/// a semiseparable part `tril(X Y^T) + triu(Z W^T)` and a diagonal.
fn planted(n: usize, r: usize, seed: u64) -> DenseMatrix {
    let x = random_matrix(n, r, seed);
    let y = random_matrix(n, r, seed + 1);
    let z = random_matrix(n, r, seed + 2);
    let w = random_matrix(n, r, seed + 3);
    let lo = x.mul_t(&y);
    let up = z.mul_t(&w);
    let d = random_vector(n, seed + 4);
    DenseMatrix::from_fn(n, n, |i, j| if i > j { lo[(i, j)] } else if i < j { up[(i, j)] } else { d[i] })
}

#[test]
fn banded_diagonal() {
    let a = DenseMatrix::diag(&[1.0, 2.0, 3.0, 4.0]);
    let s = sss_from_banded(&a, 1).unwrap();
    assert_eq!(s.num_blocks(), 4);
    for i in 0..3 {
        assert_eq!(s.u(i).shape(), (1, 1));
        assert_eq!(s.u(i).max_abs(), 0.0);
        assert_eq!(s.p(i + 1).max_abs(), 0.0);
    }
    assert_eq!(sss_matvec(&s, &[1.0, 1.0, 1.0, 1.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
}

#[test]
fn banded_tridiagonal_matvec() {
    let s = sss_from_banded(&tridiag(6, 1.0, 2.0, 1.0), 1).unwrap();
    assert_eq!(sss_matvec(&s, &[1.0; 6]).unwrap(), vec![3.0, 4.0, 4.0, 4.0, 4.0, 3.0]);
    assert_eq!(sss_to_dense(&s), tridiag(6, 1.0, 2.0, 1.0));
}

#[test]
fn banded_pentadiagonal_round_trip() {
    let mut rng = Rng64::new(5);
    let a = DenseMatrix::from_fn(12, 12, |i, j| if i.abs_diff(j) <= 2 { rng.normal() } else { 0.0 });
    let s = sss_from_banded(&a, 2).unwrap();
    assert_eq!(sss_to_dense(&s), a);
    let mut bad = a.clone();
    bad[(0, 5)] = 1.0;
    assert!(matches!(sss_from_banded(&bad, 2), Err(Error::BandViolation { row: 0, col: 5 })));
}

#[test]
fn identity_form() {
    let s = SssForm::identity(&[2, 3, 1]);
    assert_eq!(sss_to_dense(&s), DenseMatrix::identity(6));
}

#[test]
fn block_diagonal_matvec() {
    let d = vec![random_matrix(2, 2, 1), random_matrix(3, 3, 2)];
    let s = SssForm::block_diagonal(d.clone());
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let y = sss_matvec(&s, &x).unwrap();
    assert_eq!(&y[..2], d[0].matvec(&x[..2]).as_slice());
    assert_eq!(&y[2..], d[1].matvec(&x[2..]).as_slice());
}

#[test]
fn random_matvec_matches_dense() {
    let sizes = vec![16; 16];
    let s = random_sss(&sizes, 3, 0.0, 7);
    let x = random_vector(256, 8);
    let dense = sss_to_dense(&s);
    assert!(vec_rel(&sss_matvec(&s, &x).unwrap(), &dense.matvec(&x)) <= 1e-11);
    assert!(vec_rel(&sss_matvec_t(&s, &x).unwrap(), &dense.matvec_t(&x)) <= 1e-11);
}

#[test]
fn construct_zero_and_rank_one() {
    let s = sss_construct(&DenseMatrix::zeros(8, 8), &[2, 3, 3], 1e-10).unwrap();
    assert!(s.upper_ranks().iter().chain(&s.lower_ranks()).all(|&r| r == 0));
    let u = random_vector(10, 1);
    let v = random_vector(10, 2);
    let a = DenseMatrix::from_fn(10, 10, |i, j| u[i] * v[j]);
    for sizes in [vec![1; 10], vec![3, 3, 4], vec![5, 5]] {
        let s = sss_construct(&a, &sizes, 1e-10).unwrap();
        assert!(s.max_rank() <= 1);
        assert!(sss_to_dense(&s).rel_diff(&a) < 1e-12);
    }
}

#[test]
fn construct_inverse_of_tridiagonal() {
    let mut rng = Rng64::new(3);
    let t = DenseMatrix::from_fn(64, 64, |i, j| {
        if i == j {
            4.0 + rng.normal()
        } else if i.abs_diff(j) == 1 {
            rng.normal()
        } else {
            0.0
        }
    });
    let inv = dense_inverse(&t).unwrap();
    let s = sss_construct(&inv, &[8; 8], 1e-9).unwrap();
    assert!(s.max_rank() <= 1);
    assert!(sss_to_dense(&s).rel_diff(&inv) < 1e-8);
}

#[test]
fn construct_round_trip_and_minimality() {
    for (n, r, p) in [(48, 2, 6), (128, 3, 8), (512, 4, 16)] {
        let a = planted(n, r, n as u64);
        let sizes = uniform_blocks(n, n / p);
        let tol = 1e-10;
        let s = sss_construct(&a, &sizes, tol).unwrap();
        assert!(sss_to_dense(&s).rel_diff(&a) <= 1e-9, "n={n}");
        if n <= 128 {
            let (up, lo) = hankel_ranks(&a, &sizes, tol);
            assert_eq!(s.upper_ranks(), up);
            assert_eq!(s.lower_ranks(), lo);
        }
        assert!(s.max_rank() <= r);
    }
}

#[test]
fn construct_is_idempotent() {
    let s = random_sss(&[5, 7, 6, 6], 2, 1.0, 9);
    let a = sss_to_dense(&s);
    let again = sss_construct(&a, s.block_sizes(), 1e-12).unwrap();
    assert!(sss_to_dense(&again).rel_diff(&a) < 1e-11);
    let (up, lo) = hankel_ranks(&a, s.block_sizes(), 1e-12);
    assert_eq!(again.upper_ranks(), up);
    assert_eq!(again.lower_ranks(), lo);
}

#[test]
fn diagonal_representation_is_schur_complement() {
    let s = random_sss(&[8; 8], 3, 1.0, 10);
    let emb = sss_embedding(&s);
    let m = emb.system.to_dense();
    let (xs, aux) = emb.index_sets();
    let pick = |rows: &[usize], cols: &[usize]| DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    let maa_inv = dense_inverse(&pick(&aux, &aux)).unwrap();
    let schur = &pick(&xs, &xs) - &(&pick(&xs, &aux) * &(&maa_inv * &pick(&aux, &xs)));
    assert!(schur.rel_diff(&sss_to_dense(&s)) <= 1e-12);
}

#[test]
fn solve_examples() {
    let s = SssForm::identity(&[3, 3]);
    let b = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    assert!(vec_rel(&sss_solve(&s, &b, 1e-14).unwrap(), &b) < 1e-15);

    let t = tridiag(64, 1.0, 2.0, 1.0);
    let s = sss_from_banded(&t, 1).unwrap();
    let rhs = t.matvec(&[1.0; 64]);
    let x = sss_solve(&s, &rhs, 1e-14).unwrap();
    assert!(vec_rel(&x, &[1.0; 64]) <= 1e-9);

    let s = random_sss(&[32; 16], 3, 3.0, 11);
    let b = random_vector(512, 12);
    let (x, stats) = sss_solve_with_stats(&s, &b, 1e-14).unwrap();
    assert_eq!(stats.fill_in_blocks, 0);
    let r: Vec<f64> = sss_matvec(&s, &x).unwrap();
    assert!(vec_rel(&r, &b) <= 1e-8);
}

#[test]
fn add_examples() {
    let s = random_sss(&[4, 6, 5, 5], 2, 1.0, 13);
    let z = SssForm::zero(s.block_sizes());
    assert!(sss_to_dense(&sss_add(&s, &z).unwrap()).rel_diff(&sss_to_dense(&s)) < 1e-13);

    let zero = sss_add(&s, &s.scale(-1.0)).unwrap();
    assert!(zero.max_rank() == 0);
    assert!(sss_to_dense(&zero).max_abs() < 1e-14);

    let (a, b) = (random_sss(&[16; 8], 2, 1.0, 14), random_sss(&[16; 8], 3, 1.0, 15));
    let raw = sss_add_uncompressed(&a, &b).unwrap();
    assert_eq!(raw.upper_ranks(), vec![5; 7]);
    let sum = sss_add(&a, &b).unwrap();
    let want = &sss_to_dense(&a) + &sss_to_dense(&b);
    assert!(sss_to_dense(&sum).rel_diff(&want) <= 1e-11);
    assert!(matches!(sss_add(&a, &SssForm::identity(&[64, 64])), Err(Error::PartitionMismatch(_))));
}

#[test]
fn multiply_examples() {
    let s = random_sss(&[4, 6, 5, 5], 2, 1.0, 16);
    let prod = sss_multiply(&s, &SssForm::identity(s.block_sizes())).unwrap();
    assert!(sss_to_dense(&prod).rel_diff(&sss_to_dense(&s)) < 1e-12);

    let t1 = tridiag(12, 1.0, 3.0, -1.0);
    let t2 = tridiag(12, 2.0, -1.0, 0.5);
    let (a, b) = (sss_from_banded(&t1, 1).unwrap(), sss_from_banded(&t2, 1).unwrap());
    let prod = sss_to_dense(&sss_multiply(&a, &b).unwrap());
    let want = &t1 * &t2;
    assert!(prod.rel_diff(&want) <= 1e-12);
    for i in 0..12usize {
        for j in 0..12usize {
            if i.abs_diff(j) > 2 {
                assert!(prod[(i, j)].abs() < 1e-12);
            }
        }
    }

    let (a, b) = (random_sss(&[16; 16], 2, 1.0, 17), random_sss(&[16; 16], 2, 1.0, 18));
    let raw = sss_multiply_uncompressed(&a, &b).unwrap();
    assert!(raw.upper_ranks().iter().all(|&r| r <= 4));
    assert!(raw.lower_ranks().iter().all(|&r| r <= 4));
    let want = &sss_to_dense(&a) * &sss_to_dense(&b);
    assert!(sss_to_dense(&raw).rel_diff(&want) <= 1e-10);
    let prod = sss_multiply(&a, &b).unwrap();
    assert!(sss_to_dense(&prod).rel_diff(&want) <= 1e-10);
    let (up, lo) = hankel_ranks(&want, a.block_sizes(), 1e-10);
    assert!(up.iter().chain(&lo).all(|&r| r <= 4));
}

#[test]
fn lu_examples() {
    let d = vec![random_matrix(3, 3, 1), random_matrix(2, 2, 2)];
    let s = SssForm::block_diagonal(d);
    let (l, u) = sss_lu(&s, 1e-14).unwrap();
    let (ld, ud) = (sss_to_dense(&l), sss_to_dense(&u));
    assert!(matmul(&ld, &ud).unwrap().rel_diff(&sss_to_dense(&s)) < 1e-14);

    let t = tridiag(10, 1.0, 4.0, 2.0);
    let s = sss_from_banded(&t, 1).unwrap();
    let (l, u) = sss_lu(&s, 1e-14).unwrap();
    let (dl, du) = dense_lu_no_pivot(&t, 1e-14).unwrap();
    assert!(sss_to_dense(&l).rel_diff(&dl) < 1e-13);
    assert!(sss_to_dense(&u).rel_diff(&du) < 1e-13);

    let s = random_sss(&[8; 16], 3, 4.0, 19);
    let a = sss_to_dense(&s);
    let (l, u) = sss_lu(&s, 1e-14).unwrap();
    let (ld, ud) = (sss_to_dense(&l), sss_to_dense(&u));
    assert!(matmul(&ld, &ud).unwrap().rel_diff(&a) <= 1e-9);
    let (dl, du) = dense_lu_no_pivot(&a, 1e-14).unwrap();
    assert!(ld.rel_diff(&dl) <= 1e-9 && ud.rel_diff(&du) <= 1e-9);
    assert!(l.lower_ranks().iter().all(|&r| r <= 3) && u.upper_ranks().iter().all(|&r| r <= 3));
    assert!(l.upper_ranks().iter().all(|&r| r == 0) && u.lower_ranks().iter().all(|&r| r == 0));
}

#[test]
fn lu_breakdown() {
    let a = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let s = sss_construct(&a, &[1, 1], 1e-12).unwrap();
    assert!(matches!(sss_lu(&s, 1e-12), Err(Error::PivotBreakdown { step: 0, .. })));
}

#[test]
fn triangular_inverse_examples() {
    let id = SssForm::identity(&[2, 2]);
    assert_eq!(sss_to_dense(&sss_invert_triangular(&id, true).unwrap()), DenseMatrix::identity(4));

    let t = tridiag(16, 1.0, 2.0, 1.0);
    let (l, _) = sss_lu(&sss_from_banded(&t, 1).unwrap(), 1e-14).unwrap();
    let linv = sss_invert_triangular(&l, true).unwrap();
    let want = dense_inverse(&sss_to_dense(&l)).unwrap();
    assert!(sss_to_dense(&linv).rel_diff(&want) <= 1e-10);
    let (_, lo) = hankel_ranks(&want, l.block_sizes(), 1e-10);
    assert!(lo.iter().all(|&r| r <= 1));

    let s = random_sss(&[8; 16], 3, 4.0, 20);
    let (l, u) = sss_lu(&s, 1e-14).unwrap();
    for (f, lower) in [(&l, true), (&u, false)] {
        let inv = sss_invert_triangular(f, lower).unwrap();
        let want = dense_inverse(&sss_to_dense(f)).unwrap();
        assert!(sss_to_dense(&inv).rel_diff(&want) <= 1e-9);
        let ranks = if lower { (inv.lower_ranks(), f.lower_ranks()) } else { (inv.upper_ranks(), f.upper_ranks()) };
        assert_eq!(ranks.0, ranks.1);
    }
    let singular = SssForm::block_diagonal(vec![DenseMatrix::zeros(2, 2)]);
    assert!(matches!(sss_invert_triangular(&singular, false), Err(Error::SingularBlock(0))));
}

#[test]
fn invert_examples() {
    let id = SssForm::identity(&[3, 3, 2]);
    assert!(sss_to_dense(&sss_invert(&id).unwrap()).rel_diff(&DenseMatrix::identity(8)) < 1e-15);

    let t = tridiag(32, 1.0, 2.0, 1.0);
    let inv = sss_invert(&sss_from_banded(&t, 1).unwrap()).unwrap();
    assert!(inv.max_rank() <= 1);
    assert!(sss_to_dense(&inv).rel_diff(&dense_inverse(&t).unwrap()) <= 1e-8);

    let s = random_sss(&[8; 16], 2, 4.0, 21);
    let inv = sss_invert(&s).unwrap();
    let a = sss_to_dense(&s);
    let prod = &a * &sss_to_dense(&inv);
    assert!((&prod - &DenseMatrix::identity(128)).max_abs() <= 1e-7);
    assert!(inv.upper_ranks().iter().zip(s.upper_ranks()).all(|(a, b)| *a <= b));
    assert!(inv.lower_ranks().iter().zip(s.lower_ranks()).all(|(a, b)| *a <= b));
}

#[test]
fn recompress_keeps_matrix() {
    let s = random_sss(&[6; 10], 3, 1.0, 22);
    let doubled = sss_add_uncompressed(&s, &s).unwrap();
    let c = sss_recompress(&doubled, 1e-12);
    assert_eq!(c.upper_ranks(), s.upper_ranks());
    assert!(sss_to_dense(&c).rel_diff(&sss_to_dense(&s).scale(2.0)) < 1e-12);
}

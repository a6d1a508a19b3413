use super::schur::tridiagonal_factors;
use super::{reconstruct, DisplacementOp, GeneratorForm};
use crate::error::{Error, Result};
use crate::kernel::{recompress, toeplitz_matvec, DenseMatrix, LowRankFactors, Threshold};
use crate::ops;

fn lower_toeplitz(v: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let mut row = vec![0.0; v.len()];
    if let Some(&v0) = v.first() {
        row[0] = v0;
    }
    toeplitz_matvec(v, &row, x)
}

fn upper_toeplitz(v: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let mut col = vec![0.0; v.len()];
    if let Some(&v0) = v.first() {
        col[0] = v0;
    }
    toeplitz_matvec(&col, v, x)
}

fn both_shift(g: &GeneratorForm) -> bool {
    matches!(g.op_a(), DisplacementOp::Shift(_)) && matches!(g.op_b(), DisplacementOp::Shift(_))
}

fn check_len(g: &GeneratorForm, x: &[f64]) -> Result<()> {
    if x.len() != g.size() {
        return Err(Error::DimensionMismatch(format!("size {}, vector {}", g.size(), x.len())));
    }
    Ok(())
}

/// `T x` for shift/shift generators, `T = sum_k L(P_k) L(Q_k)^T` with
/// `L(v)` the lower-triangular Toeplitz matrix with first column `v`: 2p
/// FFT-based triangular Toeplitz products.
pub fn gs_apply_inverse(ginv: &GeneratorForm, x: &[f64]) -> Result<Vec<f64>> {
    if !both_shift(ginv) {
        return Err(Error::UnsupportedOperator(format!(
            "triangular Toeplitz expansion needs shift/shift, got {}/{}",
            ginv.op_a().kind_name(),
            ginv.op_b().kind_name()
        )));
    }
    check_len(ginv, x)?;
    let mut y = vec![0.0; x.len()];
    for k in 0..ginv.rank() {
        let z = upper_toeplitz(&ginv.q().col(k), x)?;
        let w = lower_toeplitz(&ginv.p().col(k), &z)?;
        for (yi, wi) in y.iter_mut().zip(&w) {
            *yi += wi;
        }
    }
    Ok(y)
}

/// `T x` for diagonal/diagonal generators, streaming
/// `T_ij = (P Q^T)_ij / (1 - a_i b_j)` row by row in O(n^2 p).
pub fn cauchy_matvec(g: &GeneratorForm, x: &[f64]) -> Result<Vec<f64>> {
    let (DisplacementOp::Diagonal(a), DisplacementOp::Diagonal(b)) = (g.op_a(), g.op_b()) else {
        return Err(Error::UnsupportedOperator(format!(
            "diagonal/diagonal required, got {}/{}",
            g.op_a().kind_name(),
            g.op_b().kind_name()
        )));
    };
    check_len(g, x)?;
    let n = g.size();
    let pw = g.rank();
    let (p, q) = (g.p(), g.q());
    let mut y = vec![0.0; n];
    for (i, yi) in y.iter_mut().enumerate() {
        let prow = p.row(i);
        let mut acc = 0.0;
        for j in 0..n {
            let d = 1.0 - a[i] * b[j];
            if d.abs() < super::STEIN_TOL {
                return Err(Error::SingularOperator { i, j });
            }
            let c: f64 = prow.iter().zip(q.row(j)).map(|(u, v)| u * v).sum();
            acc += c * x[j] / d;
        }
        *yi = acc;
    }
    ops::add((n * n * (2 * pw + 4)) as u64);
    Ok(y)
}

/// `T x` through the cheapest available path: triangular Toeplitz sums for
/// shift/shift, the streaming Cauchy form for diagonal/diagonal, and the
/// reconstructed matrix otherwise.
pub fn generator_matvec(g: &GeneratorForm, x: &[f64]) -> Result<Vec<f64>> {
    check_len(g, x)?;
    if both_shift(g) {
        gs_apply_inverse(g, x)
    } else if g.op_a().is_diagonal() && g.op_b().is_diagonal() {
        cauchy_matvec(g, x)
    } else {
        Ok(reconstruct(g)?.matvec(x))
    }
}

/// `T^T x`, using `T^T - B T^T A^T = Q P^T`.
pub fn generator_matvec_t(g: &GeneratorForm, x: &[f64]) -> Result<Vec<f64>> {
    let swapped = GeneratorForm::from_parts(g.op_b().clone(), g.op_a().clone(), g.q().clone(), g.p().clone());
    generator_matvec(&swapped, x)
}

fn same_ops(g1: &GeneratorForm, g2: &GeneratorForm) -> Result<()> {
    if g1.op_a() != g2.op_a() || g1.op_b() != g2.op_b() {
        return Err(Error::UnsupportedOperator("operand operator pairs differ".into()));
    }
    Ok(())
}

fn compress(p: &DenseMatrix, q: &DenseMatrix, tol: f64, scale: f64) -> (DenseMatrix, DenseMatrix) {
    recompress(p, q, Threshold { rel: tol, abs: 1e-3 * tol * scale })
}

/// `T1 + T2` with the default recompression tolerance `1e-12`.
pub fn generator_add(g1: &GeneratorForm, g2: &GeneratorForm) -> Result<GeneratorForm> {
    generator_add_tol(g1, g2, 1e-12)
}

/// `T1 + T2`: generators are concatenated and recompressed at relative
/// tolerance `tol` (with an absolute floor tied to the operand sizes, so
/// exact cancellation yields width zero).
pub fn generator_add_tol(g1: &GeneratorForm, g2: &GeneratorForm, tol: f64) -> Result<GeneratorForm> {
    same_ops(g1, g2)?;
    let p = g1.p().hstack(g2.p());
    let q = g1.q().hstack(g2.q());
    let scale = g1.p().frobenius_norm() * g1.q().frobenius_norm() + g2.p().frobenius_norm() * g2.q().frobenius_norm();
    let (p, q) = compress(&p, &q, tol, scale);
    g1.with_generators(p, q)
}

/// Factors `X Y^T = I - B^T A` for the operator pair of `g`, failing when
/// the rank exceeds `n / 2`.
pub fn identity_product_factors(g: &GeneratorForm) -> Result<LowRankFactors> {
    let (a, b) = (g.op_a(), g.op_b());
    let n = g.size();
    let entry = |i: usize, j: usize| -> f64 {
        // (B^T A)_ij = sum_k B_ki A_kj over k in {i, i+1} intersect {j, j+1}.
        let s: f64 = (i..(i + 2).min(n)).map(|k| b.entry(k, i) * a.entry(k, j)).sum();
        (if i == j { 1.0 } else { 0.0 }) - s
    };
    let (left, right) = tridiagonal_factors(n, entry, n / 2)?;
    Ok(LowRankFactors { left, right })
}

fn map_cols(m: &DenseMatrix, f: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<DenseMatrix> {
    let mut out = DenseMatrix::zeros(m.rows(), m.cols());
    for k in 0..m.cols() {
        out.set_col(k, &f(&m.col(k))?);
    }
    Ok(out)
}

/// `T1 T2`. With `X Y^T = I - B^T A`:
///
/// `P = [P1, A T1 B^T P2, -A T1 X]`, `Q = [T2^T Q1, Q2, B T2^T Y]`,
///
/// followed by recompression at `1e-12`.
pub fn generator_multiply(g1: &GeneratorForm, g2: &GeneratorForm, xy: &LowRankFactors) -> Result<GeneratorForm> {
    same_ops(g1, g2)?;
    let n = g1.size();
    if xy.left.rows() != n || xy.right.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "size {n}, factors {}x{} / {}x{}",
            xy.left.rows(),
            xy.left.cols(),
            xy.right.rows(),
            xy.right.cols()
        )));
    }
    if xy.rank() > n / 2 {
        return Err(Error::UnsupportedOperator(format!(
            "rank(I - B^T A) = {} exceeds n/2 = {}",
            xy.rank(),
            n / 2
        )));
    }
    let (a, b) = (g1.op_a(), g1.op_b());
    let mid = map_cols(g2.p(), |c| Ok(a.matvec(&generator_matvec(g1, &b.matvec_t(c))?)))?;
    let ax = map_cols(&xy.left, |c| Ok(a.matvec(&generator_matvec(g1, c)?).iter().map(|v| -v).collect()))?;
    let t2q1 = map_cols(g1.q(), |c| generator_matvec_t(g2, c))?;
    let by = map_cols(&xy.right, |c| Ok(b.matvec(&generator_matvec_t(g2, c)?)))?;
    let p = g1.p().hstack(&mid).hstack(&ax);
    let q = t2q1.hstack(g2.q()).hstack(&by);
    let scale = p.frobenius_norm() * q.frobenius_norm();
    let (p, q) = compress(&p, &q, 1e-12, scale);
    g1.with_generators(p, q)
}

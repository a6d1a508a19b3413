use super::{first_row_col, DisplacementOp, GeneratorForm};
use crate::error::{Error, Result};
use crate::kernel::{recompress, truncated_factorization, DenseMatrix, Threshold};
use crate::ops;

/// Pivots below this fraction of the largest first-row/column entry of the
/// input abort the elimination.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

/// `T = L U` from the generalized Schur algorithm.
#[derive(Debug, Clone)]
pub struct GsLuResult {
    pub l: DenseMatrix,
    pub u: DenseMatrix,
    pub steps_completed: usize,
}

/// One elimination step on generators with the default relative pivot
/// tolerance.
pub fn schur_step(
    g: &GeneratorForm,
    t_col: &[f64],
    t_row: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, GeneratorForm)> {
    let scale = t_col.iter().chain(t_row).fold(0.0f64, |m, v| m.max(v.abs()));
    schur_step_with_tol(g, t_col, t_row, DEFAULT_PIVOT_TOL * scale, 0)
}

/// One elimination step: returns the column of `L`, the row of `U` and the
/// generators of the Schur complement under the trailing operators.
///
/// With `p1 = P[0,:]`, `q1 = Q[0,:]`, `s = p1 . q1`, `x = t_col`, `y = t_row`:
///
/// `L(T - x y^T / t11) = P (I - q1 p1^T / s) Q^T + u v^T / s`,
/// `u = (A - aI) x`, `v = (B - bI) y`.
///
/// The first term has rank `p - 1` because `p1^T (I - q1 p1^T / s) = 0`, so
/// it factors through an orthonormal basis `N` of the complement of `p1`.
/// Deleting the (zero) first row of each factor gives the new generators.
pub fn schur_step_with_tol(
    g: &GeneratorForm,
    t_col: &[f64],
    t_row: &[f64],
    abs_pivot_tol: f64,
    step: usize,
) -> Result<(Vec<f64>, Vec<f64>, GeneratorForm)> {
    let n = g.size();
    let pw = g.rank();
    if n == 0 || t_col.len() != n || t_row.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "size {n}, column {}, row {}",
            t_col.len(),
            t_row.len()
        )));
    }
    let t11 = t_col[0];
    if t11.is_nan() || t11.abs() < abs_pivot_tol || t11 == 0.0 {
        return Err(Error::PivotBreakdown { step, pivot: t11.abs() });
    }
    let l_col: Vec<f64> = t_col.iter().map(|v| v / t11).collect();
    let u_row = t_row.to_vec();
    let (op_a, op_b) = (g.op_a(), g.op_b());
    let (p, q) = (g.p(), g.q());
    if n == 1 {
        let next = GeneratorForm::from_parts(op_a.trailing(), op_b.trailing(), DenseMatrix::zeros(0, pw), DenseMatrix::zeros(0, pw));
        return Ok((l_col, u_row, next));
    }
    let p1 = p.row(0).to_vec();
    let q1 = q.row(0).to_vec();
    let s: f64 = p1.iter().zip(&q1).map(|(a, b)| a * b).sum();
    if s == 0.0 {
        return Err(Error::PivotBreakdown { step, pivot: 0.0 });
    }
    let a = op_a.diag_entry(0);
    let b = op_b.diag_entry(0);
    let u = op_a.shifted_matvec(a, t_col);
    let v = op_b.shifted_matvec(b, t_row);

    // Householder reflector H with H p1 = -sign(p1_0)|p1| e1; its columns
    // 1..p span the complement of p1.
    let norm = p1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut h = p1.clone();
    h[0] += if p1[0] >= 0.0 { norm } else { -norm };
    let hh: f64 = h.iter().map(|v| v * v).sum();

    // P N and (Q - kappa q1^T) N, kappa = Q p1 / s, computed as (M H)[:, 1..].
    let qp1 = q.matvec(&p1);
    let mut p_next = DenseMatrix::zeros(n - 1, pw);
    let mut q_next = DenseMatrix::zeros(n - 1, pw);
    let mut qrow = vec![0.0; pw];
    for i in 1..n {
        let prow = p.row(i);
        let pdot: f64 = prow.iter().zip(&h).map(|(x, y)| x * y).sum();
        let out = p_next.row_mut(i - 1);
        out[0] = u[i];
        for k in 1..pw {
            out[k] = prow[k] - 2.0 * pdot * h[k] / hh;
        }
        let kappa = qp1[i] / s;
        for k in 0..pw {
            qrow[k] = q[(i, k)] - kappa * q1[k];
        }
        let qdot: f64 = qrow.iter().zip(&h).map(|(x, y)| x * y).sum();
        let out = q_next.row_mut(i - 1);
        out[0] = v[i] / s;
        for k in 1..pw {
            out[k] = qrow[k] - 2.0 * qdot * h[k] / hh;
        }
    }
    ops::add((12 * n * pw) as u64);
    let next = GeneratorForm::from_parts(op_a.trailing(), op_b.trailing(), p_next, q_next);
    Ok((l_col, u_row, next))
}

/// Runs the elimination until `steps` pivots are taken, returning the
/// columns of `L`, the rows of `U` and the generators of the remaining Schur
/// complement.
pub fn eliminate(
    g: &GeneratorForm,
    steps: usize,
    pivot_tol: f64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, GeneratorForm)> {
    let mut cur = g.clone();
    let mut cols = Vec::with_capacity(steps);
    let mut rows = Vec::with_capacity(steps);
    let mut abs_tol = 0.0;
    for k in 0..steps {
        let (t_col, t_row) = first_row_col(&cur)?;
        if k == 0 {
            let scale = t_col.iter().chain(&t_row).fold(0.0f64, |m, v| m.max(v.abs()));
            abs_tol = pivot_tol * scale;
        }
        let (l, u, next) = schur_step_with_tol(&cur, &t_col, &t_row, abs_tol, k)?;
        cols.push(l);
        rows.push(u);
        cur = next;
    }
    Ok((cols, rows, cur))
}

/// LU factorization in natural order, O(n^2 p). `pivot_tol` is relative to
/// the largest entry of the first row and column.
pub fn generalized_schur_lu(g: &GeneratorForm, pivot_tol: f64) -> Result<GsLuResult> {
    let n = g.size();
    let (cols, rows, _) = eliminate(g, n, pivot_tol)?;
    let mut l = DenseMatrix::zeros(n, n);
    let mut u = DenseMatrix::zeros(n, n);
    for (k, (c, r)) in cols.iter().zip(&rows).enumerate() {
        for (i, v) in c.iter().enumerate() {
            l[(k + i, k)] = *v;
        }
        u.row_mut(k)[k..].copy_from_slice(r);
    }
    Ok(GsLuResult { l, u, steps_completed: n })
}

/// Low-rank factors `X Y^T` of a tridiagonal `n x n` matrix given entrywise.
/// Only the nonzero rows and columns are factored; more than `3 * limit`
/// nonzero rows certify a rank above `limit`, since rows three apart have
/// disjoint supports.
pub(crate) fn tridiagonal_factors(
    n: usize,
    entry: impl Fn(usize, usize) -> f64,
    limit: usize,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let rows: Vec<usize> = (0..n)
        .filter(|&i| (i.saturating_sub(1)..(i + 2).min(n)).any(|j| entry(i, j) != 0.0))
        .collect();
    if rows.len() > 3 * limit {
        return Err(Error::UnsupportedOperator(format!(
            "identity defect has rank at least {} (limit {limit})",
            rows.len().div_ceil(3)
        )));
    }
    let cols: Vec<usize> = (0..n)
        .filter(|&j| (j.saturating_sub(1)..(j + 2).min(n)).any(|i| entry(i, j) != 0.0))
        .collect();
    let sub = DenseMatrix::from_fn(rows.len(), cols.len(), |r, c| entry(rows[r], cols[c]));
    let f = truncated_factorization(&sub, 1e-14);
    if f.rank() > limit {
        return Err(Error::UnsupportedOperator(format!(
            "identity defect has rank {} (limit {limit})",
            f.rank()
        )));
    }
    let mut x = DenseMatrix::zeros(n, f.rank());
    let mut y = DenseMatrix::zeros(n, f.rank());
    for (r, &i) in rows.iter().enumerate() {
        x.row_mut(i).copy_from_slice(f.left.row(r));
    }
    for (c, &j) in cols.iter().enumerate() {
        y.row_mut(j).copy_from_slice(f.right.row(c));
    }
    Ok((x, y))
}

/// `I - A B^T` for lower bidiagonal operators, entrywise.
fn identity_defect(a: &DisplacementOp, b: &DisplacementOp, limit: usize) -> Result<(DenseMatrix, DenseMatrix)> {
    let entry = |i: usize, j: usize| -> f64 {
        let s: f64 = (i.saturating_sub(1)..=i).map(|k| a.entry(i, k) * b.entry(j, k)).sum();
        (if i == j { 1.0 } else { 0.0 }) - s
    };
    tridiagonal_factors(a.size(), entry, limit)
}

/// Generators of `T^{-1}` obtained as the Schur complement of
/// `M = [[T, I], [-I, 0]]` after `n` elimination steps, with
/// `A_M = blockdiag(A, A)`, `B_M = blockdiag(B, B)` and
/// `I - A B^T = X Y^T`:
///
/// `G_M = [[P, X, 0], [0, 0, -X]]`, `H_M = [[Q, 0, Y], [0, Y, 0]]`.
///
/// The trailing operators are `A` and `B` themselves, so the result
/// satisfies `S - A S B^T = P' Q'^T` for `S = T^{-1}`.
pub fn invert_via_augmented(g: &GeneratorForm) -> Result<GeneratorForm> {
    let n = g.size();
    let pw = g.rank();
    let (x, y) = identity_defect(g.op_a(), g.op_b(), pw + 4)?;
    let r = x.cols();
    let w = pw + 2 * r;
    let mut gm = DenseMatrix::zeros(2 * n, w);
    let mut hm = DenseMatrix::zeros(2 * n, w);
    gm.set_block(0, 0, g.p());
    gm.set_block(0, pw, &x);
    gm.set_block(n, pw + r, &x.scale(-1.0));
    hm.set_block(0, 0, g.q());
    hm.set_block(n, pw, &y);
    hm.set_block(0, pw + r, &y);
    let big = GeneratorForm::from_parts(
        g.op_a().block_diag(g.op_a()),
        g.op_b().block_diag(g.op_b()),
        gm,
        hm,
    );
    let (_, _, rest) = eliminate(&big, n, DEFAULT_PIVOT_TOL)?;
    let scale = rest.p().frobenius_norm() * rest.q().frobenius_norm();
    let (p, q) = recompress(rest.p(), rest.q(), Threshold { rel: 1e-13, abs: 1e-15 * scale });
    GeneratorForm::new(g.op_a().clone(), g.op_b().clone(), p, q)
}

use crate::error::{Error, Result};
use crate::kernel::dense::{axpy, DenseMatrix};
use crate::ops;

/// Gaussian elimination in natural order, no row or column exchanges.
///
/// Returns unit lower `L` and upper `U` with `L U = a`. Fails with
/// [`Error::PivotBreakdown`] as soon as a pivot falls below
/// `pivot_tol * max|a_ij|`.
pub fn dense_lu_no_pivot(a: &DenseMatrix, pivot_tol: f64) -> Result<(DenseMatrix, DenseMatrix)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("LU of a {}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    let threshold = pivot_tol * a.max_abs();
    let mut u = a.clone();
    let mut l = DenseMatrix::identity(n);
    for k in 0..n {
        let pivot = u[(k, k)];
        if pivot.abs() <= threshold || pivot == 0.0 {
            return Err(Error::PivotBreakdown { step: k, pivot });
        }
        let (top, bottom) = split_rows(&mut u, k);
        let prow = &top[k..];
        for (r, row) in bottom.chunks_mut(n).enumerate() {
            let i = k + 1 + r;
            let m = row[k] / pivot;
            l[(i, k)] = m;
            if m != 0.0 {
                axpy(-m, prow, &mut row[k..]);
            }
            row[k] = 0.0;
        }
        ops::add(((n - k - 1) * (n - k)) as u64);
    }
    Ok((l, u))
}

/// Splits the row-major storage into row `k` and the rows strictly below it.
fn split_rows(m: &mut DenseMatrix, k: usize) -> (&[f64], &mut [f64]) {
    let n = m.cols();
    let (head, tail) = m.data_mut().split_at_mut((k + 1) * n);
    (&head[k * n..], tail)
}

/// Solves `L x = b` with `L` unit lower triangular.
pub fn solve_unit_lower(l: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut x = b.to_vec();
    for i in 0..n {
        let row = l.row(i);
        let s: f64 = row[..i].iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
        x[i] -= s;
    }
    ops::add((n * n / 2) as u64);
    x
}

/// Solves `U x = b` with `U` upper triangular.
pub fn solve_upper(u: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = u.rows();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let row = u.row(i);
        let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
        if row[i] == 0.0 {
            return Err(Error::PivotBreakdown { step: i, pivot: 0.0 });
        }
        x[i] = (x[i] - s) / row[i];
    }
    ops::add((n * n / 2) as u64);
    Ok(x)
}

/// Inverse of a lower triangular matrix (general diagonal).
pub fn invert_lower(l: &DenseMatrix) -> Result<DenseMatrix> {
    let n = l.rows();
    let mut inv = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let d = l[(i, i)];
        if d == 0.0 {
            return Err(Error::PivotBreakdown { step: i, pivot: 0.0 });
        }
        inv[(i, i)] = 1.0 / d;
        for j in 0..i {
            let mut s = 0.0;
            for k in j..i {
                s += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / d;
        }
    }
    ops::add((n * n * n / 6) as u64);
    Ok(inv)
}

pub fn invert_upper(u: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(invert_lower(&u.transpose())?.transpose())
}

/// LU with partial (row) pivoting, used for small dense pivot blocks and as
/// an independent dense solver.
#[derive(Debug, Clone)]
pub struct PivotedLu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl PivotedLu {
    pub fn factor(a: &DenseMatrix, pivot_tol: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!("LU of a {}x{} matrix", a.rows(), a.cols())));
        }
        let n = a.rows();
        let threshold = pivot_tol * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[(i, k)].abs() > lu[(p, k)].abs() {
                    p = i;
                }
            }
            let pivot = lu[(p, k)];
            if pivot.abs() <= threshold || pivot == 0.0 {
                return Err(Error::PivotBreakdown { step: k, pivot });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
            }
            let prow: Vec<f64> = lu.row(k)[k + 1..].to_vec();
            for i in k + 1..n {
                let m = lu[(i, k)] / pivot;
                lu[(i, k)] = m;
                if m != 0.0 {
                    axpy(-m, &prow, &mut lu.row_mut(i)[k + 1..]);
                }
            }
            ops::add(((n - k - 1) * (n - k)) as u64);
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
        ops::add((n * n) as u64);
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            out.set_col(j, &self.solve(&b.col(j)));
        }
        out
    }

    /// Solves `A^T x = b`.
    pub fn solve_t(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.lu[(k, i)] * y[k]).sum();
            y[i] = (y[i] - s) / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.lu[(k, i)] * y[k]).sum();
            y[i] -= s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        ops::add((n * n) as u64);
        x
    }
}

/// Dense solve with partial pivoting; the independent oracle for solvers.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(PivotedLu::factor(a, 1e-14)?.solve(b))
}

/// Dense inverse with partial pivoting.
pub fn dense_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let lu = PivotedLu::factor(a, 1e-14)?;
    Ok(lu.solve_mat(&DenseMatrix::identity(a.rows())))
}

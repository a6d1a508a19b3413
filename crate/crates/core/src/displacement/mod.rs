//! Displacement structure: `L[A,B](T) = T - A T B^T` with shift and diagonal
//! operators, generator arithmetic and the generalized Schur algorithm.

mod arith;
mod op;
mod schur;

pub use arith::{cauchy_matvec, generator_add, generator_add_tol, generator_matvec, generator_matvec_t, generator_multiply, gs_apply_inverse, identity_product_factors};
pub use op::{check_stein, DisplacementOp, STEIN_TOL};
pub use schur::{
    eliminate, generalized_schur_lu, invert_via_augmented, schur_step, schur_step_with_tol, GsLuResult,
    DEFAULT_PIVOT_TOL,
};

use crate::error::{Error, Result};
use crate::kernel::{numerical_rank, DenseMatrix};
use crate::ops;

/// Generators `(P, Q)` of the unique `T` with `T - A T B^T = P Q^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorForm {
    op_a: DisplacementOp,
    op_b: DisplacementOp,
    p: DenseMatrix,
    q: DenseMatrix,
}

impl GeneratorForm {
    pub fn new(op_a: DisplacementOp, op_b: DisplacementOp, p: DenseMatrix, q: DenseMatrix) -> Result<Self> {
        let n = op_a.size();
        if op_b.size() != n || p.rows() != n || q.rows() != n || p.cols() != q.cols() {
            return Err(Error::DimensionMismatch(format!(
                "operators {n}/{}, P {}x{}, Q {}x{}",
                op_b.size(),
                p.rows(),
                p.cols(),
                q.rows(),
                q.cols()
            )));
        }
        check_stein(&op_a, &op_b)?;
        Ok(Self { op_a, op_b, p, q })
    }

    /// Skips the Stein check; callers guarantee the operators come from a
    /// form that already passed it.
    pub(crate) fn from_parts(op_a: DisplacementOp, op_b: DisplacementOp, p: DenseMatrix, q: DenseMatrix) -> Self {
        Self { op_a, op_b, p, q }
    }

    pub fn op_a(&self) -> &DisplacementOp {
        &self.op_a
    }

    pub fn op_b(&self) -> &DisplacementOp {
        &self.op_b
    }

    pub fn p(&self) -> &DenseMatrix {
        &self.p
    }

    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    /// Matrix dimension `n`.
    pub fn size(&self) -> usize {
        self.p.rows()
    }

    /// Generator width `p`.
    pub fn rank(&self) -> usize {
        self.p.cols()
    }

    /// Same operators, generators replaced.
    pub fn with_generators(&self, p: DenseMatrix, q: DenseMatrix) -> Result<Self> {
        Self::new(self.op_a.clone(), self.op_b.clone(), p, q)
    }

    /// `P Q^T`.
    pub fn displacement(&self) -> DenseMatrix {
        self.p.mul_t(&self.q)
    }
}

/// `T - A T B^T`, densely.
pub fn apply_displacement(t: &DenseMatrix, op_a: &DisplacementOp, op_b: &DisplacementOp) -> Result<DenseMatrix> {
    let n = t.rows();
    if !t.is_square() || op_a.size() != n || op_b.size() != n {
        return Err(Error::DimensionMismatch(format!(
            "T {}x{}, operators {}/{}",
            t.rows(),
            t.cols(),
            op_a.size(),
            op_b.size()
        )));
    }
    let a = op_a.to_dense();
    let b = op_b.to_dense();
    let atb = (&a * t).mul_t(&b);
    Ok(t - &atb)
}

/// Numerical rank of `T - A T B^T` at relative tolerance `tol`.
pub fn displacement_rank(t: &DenseMatrix, op_a: &DisplacementOp, op_b: &DisplacementOp, tol: f64) -> Result<usize> {
    Ok(numerical_rank(&apply_displacement(t, op_a, op_b)?, tol))
}

fn nonzero(v: &[f64]) -> bool {
    v.iter().any(|&x| x != 0.0)
}

/// Shift/shift generators of the Toeplitz matrix with the given first column
/// and row: `P = [e1, c']`, `Q = [r, e1]` where `c'` is the column with its
/// first entry zeroed. Zero columns are dropped.
pub fn generators_toeplitz(first_col: &[f64], first_row: &[f64]) -> Result<GeneratorForm> {
    let n = first_col.len();
    if first_row.len() != n {
        return Err(Error::DimensionMismatch(format!("column {n}, row {}", first_row.len())));
    }
    if n > 0 && first_col[0] != first_row[0] {
        return Err(Error::CornerMismatch);
    }
    if let Some(i) = first_col.iter().chain(first_row).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i % n.max(1), col: 0 });
    }
    let mut e1 = vec![0.0; n];
    if n > 0 {
        e1[0] = 1.0;
    }
    let mut col = first_col.to_vec();
    if n > 0 {
        col[0] = 0.0;
    }
    let mut pcols: Vec<Vec<f64>> = Vec::new();
    let mut qcols: Vec<Vec<f64>> = Vec::new();
    if nonzero(first_row) {
        pcols.push(e1.clone());
        qcols.push(first_row.to_vec());
    }
    if nonzero(&col) {
        pcols.push(col);
        qcols.push(e1);
    }
    let k = pcols.len();
    let p = DenseMatrix::from_fn(n, k, |i, j| pcols[j][i]);
    let q = DenseMatrix::from_fn(n, k, |i, j| qcols[j][i]);
    GeneratorForm::new(DisplacementOp::shift(n), DisplacementOp::shift(n), p, q)
}

/// Generators of `V[i][j] = x_i^j` under `(D(x), Z)`: `P = 1`, `Q = e1`.
pub fn generators_vandermonde(x: &[f64]) -> Result<GeneratorForm> {
    let n = x.len();
    let p = DenseMatrix::from_fn(n, 1, |_, _| 1.0);
    let q = DenseMatrix::from_fn(n, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
    GeneratorForm::new(DisplacementOp::diagonal(x.to_vec())?, DisplacementOp::shift(n), p, q)
}

/// Generators of `C[i][j] = 1 / (y_i - x_j)` under `(D(1/y), D(x))`:
/// `P_i = 1 / y_i`, `Q_j = 1`.
pub fn generators_cauchy(x: &[f64], y: &[f64]) -> Result<GeneratorForm> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("x {n}, y {}", y.len())));
    }
    if let Some(i) = y.iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroY { i });
    }
    for (i, &yi) in y.iter().enumerate() {
        if let Some(j) = x.iter().position(|&xj| xj == yi) {
            return Err(Error::PoleCollision { i, j });
        }
    }
    let inv: Vec<f64> = y.iter().map(|v| 1.0 / v).collect();
    let p = DenseMatrix::from_fn(n, 1, |i, _| inv[i]);
    let q = DenseMatrix::from_fn(n, 1, |_, _| 1.0);
    GeneratorForm::new(DisplacementOp::diagonal(inv)?, DisplacementOp::diagonal(x.to_vec())?, p, q)
}

/// Dense Cauchy matrix, the reference for [`generators_cauchy`].
pub fn cauchy_dense(x: &[f64], y: &[f64]) -> DenseMatrix {
    DenseMatrix::from_fn(y.len(), x.len(), |i, j| 1.0 / (y[i] - x[j]))
}

/// Dense Vandermonde matrix `x_i^j`, `j = 0..n-1`.
pub fn vandermonde_dense(x: &[f64]) -> DenseMatrix {
    let n = x.len();
    DenseMatrix::from_fn(n, n, |i, j| x[i].powi(j as i32))
}

/// The unique solution of `T - A T B^T = P Q^T`.
///
/// Both operators are lower bidiagonal, so entry `(i, j)` depends only on
/// entries with smaller indices and the equation is solved by a sweep in
/// O(n^2 p). For diagonal operators this is the closed form
/// `T_ij = (P Q^T)_ij / (1 - a_i b_j)`; with a nilpotent operator it equals
/// the finite series `sum_l (A^l P)(B^l Q)^T`.
pub fn reconstruct(g: &GeneratorForm) -> Result<DenseMatrix> {
    let n = g.size();
    let c = g.displacement();
    let (a, b) = (&g.op_a, &g.op_b);
    let mut t = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let ai = a.diag_entry(i);
        let sa = if i > 0 { a.sub_entry(i - 1) } else { 0.0 };
        for j in 0..n {
            let bj = b.diag_entry(j);
            let sb = if j > 0 { b.sub_entry(j - 1) } else { 0.0 };
            let mut v = c[(i, j)];
            if j > 0 {
                v += ai * sb * t[(i, j - 1)];
            }
            if i > 0 {
                v += sa * bj * t[(i - 1, j)];
                if j > 0 {
                    v += sa * sb * t[(i - 1, j - 1)];
                }
            }
            let d = 1.0 - ai * bj;
            if d.abs() < STEIN_TOL {
                return Err(Error::SingularOperator { i, j });
            }
            t[(i, j)] = v / d;
        }
    }
    ops::add(8 * (n * n) as u64);
    Ok(t)
}

/// Evaluates `sum_l (A^l P)(B^l Q)^T` term by term. Unlike [`reconstruct`],
/// this refuses operator pairs for which the series diverges, i.e. neither
/// operator is nilpotent and some `|a_i b_j| >= 1`.
pub fn series_reconstruct(g: &GeneratorForm) -> Result<DenseMatrix> {
    let n = g.size();
    let nilpotent = g.op_a.is_nilpotent() || g.op_b.is_nilpotent();
    let mut rho: f64 = 0.0;
    if !nilpotent {
        let (da, db) = (g.op_a.diag_values(), g.op_b.diag_values());
        for (i, ai) in da.iter().enumerate() {
            for (j, bj) in db.iter().enumerate() {
                let product = (ai * bj).abs();
                if product >= 1.0 {
                    return Err(Error::SeriesDivergence { i, j, product });
                }
                rho = rho.max(product);
            }
        }
    }
    let mut t = DenseMatrix::zeros(n, n);
    let mut ap = g.p.clone();
    let mut bq = g.q.clone();
    let scale = g.displacement().max_abs();
    let max_terms = if nilpotent { n } else { 100_000 };
    for _ in 0..max_terms {
        let term = ap.mul_t(&bq);
        let size = term.max_abs();
        t = &t + &term;
        if size == 0.0 || (!nilpotent && size <= f64::EPSILON * 1e-2 * scale) {
            break;
        }
        ap = apply_cols(&g.op_a, &ap);
        bq = apply_cols(&g.op_b, &bq);
    }
    Ok(t)
}

fn apply_cols(op: &DisplacementOp, m: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(m.rows(), m.cols());
    for k in 0..m.cols() {
        out.set_col(k, &op.matvec(&m.col(k)));
    }
    out
}

/// First column and first row of the represented matrix in O(n p):
/// `(I - b A) t_col = P Q[0,:]^T` and `(I - a B) t_row = Q P[0,:]^T` with
/// `a = A[0][0]`, `b = B[0][0]`.
pub fn first_row_col(g: &GeneratorForm) -> Result<(Vec<f64>, Vec<f64>)> {
    if g.size() == 0 {
        return Ok((vec![], vec![]));
    }
    let a = g.op_a.diag_entry(0);
    let b = g.op_b.diag_entry(0);
    let pq1 = g.p.matvec(g.q.row(0));
    let qp1 = g.q.matvec(g.p.row(0));
    let t_col = g.op_a.solve_stein_factor(b, 0, &pq1)?;
    let t_row = g.op_b.solve_stein_factor(a, 0, &qp1).map_err(|e| match e {
        Error::SingularOperator { i, j } => Error::SingularOperator { i: j, j: i },
        e => e,
    })?;
    ops::add(4 * (g.size() * g.rank()) as u64);
    Ok((t_col, t_row))
}

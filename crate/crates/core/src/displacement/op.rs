use crate::error::{Error, Result};
use crate::kernel::DenseMatrix;
use crate::ops;

/// Divisors `|1 - a b|` below this are treated as a singular Stein equation.
pub const STEIN_TOL: f64 = 1e-14;

/// A lower-triangular structured operator acting as the `A` or `B` factor of
/// `T -> T - A T B^T`.
#[derive(Debug, Clone, PartialEq)]
pub enum DisplacementOp {
    /// Ones on the subdiagonal: `Z e_j = e_{j+1}`.
    Shift(usize),
    /// `diag(values)`.
    Diagonal(Vec<f64>),
    /// Lower bidiagonal with `diag` on the diagonal and `sub[i]` at
    /// `(i + 1, i)`. Arises from block-diagonal operators.
    Bidiagonal { diag: Vec<f64>, sub: Vec<f64> },
}

impl DisplacementOp {
    pub fn shift(n: usize) -> Self {
        DisplacementOp::Shift(n)
    }

    pub fn diagonal(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: i });
        }
        Ok(DisplacementOp::Diagonal(values))
    }

    /// Lower bidiagonal operator with `diag` on the diagonal and `sub[i]` at
    /// `(i + 1, i)`.
    pub fn bidiagonal(diag: Vec<f64>, sub: Vec<f64>) -> Result<Self> {
        if sub.len() + 1 != diag.len().max(1) {
            return Err(Error::DimensionMismatch(format!("{} diagonal, {} subdiagonal entries", diag.len(), sub.len())));
        }
        if let Some(i) = diag.iter().chain(&sub).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: i });
        }
        Ok(Self::normalized(diag, sub))
    }

    /// Collapses a bidiagonal to the shift or diagonal form when it is one.
    fn normalized(diag: Vec<f64>, sub: Vec<f64>) -> Self {
        if sub.iter().all(|&s| s == 0.0) {
            DisplacementOp::Diagonal(diag)
        } else if diag.iter().all(|&d| d == 0.0) && sub.iter().all(|&s| s == 1.0) {
            DisplacementOp::Shift(diag.len())
        } else {
            DisplacementOp::Bidiagonal { diag, sub }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            DisplacementOp::Shift(n) => *n,
            DisplacementOp::Diagonal(d) => d.len(),
            DisplacementOp::Bidiagonal { diag, .. } => diag.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DisplacementOp::Shift(_) => "shift",
            DisplacementOp::Diagonal(_) => "diag",
            DisplacementOp::Bidiagonal { .. } => "bidiag",
        }
    }

    /// Entry `(i, i)`.
    pub fn diag_entry(&self, i: usize) -> f64 {
        match self {
            DisplacementOp::Shift(_) => 0.0,
            DisplacementOp::Diagonal(d) => d[i],
            DisplacementOp::Bidiagonal { diag, .. } => diag[i],
        }
    }

    /// Entry `(i + 1, i)`.
    pub fn sub_entry(&self, i: usize) -> f64 {
        match self {
            DisplacementOp::Shift(_) => 1.0,
            DisplacementOp::Diagonal(_) => 0.0,
            DisplacementOp::Bidiagonal { sub, .. } => sub[i],
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag_entry(i)
        } else if i == j + 1 {
            self.sub_entry(j)
        } else {
            0.0
        }
    }

    pub fn is_nilpotent(&self) -> bool {
        (0..self.size()).all(|i| self.diag_entry(i) == 0.0)
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, DisplacementOp::Diagonal(_))
    }

    pub fn diag_values(&self) -> Vec<f64> {
        (0..self.size()).map(|i| self.diag_entry(i)).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.size();
        DenseMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size();
        ops::add(3 * n as u64);
        (0..n)
            .map(|i| {
                let mut v = self.diag_entry(i) * x[i];
                if i > 0 {
                    v += self.sub_entry(i - 1) * x[i - 1];
                }
                v
            })
            .collect()
    }

    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size();
        ops::add(3 * n as u64);
        (0..n)
            .map(|i| {
                let mut v = self.diag_entry(i) * x[i];
                if i + 1 < n {
                    v += self.sub_entry(i) * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// `(self - c I) x`.
    pub fn shifted_matvec(&self, c: f64, x: &[f64]) -> Vec<f64> {
        let mut y = self.matvec(x);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi -= c * xi;
        }
        y
    }

    /// Solves `(I - c self) u = r` by forward substitution. `partner` names
    /// the index of `c` on the other operator, for error reporting.
    pub fn solve_stein_factor(&self, c: f64, partner: usize, r: &[f64]) -> Result<Vec<f64>> {
        let n = self.size();
        let mut u = vec![0.0; n];
        for i in 0..n {
            let d = 1.0 - c * self.diag_entry(i);
            if d.abs() < STEIN_TOL {
                return Err(Error::SingularOperator { i, j: partner });
            }
            let mut v = r[i];
            if i > 0 {
                v += c * self.sub_entry(i - 1) * u[i - 1];
            }
            u[i] = v / d;
        }
        ops::add(5 * n as u64);
        Ok(u)
    }

    /// Trailing principal submatrix obtained by deleting the first row and
    /// column.
    pub fn trailing(&self) -> Self {
        match self {
            DisplacementOp::Shift(n) => DisplacementOp::Shift(n.saturating_sub(1)),
            DisplacementOp::Diagonal(d) => DisplacementOp::Diagonal(d[1.min(d.len())..].to_vec()),
            DisplacementOp::Bidiagonal { diag, sub } => Self::normalized(
                diag[1.min(diag.len())..].to_vec(),
                sub[1.min(sub.len())..].to_vec(),
            ),
        }
    }

    /// Leading `m x m` principal submatrix.
    pub fn leading(&self, m: usize) -> Self {
        match self {
            DisplacementOp::Shift(_) => DisplacementOp::Shift(m),
            DisplacementOp::Diagonal(d) => DisplacementOp::Diagonal(d[..m].to_vec()),
            DisplacementOp::Bidiagonal { diag, sub } => {
                Self::normalized(diag[..m].to_vec(), sub[..m.saturating_sub(1)].to_vec())
            }
        }
    }

    /// `blockdiag(self, other)`.
    pub fn block_diag(&self, other: &Self) -> Self {
        let (n, m) = (self.size(), other.size());
        let diag: Vec<f64> = self.diag_values().into_iter().chain(other.diag_values()).collect();
        let mut sub = Vec::with_capacity((n + m).saturating_sub(1));
        sub.extend((0..n.saturating_sub(1)).map(|i| self.sub_entry(i)));
        if n > 0 && m > 0 {
            sub.push(0.0);
        }
        sub.extend((0..m.saturating_sub(1)).map(|i| other.sub_entry(i)));
        Self::normalized(diag, sub)
    }
}

/// Checks `|1 - a_i b_j| >= STEIN_TOL` over all pairs of diagonal entries.
pub fn check_stein(a: &DisplacementOp, b: &DisplacementOp) -> Result<()> {
    if a.is_nilpotent() || b.is_nilpotent() {
        return Ok(());
    }
    let (da, db) = (a.diag_values(), b.diag_values());
    for (i, &ai) in da.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in db.iter().enumerate() {
            if (1.0 - ai * bj).abs() < STEIN_TOL {
                return Err(Error::SingularOperator { i, j });
            }
        }
    }
    Ok(())
}

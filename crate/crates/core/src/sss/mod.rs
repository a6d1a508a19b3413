//! Sequentially semiseparable matrices.
//!
//! Block `(i, j)` is `D_i` on the diagonal, `U_i W_{i+1} ... W_{j-1} V_j^T`
//! above it and `P_i R_{i-1} ... R_{j+1} Q_j^T` below it. Both triangles are
//! stored as an upper [`Chain`]; the lower one is the upper chain of the
//! transpose, so `Q_i = lower.u[i]`, `P_i = lower.v[i]`, `R_i = lower.w[i]^T`.

mod arith;
mod factor;
mod solve;

pub use arith::{recompress_chain, sss_add, sss_multiply, sss_recompress};
pub use factor::{sss_invert, sss_invert_triangular, sss_lu};
pub use solve::{sss_embedding, sss_solve, sss_solve_with_stats, SssEmbedding};

use crate::error::{Error, Result};
use crate::kernel::{numerical_rank, truncated_svd, DenseMatrix, Threshold};
use crate::ops;

/// Generators of a strictly block upper triangular matrix. Boundary `k`
/// (between blocks `k` and `k + 1`) carries rank `r_k`; `u[i]` is
/// `n_i x r_i`, `v[i]` is `n_i x r_{i-1}` and `w[i]` is `r_{i-1} x r_i`, with
/// `r_{-1} = r_{p-1} = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub(crate) u: Vec<DenseMatrix>,
    pub(crate) v: Vec<DenseMatrix>,
    pub(crate) w: Vec<DenseMatrix>,
}

impl Chain {
    pub fn new(u: Vec<DenseMatrix>, v: Vec<DenseMatrix>, w: Vec<DenseMatrix>, sizes: &[usize]) -> Result<Self> {
        let c = Self { u, v, w };
        c.validate(sizes)?;
        Ok(c)
    }

    pub fn empty(sizes: &[usize]) -> Self {
        Self {
            u: sizes.iter().map(|&n| DenseMatrix::zeros(n, 0)).collect(),
            v: sizes.iter().map(|&n| DenseMatrix::zeros(n, 0)).collect(),
            w: sizes.iter().map(|_| DenseMatrix::zeros(0, 0)).collect(),
        }
    }

    pub fn u(&self) -> &[DenseMatrix] {
        &self.u
    }

    pub fn v(&self) -> &[DenseMatrix] {
        &self.v
    }

    pub fn w(&self) -> &[DenseMatrix] {
        &self.w
    }

    /// Rank at each of the `p - 1` interior boundaries.
    pub fn ranks(&self) -> Vec<usize> {
        let p = self.u.len();
        self.u[..p.saturating_sub(1)].iter().map(|m| m.cols()).collect()
    }

    fn rank_at(&self, k: isize) -> usize {
        if k < 0 || k as usize + 1 >= self.u.len() {
            0
        } else {
            self.u[k as usize].cols()
        }
    }

    fn validate(&self, sizes: &[usize]) -> Result<()> {
        let p = sizes.len();
        if self.u.len() != p || self.v.len() != p || self.w.len() != p {
            return Err(Error::PartitionMismatch(format!(
                "{p} blocks, chain lengths {}/{}/{}",
                self.u.len(),
                self.v.len(),
                self.w.len()
            )));
        }
        for i in 0..p {
            let (rp, rn) = (self.rank_at(i as isize - 1), self.rank_at(i as isize));
            let ok = self.u[i].shape() == (sizes[i], if i + 1 < p { self.u[i].cols() } else { 0 })
                && self.v[i].shape() == (sizes[i], rp)
                && self.w[i].shape() == (rp, rn);
            if !ok {
                return Err(Error::DimensionMismatch(format!(
                    "block {i}: U {:?}, V {:?}, W {:?} for size {} and ranks {rp}/{rn}",
                    self.u[i].shape(),
                    self.v[i].shape(),
                    self.w[i].shape(),
                    sizes[i]
                )));
            }
        }
        Ok(())
    }

    /// Strictly upper part applied to block vector `x`:
    /// `g_i = V_i^T x_i + W_i g_{i+1}`, `y_i = U_i g_{i+1}`.
    fn apply(&self, x: &[&[f64]]) -> Vec<Vec<f64>> {
        let p = self.u.len();
        let mut y: Vec<Vec<f64>> = vec![vec![]; p];
        let mut g: Vec<f64> = vec![];
        for i in (0..p).rev() {
            y[i] = if self.u[i].cols() == 0 { vec![0.0; self.u[i].rows()] } else { self.u[i].matvec(&g) };
            let mut next = self.v[i].matvec_t(x[i]);
            if !g.is_empty() {
                for (a, b) in next.iter_mut().zip(self.w[i].matvec(&g)) {
                    *a += b;
                }
            }
            g = next;
        }
        y
    }

    /// Transpose of the strictly upper part applied to `x`:
    /// `s_j = U_{j-1}^T x_{j-1} + W_{j-1}^T s_{j-1}`, `y_j = V_j s_j`.
    fn apply_t(&self, x: &[&[f64]]) -> Vec<Vec<f64>> {
        let p = self.u.len();
        let mut y: Vec<Vec<f64>> = vec![vec![]; p];
        let mut s: Vec<f64> = vec![];
        for j in 0..p {
            y[j] = if self.v[j].cols() == 0 { vec![0.0; self.v[j].rows()] } else { self.v[j].matvec(&s) };
            let mut next = self.u[j].matvec_t(x[j]);
            if !s.is_empty() {
                for (a, b) in next.iter_mut().zip(self.w[j].matvec_t(&s)) {
                    *a += b;
                }
            }
            s = next;
        }
        y
    }

    fn strict_upper_dense(&self, offsets: &[usize]) -> DenseMatrix {
        let p = self.u.len();
        let n = offsets[p];
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..p {
            let mut x = self.u[i].clone();
            for j in i + 1..p {
                out.set_block(offsets[i], offsets[j], &x.mul_t(&self.v[j]));
                x = &x * &self.w[j];
            }
        }
        out
    }
}

/// A matrix in sequentially semiseparable form.
#[derive(Debug, Clone, PartialEq)]
pub struct SssForm {
    sizes: Vec<usize>,
    d: Vec<DenseMatrix>,
    upper: Chain,
    lower: Chain,
}

pub(crate) fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut off = vec![0];
    for &s in sizes {
        off.push(off.last().unwrap() + s);
    }
    off
}

/// `ceil(n / p)`-sized blocks, the last one possibly shorter.
pub fn uniform_blocks(n: usize, block: usize) -> Vec<usize> {
    let block = block.max(1);
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = block.min(left);
        sizes.push(s);
        left -= s;
    }
    if sizes.is_empty() {
        sizes.push(0);
    }
    sizes
}

impl SssForm {
    pub fn new(sizes: Vec<usize>, d: Vec<DenseMatrix>, upper: Chain, lower: Chain) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::PartitionMismatch("at least one block required".into()));
        }
        if d.len() != sizes.len() || d.iter().zip(&sizes).any(|(m, &s)| m.shape() != (s, s)) {
            return Err(Error::DimensionMismatch("diagonal blocks do not match block sizes".into()));
        }
        upper.validate(&sizes)?;
        lower.validate(&sizes)?;
        Ok(Self { sizes, d, upper, lower })
    }

    /// Builds the form from the seven sequences in their conventional
    /// orientation (`R_i` is `r^l_{i+1} x r^l_i`).
    #[allow(clippy::too_many_arguments)]
    pub fn from_components(
        sizes: Vec<usize>,
        d: Vec<DenseMatrix>,
        u: Vec<DenseMatrix>,
        v: Vec<DenseMatrix>,
        w: Vec<DenseMatrix>,
        p: Vec<DenseMatrix>,
        q: Vec<DenseMatrix>,
        r: Vec<DenseMatrix>,
    ) -> Result<Self> {
        let upper = Chain { u, v, w };
        let lower = Chain { u: q, v: p, w: r.iter().map(|m| m.transpose()).collect() };
        Self::new(sizes, d, upper, lower)
    }

    pub(crate) fn from_parts(sizes: Vec<usize>, d: Vec<DenseMatrix>, upper: Chain, lower: Chain) -> Self {
        Self { sizes, d, upper, lower }
    }

    pub fn identity(sizes: &[usize]) -> Self {
        Self::block_diagonal(sizes.iter().map(|&n| DenseMatrix::identity(n)).collect())
    }

    pub fn zero(sizes: &[usize]) -> Self {
        Self::block_diagonal(sizes.iter().map(|&n| DenseMatrix::zeros(n, n)).collect())
    }

    pub fn block_diagonal(d: Vec<DenseMatrix>) -> Self {
        let sizes: Vec<usize> = d.iter().map(|m| m.rows()).collect();
        Self { upper: Chain::empty(&sizes), lower: Chain::empty(&sizes), sizes, d }
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn size(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        offsets(&self.sizes)
    }

    pub fn d(&self, i: usize) -> &DenseMatrix {
        &self.d[i]
    }

    pub fn u(&self, i: usize) -> &DenseMatrix {
        &self.upper.u[i]
    }

    pub fn v(&self, i: usize) -> &DenseMatrix {
        &self.upper.v[i]
    }

    pub fn w(&self, i: usize) -> &DenseMatrix {
        &self.upper.w[i]
    }

    pub fn p(&self, i: usize) -> &DenseMatrix {
        &self.lower.v[i]
    }

    pub fn q(&self, i: usize) -> &DenseMatrix {
        &self.lower.u[i]
    }

    pub fn r(&self, i: usize) -> DenseMatrix {
        self.lower.w[i].transpose()
    }

    pub fn upper(&self) -> &Chain {
        &self.upper
    }

    pub fn lower(&self) -> &Chain {
        &self.lower
    }

    pub fn upper_ranks(&self) -> Vec<usize> {
        self.upper.ranks()
    }

    pub fn lower_ranks(&self) -> Vec<usize> {
        self.lower.ranks()
    }

    pub fn max_rank(&self) -> usize {
        self.upper_ranks().into_iter().chain(self.lower_ranks()).max().unwrap_or(0)
    }

    pub fn transpose(&self) -> Self {
        Self {
            sizes: self.sizes.clone(),
            d: self.d.iter().map(|m| m.transpose()).collect(),
            upper: self.lower.clone(),
            lower: self.upper.clone(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for m in out.d.iter_mut().chain(out.upper.u.iter_mut()).chain(out.lower.u.iter_mut()) {
            *m = m.scale(c);
        }
        out
    }

    pub(crate) fn split<'a>(&self, x: &'a [f64]) -> Vec<&'a [f64]> {
        let off = self.offsets();
        (0..self.sizes.len()).map(|i| &x[off[i]..off[i + 1]]).collect()
    }
}

/// Materializes every block through its chain product.
pub fn sss_to_dense(s: &SssForm) -> DenseMatrix {
    let off = s.offsets();
    let mut out = &s.upper.strict_upper_dense(&off) + &s.lower.strict_upper_dense(&off).transpose();
    for (i, d) in s.d.iter().enumerate() {
        out.set_block(off[i], off[i], d);
    }
    out
}

/// `A x` by one backward sweep for the upper chain and one forward sweep for
/// the lower chain.
pub fn sss_matvec(s: &SssForm, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != s.size() {
        return Err(Error::DimensionMismatch(format!("size {}, vector {}", s.size(), x.len())));
    }
    let xb = s.split(x);
    let up = s.upper.apply(&xb);
    let lo = s.lower.apply_t(&xb);
    let mut y = Vec::with_capacity(x.len());
    for i in 0..s.sizes.len() {
        let di = s.d[i].matvec(xb[i]);
        y.extend(di.iter().zip(&up[i]).zip(&lo[i]).map(|((a, b), c)| a + b + c));
    }
    ops::add(x.len() as u64);
    Ok(y)
}

/// `A^T x`.
pub fn sss_matvec_t(s: &SssForm, x: &[f64]) -> Result<Vec<f64>> {
    sss_matvec(&s.transpose(), x)
}

/// Banded matrix with blocks of size `bandwidth`: `D_i = A_ii`,
/// `U_i = A_{i,i+1}`, `P_i = A_{i,i-1}`, `V = Q = I`, `W = R = 0`.
pub fn sss_from_banded(a: &DenseMatrix, bandwidth: usize) -> Result<SssForm> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    for i in 0..n {
        for j in 0..n {
            if i.abs_diff(j) > bandwidth && a[(i, j)] != 0.0 {
                return Err(Error::BandViolation { row: i, col: j });
            }
        }
    }
    let sizes = uniform_blocks(n, bandwidth);
    let off = offsets(&sizes);
    let p = sizes.len();
    let blk = |i: usize, j: usize| a.submatrix(off[i], off[i + 1], off[j], off[j + 1]);
    let d = (0..p).map(|i| blk(i, i)).collect();
    let mut upper = Chain::empty(&sizes);
    let mut lower = Chain::empty(&sizes);
    for i in 0..p {
        let first = i == 0;
        let last = i + 1 == p;
        // Boundary k has rank n_{k+1} above the diagonal and n_k below.
        let (rp, rn) = (if first { 0 } else { sizes[i] }, if last { 0 } else { sizes[i + 1] });
        let (lp, ln) = (if first { 0 } else { sizes[i - 1] }, if last { 0 } else { sizes[i] });
        upper.u[i] = if last { DenseMatrix::zeros(sizes[i], 0) } else { blk(i, i + 1) };
        upper.v[i] = DenseMatrix::identity(sizes[i]).submatrix(0, sizes[i], 0, rp);
        upper.w[i] = DenseMatrix::zeros(rp, rn);
        lower.u[i] = DenseMatrix::identity(sizes[i]).submatrix(0, sizes[i], 0, ln);
        lower.v[i] = if first { DenseMatrix::zeros(sizes[i], 0) } else { blk(i, i - 1) };
        lower.w[i] = DenseMatrix::zeros(lp, ln);
    }
    SssForm::new(sizes, d, upper, lower)
}

/// Upper chain of `a` from successive truncated factorizations of the
/// Hankel blocks `a[..e_k, e_k..]`, each reusing the previous one.
fn build_chain(a: &DenseMatrix, sizes: &[usize], tol: f64) -> Chain {
    let n = a.rows();
    let off = offsets(sizes);
    let p = sizes.len();
    let floor = 16.0 * f64::EPSILON * a.frobenius_norm();
    let mut chain = Chain::empty(sizes);
    // F_{k-1}: coefficients of the previous Hankel block, columns from off[k].
    let mut f = DenseMatrix::zeros(0, n);
    for k in 0..p.saturating_sub(1) {
        let e = off[k + 1];
        let top = f.submatrix(0, f.rows(), e - off[k], n - off[k]);
        let m = top.vstack(&a.submatrix(off[k], e, e, n));
        let svd = truncated_svd(&m, Threshold { rel: tol, abs: floor });
        let r = svd.rank();
        chain.w[k] = svd.u.submatrix(0, top.rows(), 0, r);
        chain.u[k] = svd.u.submatrix(top.rows(), m.rows(), 0, r);
        f = svd.sv_t();
        chain.v[k + 1] = f.submatrix(0, r, 0, sizes[k + 1]).transpose();
    }
    if p > 0 {
        let r = chain.u.get(p.wrapping_sub(2)).map_or(0, |m| m.cols());
        chain.w[p - 1] = DenseMatrix::zeros(if p > 1 { r } else { 0 }, 0);
    }
    chain
}

/// Compresses a dense matrix into SSS form with the given block sizes; each
/// Hankel block is truncated at `tol` relative to its own norm.
pub fn sss_construct(a: &DenseMatrix, block_sizes: &[usize], tol: f64) -> Result<SssForm> {
    let n = a.rows();
    if !a.is_square() || block_sizes.iter().sum::<usize>() != n || block_sizes.is_empty() {
        return Err(Error::PartitionMismatch(format!(
            "{}x{} matrix, block sizes sum to {}",
            a.rows(),
            a.cols(),
            block_sizes.iter().sum::<usize>()
        )));
    }
    let off = offsets(block_sizes);
    let d = (0..block_sizes.len()).map(|i| a.submatrix(off[i], off[i + 1], off[i], off[i + 1])).collect();
    let upper = build_chain(a, block_sizes, tol);
    let lower = build_chain(&a.transpose(), block_sizes, tol);
    SssForm::new(block_sizes.to_vec(), d, upper, lower)
}

/// `a[..e_k, e_k..]`, the `k`-th upper Hankel block.
pub fn upper_hankel_block(a: &DenseMatrix, block_sizes: &[usize], k: usize) -> DenseMatrix {
    let e = offsets(block_sizes)[k + 1];
    a.submatrix(0, e, e, a.cols())
}

/// `a[e_k.., ..e_k]`, the `k`-th lower Hankel block.
pub fn lower_hankel_block(a: &DenseMatrix, block_sizes: &[usize], k: usize) -> DenseMatrix {
    let e = offsets(block_sizes)[k + 1];
    a.submatrix(e, a.rows(), 0, e)
}

/// Numerical ranks of all upper and lower Hankel blocks.
pub fn hankel_ranks(a: &DenseMatrix, block_sizes: &[usize], tol: f64) -> (Vec<usize>, Vec<usize>) {
    let p = block_sizes.len();
    let up = (0..p.saturating_sub(1)).map(|k| numerical_rank(&upper_hankel_block(a, block_sizes, k), tol)).collect();
    let lo = (0..p.saturating_sub(1)).map(|k| numerical_rank(&lower_hankel_block(a, block_sizes, k), tol)).collect();
    (up, lo)
}

#[cfg(test)]
mod tests;

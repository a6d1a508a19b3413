//! Rank-revealing factorizations.
//!
//! Everything here goes through one pipeline: Householder QR with column
//! pivoting (stopped early once the trailing columns are negligible), then a
//! one-sided Jacobi SVD of the small triangular factor. The early stop keeps
//! the cost proportional to the numerical rank for compressible blocks.

use crate::kernel::dense::{dot, DenseMatrix};
use crate::ops;

/// Singular-value cutoff: values at or below `max(rel * sigma_max, abs)` are
/// dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub rel: f64,
    pub abs: f64,
}

impl Threshold {
    pub fn relative(rel: f64) -> Self {
        Self { rel, abs: 0.0 }
    }

    pub fn absolute(abs: f64) -> Self {
        Self { rel: 0.0, abs }
    }

    pub fn cutoff(&self, sigma_max: f64) -> f64 {
        (self.rel * sigma_max).max(self.abs)
    }
}

/// `left * right^T` with `left: m x r`, `right: n x r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactors {
    pub left: DenseMatrix,
    pub right: DenseMatrix,
}

impl LowRankFactors {
    pub fn rank(&self) -> usize {
        self.left.cols()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.left.mul_t(&self.right)
    }
}

/// Thin truncated SVD `a ~ u diag(s) v^T` with orthonormal `u`, `v`.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
    /// Every singular value the pipeline resolved, descending (includes the
    /// discarded ones).
    pub spectrum: Vec<f64>,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `diag(s) v^T`, the coefficient matrix paired with the basis `u`.
    pub fn sv_t(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.s.len(), self.v.rows(), |i, j| self.s[i] * self.v[(j, i)])
    }

    /// `u diag(s)`.
    pub fn us(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.u.rows(), self.s.len(), |i, j| self.u[(i, j)] * self.s[j])
    }
}

struct Reflector {
    v: Vec<f64>,
    beta: f64,
    start: usize,
}

/// Column-pivoted Householder QR of `a`, `a P = Q R`, stopped when the
/// Frobenius norm of the unreduced trailing block drops to `stop_abs`.
struct PivotedQr {
    m: usize,
    reflectors: Vec<Reflector>,
    /// `k x n`, columns in pivoted order.
    r: DenseMatrix,
    perm: Vec<usize>,
}

impl PivotedQr {
    fn compute(a: &DenseMatrix, stop: impl Fn(f64) -> f64) -> Self {
        let (m, n) = a.shape();
        // Columns of `a` stored contiguously.
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut reflectors = Vec::new();
        let kmax = m.min(n);
        let mut stop_abs = 0.0;
        let mut norms: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
        ops::add((m * n) as u64);
        for j in 0..kmax {
            // Recompute the trailing norms exactly every few steps to avoid
            // cancellation in the downdated values.
            if j % 8 == 0 {
                for c in j..n {
                    norms[c] = dot(&cols[c][j..], &cols[c][j..]);
                }
                ops::add(((m - j) * (n - j)) as u64);
            }
            let (mut p, mut best) = (j, -1.0);
            let mut total = 0.0;
            for (c, &v) in norms.iter().enumerate().skip(j) {
                total += v;
                if v > best {
                    best = v;
                    p = c;
                }
            }
            if j == 0 {
                stop_abs = stop(best.sqrt());
            }
            if total.sqrt() <= stop_abs || best <= 0.0 {
                break;
            }
            cols.swap(j, p);
            norms.swap(j, p);
            perm.swap(j, p);

            let x = &cols[j][j..];
            let normx = dot(x, x).sqrt();
            let alpha = if x[0] >= 0.0 { -normx } else { normx };
            let mut v = x.to_vec();
            v[0] -= alpha;
            let vv = dot(&v, &v);
            let beta = if vv > 0.0 { 2.0 / vv } else { 0.0 };
            for c in cols.iter_mut().skip(j + 1) {
                let seg = &mut c[j..];
                let f = beta * dot(&v, seg);
                for (s, vi) in seg.iter_mut().zip(&v) {
                    *s -= f * vi;
                }
            }
            ops::add((2 * (m - j) * (n - j)) as u64);
            cols[j][j] = alpha;
            for e in cols[j][j + 1..].iter_mut() {
                *e = 0.0;
            }
            for (c, nc) in cols.iter().zip(norms.iter_mut()).skip(j + 1) {
                *nc = (*nc - c[j] * c[j]).max(0.0);
            }
            reflectors.push(Reflector { v, beta, start: j });
        }
        let k = reflectors.len();
        let r = DenseMatrix::from_fn(k, n, |i, c| if i < m { cols[c][i] } else { 0.0 });
        Self { m, reflectors, r, perm }
    }

    fn rank(&self) -> usize {
        self.reflectors.len()
    }

    /// `Q[:, :k] * y` for `y: k x r`.
    fn apply_q(&self, y: &DenseMatrix) -> DenseMatrix {
        let k = self.rank();
        assert_eq!(y.rows(), k);
        let mut out = DenseMatrix::zeros(self.m, y.cols());
        out.set_block(0, 0, y);
        let mut colbuf = vec![0.0; self.m];
        for c in 0..y.cols() {
            for i in 0..self.m {
                colbuf[i] = out[(i, c)];
            }
            for h in self.reflectors.iter().rev() {
                let seg = &mut colbuf[h.start..];
                let f = h.beta * dot(&h.v, seg);
                for (s, vi) in seg.iter_mut().zip(&h.v) {
                    *s -= f * vi;
                }
            }
            out.set_col(c, &colbuf);
        }
        ops::add((2 * self.m * k * y.cols()) as u64);
        out
    }

    /// `R P^T`, the triangular factor with columns back in natural order.
    fn r_unpermuted(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.r.rows(), self.r.cols());
        for (j, &pj) in self.perm.iter().enumerate() {
            for i in 0..self.r.rows() {
                out[(i, pj)] = self.r[(i, j)];
            }
        }
        out
    }
}

/// One-sided Jacobi SVD of `x` (`n x k`): returns `(u, sigma, v)` with
/// `x = u diag(sigma) v^T`, sigma descending. Columns of `u` belonging to
/// zero singular values are zero.
fn jacobi_svd(x: &DenseMatrix) -> (DenseMatrix, Vec<f64>, DenseMatrix) {
    let (n, k) = x.shape();
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| x.col(j)).collect();
    let mut vcols: Vec<Vec<f64>> =
        (0..k).map(|j| (0..k).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                ops::add((3 * n) as u64);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
                ops::add((4 * (n + k)) as u64);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> =
        cols.iter().enumerate().map(|(j, c)| (dot(c, c).sqrt(), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let sigma: Vec<f64> = order.iter().map(|o| o.0).collect();
    let mut u = DenseMatrix::zeros(n, k);
    let mut v = DenseMatrix::zeros(k, k);
    for (dst, &(s, src)) in order.iter().enumerate() {
        if s > 0.0 {
            let scaled: Vec<f64> = cols[src].iter().map(|e| e / s).collect();
            u.set_col(dst, &scaled);
        }
        v.set_col(dst, &vcols[src]);
    }
    (u, sigma, v)
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (xp, xq) = (&mut lo[p], &mut hi[0]);
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let (va, vb) = (*a, *b);
        *a = c * va - s * vb;
        *b = s * va + c * vb;
    }
}

/// Truncated SVD of `a` at the given threshold.
pub fn truncated_svd(a: &DenseMatrix, th: Threshold) -> TruncatedSvd {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return TruncatedSvd {
            u: DenseMatrix::zeros(m, 0),
            s: vec![],
            v: DenseMatrix::zeros(n, 0),
            spectrum: vec![],
        };
    }
    // Stop the QR once the remainder is well below any admissible cutoff.
    // The first pivot norm bounds sigma_max from below, so this never drops
    // a singular value the threshold would keep.
    let qr = PivotedQr::compute(a, |first| 1e-2 * th.cutoff(first));
    let k = qr.rank();
    if k == 0 {
        return TruncatedSvd {
            u: DenseMatrix::zeros(m, 0),
            s: vec![],
            v: DenseMatrix::zeros(n, 0),
            spectrum: vec![],
        };
    }
    // R^T = Ux S Vx^T  =>  R = Vx S Ux^T  =>  a = (Q Vx) S (P Ux)^T.
    let (ux, sigma, vx) = jacobi_svd(&qr.r.transpose());
    let cutoff = th.cutoff(sigma[0]);
    let r = sigma.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    let u = qr.apply_q(&vx.submatrix(0, k, 0, r));
    let mut v = DenseMatrix::zeros(n, r);
    for (j, &pj) in qr.perm.iter().enumerate() {
        v.row_mut(pj).copy_from_slice(&ux.row(j)[..r]);
    }
    TruncatedSvd { u, s: sigma[..r].to_vec(), v, spectrum: sigma }
}

/// All singular values of `a`, descending.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return vec![];
    }
    let qr = PivotedQr::compute(a, |_| 0.0);
    if qr.rank() == 0 {
        return vec![0.0; a.rows().min(a.cols())];
    }
    let (_, mut sigma, _) = jacobi_svd(&qr.r.transpose());
    sigma.resize(a.rows().min(a.cols()), 0.0);
    sigma
}

/// Low-rank factors with `||a - left right^T||_2 <= tol * ||a||_2`.
pub fn truncated_factorization(a: &DenseMatrix, tol: f64) -> LowRankFactors {
    let svd = truncated_svd(a, Threshold::relative(tol));
    LowRankFactors { left: svd.us(), right: svd.v }
}

/// Number of singular values strictly above `tol * sigma_max`.
pub fn numerical_rank(a: &DenseMatrix, tol: f64) -> usize {
    truncated_svd(a, Threshold::relative(tol)).rank()
}

/// Orthonormal basis `q` (`m x k`) and coefficients `r` (`k x n`) with
/// `a = q r`; exactly dependent trailing columns are dropped.
pub fn orthonormal_factor(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    if a.rows() == 0 || a.cols() == 0 {
        return (DenseMatrix::zeros(a.rows(), 0), DenseMatrix::zeros(0, a.cols()));
    }
    let qr = PivotedQr::compute(a, |_| 0.0);
    let k = qr.rank();
    let q = qr.apply_q(&DenseMatrix::identity(k));
    (q, qr.r_unpermuted())
}

/// Recompresses `p q^T` (both `n x k`) to the smallest width allowed by `th`,
/// applied to the singular values of the product.
pub fn recompress(p: &DenseMatrix, q: &DenseMatrix, th: Threshold) -> (DenseMatrix, DenseMatrix) {
    let (qp, rp) = orthonormal_factor(p);
    let (qq, rq) = orthonormal_factor(q);
    let core = rp.mul_t(&rq);
    let svd = truncated_svd(&core, th);
    (&qp * &svd.us(), &qq * &svd.v)
}

use super::{hss_matvec, HssForm, PartitionTree};
use crate::error::{Error, Result};
use crate::kernel::{orthonormal_factor, truncated_svd, DenseMatrix, Threshold};

fn same_tree(a: &HssForm, b: &HssForm) -> Result<()> {
    if a.tree != b.tree {
        return Err(Error::PartitionMismatch("operands live on different trees".into()));
    }
    Ok(())
}

/// Lower bound on `||A||_2` from a few power iterations on `A^T A`.
pub fn hss_norm_estimate(h: &HssForm) -> f64 {
    let n = h.size();
    if n == 0 {
        return 0.0;
    }
    let ht = h.transpose();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.618_033_988_75).fract()).collect();
    let mut est = 0.0;
    for _ in 0..8 {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let y = hss_matvec(h, &x).expect("sizes agree");
        est = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = hss_matvec(&ht, &y).expect("sizes agree");
    }
    est
}

/// Makes the row bases orthonormal bottom-up, pushing each triangular factor
/// into the node's own translation and coupling.
fn orthonormalize_rows(h: &mut HssForm) {
    let t = h.tree.clone();
    if t.num_nodes() == 1 {
        return;
    }
    for id in t.leaf_ids() {
        let i = t.leaf_index(id);
        let (q, s) = orthonormal_factor(&h.u[i]);
        h.u[i] = q;
        h.r[id] = &s * &h.r[id];
        h.b[id] = &s * &h.b[id];
    }
    for id in (1..t.first_leaf()).rev() {
        let (l, r) = PartitionTree::children(id);
        let x = h.r[l].vstack(&h.r[r]);
        let (q, s) = orthonormal_factor(&x);
        let pl = h.r[l].rows();
        h.r[l] = q.submatrix(0, pl, 0, q.cols());
        h.r[r] = q.submatrix(pl, x.rows(), 0, q.cols());
        h.r[id] = &s * &h.r[id];
        h.b[id] = &s * &h.b[id];
    }
    let (l, r) = PartitionTree::children(0);
    h.r[l] = DenseMatrix::zeros(h.r[l].rows(), 0);
    h.r[r] = DenseMatrix::zeros(h.r[r].rows(), 0);
}

/// Truncates the row bases top-down. With orthonormal bases on both sides,
/// the row Hankel block of node `c` has the singular values of
/// `[B_c, R_c G_parent]`, where `G_parent` is the parent's truncated
/// coefficient.
fn truncate_rows(h: &mut HssForm, th: Threshold) {
    let t = h.tree.clone();
    let nn = t.num_nodes();
    let mut g = vec![DenseMatrix::zeros(0, 0); nn];
    for id in 1..nn {
        let par = PartitionTree::parent(id);
        let e = h.b[id].hstack(&(&h.r[id] * &g[par]));
        let svd = truncated_svd(&e, th);
        let phi = svd.u.clone();
        h.b[id] = phi.t_mul(&h.b[id]);
        h.r[id] = phi.t_mul(&h.r[id]);
        if t.is_leaf(id) {
            let i = t.leaf_index(id);
            h.u[i] = &h.u[i] * &phi;
        } else {
            let (l, r) = PartitionTree::children(id);
            h.r[l] = &h.r[l] * &phi;
            h.r[r] = &h.r[r] * &phi;
        }
        g[id] = DenseMatrix::diag(&svd.s);
    }
}

/// Transposes in place: rows become columns and couplings swap siblings.
fn transpose_in_place(h: &mut HssForm) {
    *h = h.transpose();
}

/// Re-truncates every Hankel block of `h` at relative tolerance `tol`.
pub fn hss_recompress(h: &HssForm, tol: f64) -> HssForm {
    recompress_with_scale(h, tol, hss_norm_estimate(h))
}

pub(crate) fn recompress_with_scale(h: &HssForm, tol: f64, scale: f64) -> HssForm {
    let th = Threshold { rel: tol, abs: (1e-3 * tol).max(64.0 * f64::EPSILON) * scale };
    let mut out = h.clone();
    orthonormalize_rows(&mut out);
    transpose_in_place(&mut out);
    orthonormalize_rows(&mut out);
    truncate_rows(&mut out, th);
    transpose_in_place(&mut out);
    truncate_rows(&mut out, th);
    out
}

/// `A + B` before recompression: every rank is the sum of the operands'.
pub fn hss_add_uncompressed(a: &HssForm, b: &HssForm) -> Result<HssForm> {
    same_tree(a, b)?;
    let zip = |x: &[DenseMatrix], y: &[DenseMatrix], f: fn(&DenseMatrix, &DenseMatrix) -> DenseMatrix| {
        x.iter().zip(y).map(|(p, q)| f(p, q)).collect::<Vec<_>>()
    };
    Ok(HssForm::from_parts(
        a.tree.clone(),
        zip(&a.d, &b.d, |p, q| p + q),
        zip(&a.u, &b.u, DenseMatrix::hstack),
        zip(&a.v, &b.v, DenseMatrix::hstack),
        zip(&a.r, &b.r, DenseMatrix::block_diag),
        zip(&a.w, &b.w, DenseMatrix::block_diag),
        zip(&a.b, &b.b, DenseMatrix::block_diag),
    ))
}

/// `A + B`, recompressed at `1e-12`.
pub fn hss_add(a: &HssForm, b: &HssForm) -> Result<HssForm> {
    let sum = hss_add_uncompressed(a, b)?;
    let scale = hss_norm_estimate(a) + hss_norm_estimate(b);
    Ok(recompress_with_scale(&sum, 1e-12, scale))
}

/// `A B` before recompression.
///
/// `Phi_c = V^A_c^T U^B_c` is gathered bottom-up; `Theta_c`, the coupling
/// that indices outside `c` contribute to the product's block `(c, c)`, is
/// pushed top-down. The product's bases are `[U^A_c, A_cc U^B_c]` and
/// `[V^B_c, B_cc^T V^A_c]`, so each rank is the sum of the operands'.
pub fn hss_multiply_uncompressed(a: &HssForm, b: &HssForm) -> Result<HssForm> {
    same_tree(a, b)?;
    let t = &a.tree;
    let nn = t.num_nodes();
    let mut phi = vec![DenseMatrix::zeros(0, 0); nn];
    for id in t.leaf_ids() {
        let i = t.leaf_index(id);
        phi[id] = a.v[i].t_mul(&b.u[i]);
    }
    for id in (1..t.first_leaf()).rev() {
        let (l, r) = PartitionTree::children(id);
        phi[id] = &(&a.w[l].t_mul(&phi[l]) * &b.r[l]) + &(&a.w[r].t_mul(&phi[r]) * &b.r[r]);
    }
    let mut theta = vec![DenseMatrix::zeros(0, 0); nn];
    for c in 1..nn {
        let s = PartitionTree::sibling(c);
        let par = PartitionTree::parent(c);
        let near = &(&a.b[c] * &phi[s]) * &b.b[s];
        let far = (&a.r[c] * &theta[par]).mul_t(&b.w[c]);
        theta[c] = &near + &far;
    }

    let mut d = Vec::with_capacity(t.num_leaves());
    let mut u = Vec::with_capacity(t.num_leaves());
    let mut v = Vec::with_capacity(t.num_leaves());
    for id in t.leaf_ids() {
        let i = t.leaf_index(id);
        let (da, db) = (&a.d[i], &b.d[i]);
        d.push(&(da * db) + &(&a.u[i] * &theta[id]).mul_t(&b.v[i]));
        u.push(a.u[i].hstack(&(da * &b.u[i])));
        v.push(b.v[i].hstack(&db.t_mul(&a.v[i])));
    }
    let mut r = vec![DenseMatrix::zeros(0, 0); nn];
    let mut w = vec![DenseMatrix::zeros(0, 0); nn];
    let mut bc = vec![DenseMatrix::zeros(0, 0); nn];
    for c in 1..nn {
        let s = PartitionTree::sibling(c);
        let par = PartitionTree::parent(c);
        let (pac, pbc) = (a.p(c), b.p(c));
        let (qac, qbc) = (a.q(c), b.q(c));
        r[c] = DenseMatrix::blocks2(
            &a.r[c],
            &(&(&a.b[c] * &phi[s]) * &b.r[s]),
            &DenseMatrix::zeros(pbc, a.p(par)),
            &b.r[c],
        );
        w[c] = DenseMatrix::blocks2(
            &b.w[c],
            &(&(&b.b[s].transpose() * &phi[s].transpose()) * &a.w[s]),
            &DenseMatrix::zeros(qac, b.q(par)),
            &a.w[c],
        );
        bc[c] = DenseMatrix::blocks2(
            &(&a.r[c] * &theta[par]).mul_t(&b.w[s]),
            &a.b[c],
            &b.b[c],
            &DenseMatrix::zeros(pbc, a.q(s)),
        );
        debug_assert_eq!(r[c].rows(), pac + pbc);
        debug_assert_eq!(w[c].rows(), qbc + qac);
    }
    Ok(HssForm::from_parts(t.clone(), d, u, v, r, w, bc))
}

/// `A B`, recompressed at `1e-12`.
pub fn hss_multiply(a: &HssForm, b: &HssForm) -> Result<HssForm> {
    let prod = hss_multiply_uncompressed(a, b)?;
    let scale = hss_norm_estimate(a) * hss_norm_estimate(b);
    Ok(recompress_with_scale(&prod, 1e-12, scale))
}

//! Hierarchically semiseparable matrices over a complete binary tree.
//!
//! Leaves carry `D`, `U`, `V`; every non-root node `c` carries the
//! translations `R_c` (`p_c x p_parent`) and `W_c` (`q_c x q_parent`) and the
//! coupling `B_c = B_{c, sibling(c)}` (`p_c x q_sibling`). The bases nest:
//! `U_parent = [U_left R_left; U_right R_right]`, and likewise for `V`, `W`.

mod arith;
mod factor;
mod solve;
mod tree;

pub use arith::{hss_add, hss_add_uncompressed, hss_multiply, hss_multiply_uncompressed, hss_recompress};
pub use factor::{hss_invert, hss_invert_triangular, hss_lu};
pub use solve::{hss_diagonal_representation_check, hss_embedding, hss_sparse_solve, hss_sparse_solve_with_stats};
pub use tree::PartitionTree;

use crate::error::{Error, Result};
use crate::kernel::{truncated_svd, DenseMatrix, Threshold};

#[derive(Debug, Clone, PartialEq)]
pub struct HssForm {
    pub(crate) tree: PartitionTree,
    pub(crate) d: Vec<DenseMatrix>,
    pub(crate) u: Vec<DenseMatrix>,
    pub(crate) v: Vec<DenseMatrix>,
    pub(crate) r: Vec<DenseMatrix>,
    pub(crate) w: Vec<DenseMatrix>,
    pub(crate) b: Vec<DenseMatrix>,
}

fn dims(m: &DenseMatrix, rows: usize, cols: usize, what: &str, id: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch(format!(
            "{what} at node {id} is {}x{}, expected {rows}x{cols}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

impl HssForm {
    /// Leaf data is indexed by leaf position, node data by node id (the
    /// root entries of `r`, `w`, `b` are ignored and stored as `0 x 0`).
    pub fn new(
        tree: PartitionTree,
        d: Vec<DenseMatrix>,
        u: Vec<DenseMatrix>,
        v: Vec<DenseMatrix>,
        r: Vec<DenseMatrix>,
        w: Vec<DenseMatrix>,
        b: Vec<DenseMatrix>,
    ) -> Result<Self> {
        let (nl, nn) = (tree.num_leaves(), tree.num_nodes());
        if d.len() != nl || u.len() != nl || v.len() != nl || r.len() != nn || w.len() != nn || b.len() != nn {
            return Err(Error::PartitionMismatch("generator counts do not match the tree".into()));
        }
        let h = Self { tree, d, u, v, r, w, b };
        h.validate()?;
        Ok(h)
    }

    fn validate(&self) -> Result<()> {
        let t = &self.tree;
        for id in t.leaf_ids() {
            let i = t.leaf_index(id);
            let m = t.size(id);
            dims(&self.d[i], m, m, "D", id)?;
            dims(&self.u[i], m, self.p(id), "U", id)?;
            dims(&self.v[i], m, self.q(id), "V", id)?;
        }
        for c in 1..t.num_nodes() {
            let par = PartitionTree::parent(c);
            let sib = PartitionTree::sibling(c);
            dims(&self.r[c], self.p(c), self.p(par), "R", c)?;
            dims(&self.w[c], self.q(c), self.q(par), "W", c)?;
            dims(&self.b[c], self.p(c), self.q(sib), "B", c)?;
        }
        for row in self.d.iter().chain(&self.u).chain(&self.v).chain(&self.r).chain(&self.w).chain(&self.b) {
            if let Some(k) = row.data().iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { row: k / row.cols().max(1), col: k % row.cols().max(1) });
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts(
        tree: PartitionTree,
        d: Vec<DenseMatrix>,
        u: Vec<DenseMatrix>,
        v: Vec<DenseMatrix>,
        r: Vec<DenseMatrix>,
        w: Vec<DenseMatrix>,
        b: Vec<DenseMatrix>,
    ) -> Self {
        let h = Self { tree, d, u, v, r, w, b };
        debug_assert!(h.validate().is_ok(), "{:?}", h.validate());
        h
    }

    /// Block diagonal matrix with every off-diagonal rank zero.
    pub fn block_diagonal(tree: &PartitionTree, d: Vec<DenseMatrix>) -> Result<Self> {
        let nn = tree.num_nodes();
        let u: Vec<_> = tree.leaf_sizes().iter().map(|&m| DenseMatrix::zeros(m, 0)).collect();
        let empty = vec![DenseMatrix::zeros(0, 0); nn];
        Self::new(tree.clone(), d, u.clone(), u, empty.clone(), empty.clone(), empty)
    }

    pub fn identity(tree: &PartitionTree) -> Self {
        let d = tree.leaf_sizes().iter().map(|&m| DenseMatrix::identity(m)).collect();
        Self::block_diagonal(tree, d).expect("identity blocks match the tree")
    }

    pub fn zero(tree: &PartitionTree) -> Self {
        let d = tree.leaf_sizes().iter().map(|&m| DenseMatrix::zeros(m, m)).collect();
        Self::block_diagonal(tree, d).expect("zero blocks match the tree")
    }

    pub fn tree(&self) -> &PartitionTree {
        &self.tree
    }

    pub fn size(&self) -> usize {
        self.tree.n()
    }

    /// Leaf diagonal block by leaf position.
    pub fn d(&self, leaf: usize) -> &DenseMatrix {
        &self.d[leaf]
    }

    pub fn u(&self, leaf: usize) -> &DenseMatrix {
        &self.u[leaf]
    }

    pub fn v(&self, leaf: usize) -> &DenseMatrix {
        &self.v[leaf]
    }

    pub fn r(&self, id: usize) -> &DenseMatrix {
        &self.r[id]
    }

    pub fn w(&self, id: usize) -> &DenseMatrix {
        &self.w[id]
    }

    /// `B_{id, sibling(id)}`.
    pub fn b(&self, id: usize) -> &DenseMatrix {
        &self.b[id]
    }

    /// Row rank `p` of node `id` (zero at the root).
    pub fn p(&self, id: usize) -> usize {
        if id == 0 {
            0
        } else {
            self.r[id].rows()
        }
    }

    /// Column rank `q` of node `id` (zero at the root).
    pub fn q(&self, id: usize) -> usize {
        if id == 0 {
            0
        } else {
            self.w[id].rows()
        }
    }

    pub fn row_ranks(&self) -> Vec<usize> {
        (0..self.tree.num_nodes()).map(|c| self.p(c)).collect()
    }

    pub fn col_ranks(&self) -> Vec<usize> {
        (0..self.tree.num_nodes()).map(|c| self.q(c)).collect()
    }

    pub fn max_rank(&self) -> usize {
        (0..self.tree.num_nodes()).map(|c| self.p(c).max(self.q(c))).max().unwrap_or(0)
    }

    pub fn transpose(&self) -> Self {
        let nn = self.tree.num_nodes();
        let b = (0..nn).map(|c| if c == 0 { DenseMatrix::zeros(0, 0) } else { self.b[PartitionTree::sibling(c)].transpose() });
        Self::from_parts(
            self.tree.clone(),
            self.d.iter().map(DenseMatrix::transpose).collect(),
            self.v.clone(),
            self.u.clone(),
            self.w.clone(),
            self.r.clone(),
            b.collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut h = self.clone();
        h.d.iter_mut().for_each(|m| *m = m.scale(s));
        h.b.iter_mut().for_each(|m| *m = m.scale(s));
        h
    }

    /// Materialized bases `U_c` of every node, built bottom-up through the
    /// translations. The root entry is `n x 0`.
    pub fn row_bases(&self) -> Vec<DenseMatrix> {
        nested_bases(&self.tree, &self.u, &self.r)
    }

    pub fn col_bases(&self) -> Vec<DenseMatrix> {
        nested_bases(&self.tree, &self.v, &self.w)
    }
}

fn nested_bases(tree: &PartitionTree, leaves: &[DenseMatrix], trans: &[DenseMatrix]) -> Vec<DenseMatrix> {
    let nn = tree.num_nodes();
    let mut out = vec![DenseMatrix::zeros(0, 0); nn];
    for id in tree.leaf_ids() {
        out[id] = leaves[tree.leaf_index(id)].clone();
    }
    for id in (0..tree.first_leaf()).rev() {
        let (a, b) = PartitionTree::children(id);
        out[id] = (&out[a] * &trans[a]).vstack(&(&out[b] * &trans[b]));
    }
    out
}

pub fn hss_to_dense(h: &HssForm) -> DenseMatrix {
    let t = &h.tree;
    let n = t.n();
    let mut a = DenseMatrix::zeros(n, n);
    for id in t.leaf_ids() {
        let s = t.start(id);
        a.set_block(s, s, &h.d[t.leaf_index(id)]);
    }
    let ub = h.row_bases();
    let vb = h.col_bases();
    for c in 1..t.num_nodes() {
        let s = PartitionTree::sibling(c);
        let blk = (&ub[c] * &h.b[c]).mul_t(&vb[s]);
        a.set_block(t.start(c), t.start(s), &blk);
    }
    a
}

pub fn hss_matvec(h: &HssForm, x: &[f64]) -> Result<Vec<f64>> {
    let t = &h.tree;
    if x.len() != t.n() {
        return Err(Error::DimensionMismatch(format!("vector of length {} for n = {}", x.len(), t.n())));
    }
    let nn = t.num_nodes();
    let mut g: Vec<Vec<f64>> = vec![Vec::new(); nn];
    for id in t.leaf_ids() {
        g[id] = h.v[t.leaf_index(id)].matvec_t(&x[t.range(id)]);
    }
    for id in (1..t.first_leaf()).rev() {
        let (a, b) = PartitionTree::children(id);
        let mut s = h.w[a].matvec_t(&g[a]);
        h.w[b].matvec_t(&g[b]).iter().zip(s.iter_mut()).for_each(|(v, o)| *o += v);
        g[id] = s;
    }
    let mut f: Vec<Vec<f64>> = vec![Vec::new(); nn];
    for c in 1..nn {
        let mut s = h.r[c].matvec(&f[PartitionTree::parent(c)]);
        h.b[c].matvec(&g[PartitionTree::sibling(c)]).iter().zip(s.iter_mut()).for_each(|(v, o)| *o += v);
        f[c] = s;
    }
    let mut y = vec![0.0; t.n()];
    for id in t.leaf_ids() {
        let i = t.leaf_index(id);
        let mut yi = h.d[i].matvec(&x[t.range(id)]);
        h.u[i].matvec(&f[id]).iter().zip(yi.iter_mut()).for_each(|(v, o)| *o += v);
        y[t.range(id)].copy_from_slice(&yi);
    }
    Ok(y)
}

/// Columns of `f` (indexed over the complement of node `c`) that also lie
/// outside `c`'s parent.
fn restrict_outside(f: &DenseMatrix, tree: &PartitionTree, c: usize) -> DenseMatrix {
    let par = PartitionTree::parent(c);
    let keep_head = tree.start(par);
    let tail = tree.start(c) + tree.range(par).end - tree.range(c).end;
    f.submatrix(0, f.rows(), 0, keep_head).hstack(&f.submatrix(0, f.rows(), tail, f.cols()))
}

/// Leaf bases and translations for the row Hankel blocks `a[c, outside c]`.
fn build_row_side(a: &DenseMatrix, tree: &PartitionTree, th: Threshold) -> (Vec<DenseMatrix>, Vec<DenseMatrix>) {
    let n = tree.n();
    let nn = tree.num_nodes();
    let mut leaves = vec![DenseMatrix::zeros(0, 0); tree.num_leaves()];
    let mut trans = vec![DenseMatrix::zeros(0, 0); nn];
    if nn == 1 {
        leaves[0] = DenseMatrix::zeros(n, 0);
        return (leaves, trans);
    }
    let mut coef = vec![DenseMatrix::zeros(0, 0); nn];
    for id in tree.leaf_ids() {
        let rg = tree.range(id);
        let h = a.submatrix(rg.start, rg.end, 0, rg.start).hstack(&a.submatrix(rg.start, rg.end, rg.end, n));
        let svd = truncated_svd(&h, th);
        coef[id] = svd.sv_t();
        leaves[tree.leaf_index(id)] = svd.u;
    }
    for id in (1..tree.first_leaf()).rev() {
        let (l, r) = PartitionTree::children(id);
        let top = restrict_outside(&coef[l], tree, l);
        let m = top.vstack(&restrict_outside(&coef[r], tree, r));
        let svd = truncated_svd(&m, th);
        let k = svd.rank();
        trans[l] = svd.u.submatrix(0, top.rows(), 0, k);
        trans[r] = svd.u.submatrix(top.rows(), m.rows(), 0, k);
        coef[id] = svd.sv_t();
    }
    let (l, r) = PartitionTree::children(0);
    trans[l] = DenseMatrix::zeros(coef[l].rows(), 0);
    trans[r] = DenseMatrix::zeros(coef[r].rows(), 0);
    (leaves, trans)
}

/// Compresses a dense matrix into HSS form. Every row and column Hankel
/// block is truncated at `tol` relative to its own norm, so the ranks are
/// the numerical ranks of those blocks.
pub fn hss_construct(a: &DenseMatrix, tree: &PartitionTree, tol: f64) -> Result<HssForm> {
    if !a.is_square() || a.rows() != tree.n() {
        return Err(Error::PartitionMismatch(format!("{}x{} matrix for a tree over {}", a.rows(), a.cols(), tree.n())));
    }
    let th = Threshold { rel: tol, abs: 16.0 * f64::EPSILON * a.frobenius_norm() };
    let (u, r) = build_row_side(a, tree, th);
    let (v, w) = build_row_side(&a.transpose(), tree, th);
    let d = tree
        .leaf_ids()
        .map(|id| {
            let rg = tree.range(id);
            a.submatrix(rg.start, rg.end, rg.start, rg.end)
        })
        .collect();
    let ub = nested_bases(tree, &u, &r);
    let vb = nested_bases(tree, &v, &w);
    let b = (0..tree.num_nodes())
        .map(|c| {
            if c == 0 {
                return DenseMatrix::zeros(0, 0);
            }
            let s = PartitionTree::sibling(c);
            let (rc, rs) = (tree.range(c), tree.range(s));
            &ub[c].t_mul(&a.submatrix(rc.start, rc.end, rs.start, rs.end)) * &vb[s]
        })
        .collect();
    let h = HssForm { tree: tree.clone(), d, u, v, r, w, b };
    h.validate()?;
    Ok(h)
}

/// Row Hankel block `a[c, outside c]` of node `c`.
pub fn row_hankel_block(a: &DenseMatrix, tree: &PartitionTree, c: usize) -> DenseMatrix {
    let rg = tree.range(c);
    let n = tree.n();
    a.submatrix(rg.start, rg.end, 0, rg.start).hstack(&a.submatrix(rg.start, rg.end, rg.end, n))
}

/// Column Hankel block `a[outside c, c]` of node `c`.
pub fn col_hankel_block(a: &DenseMatrix, tree: &PartitionTree, c: usize) -> DenseMatrix {
    row_hankel_block(&a.transpose(), tree, c).transpose()
}

/// Numerical ranks of every node's row and column Hankel blocks (root: 0).
pub fn hss_hankel_ranks(a: &DenseMatrix, tree: &PartitionTree, tol: f64) -> (Vec<usize>, Vec<usize>) {
    use crate::kernel::numerical_rank;
    let nn = tree.num_nodes();
    let rows = (0..nn).map(|c| if c == 0 { 0 } else { numerical_rank(&row_hankel_block(a, tree, c), tol) });
    let cols = (0..nn).map(|c| if c == 0 { 0 } else { numerical_rank(&col_hankel_block(a, tree, c), tol) });
    (rows.collect(), cols.collect())
}

/// `A_ij = 1 / (x_i - y_j)` with `x` equispaced on `[0, 1]` and `y` on
/// `[2, 3]`; every off-diagonal block is numerically low rank.
pub fn separated_kernel(n: usize) -> DenseMatrix {
    let h = 1.0 / (n.max(2) - 1) as f64;
    DenseMatrix::from_fn(n, n, |i, j| 1.0 / (i as f64 * h - (2.0 + j as f64 * h)))
}

#[cfg(test)]
mod tests;

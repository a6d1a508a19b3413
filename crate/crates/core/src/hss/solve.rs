use super::{HssForm, PartitionTree};
use crate::blocksparse::{BlockSparse, EliminationStats};
use crate::error::{Error, Result};
use crate::kernel::{dense_inverse, DenseMatrix};

/// Sparse embedding over the unknowns `(g_c, f_c, x_c)` of every non-root
/// node `c` (`x_c` only at leaves):
///
/// `g_c - V_c^T x_c = 0` at leaves, `g_c - sum W_k^T g_k = 0` over the
/// children `k` otherwise,
/// `f_c - R_c f_parent - B_c g_sibling = 0`,
/// `U_c f_c + D_c x_c = b_c` at leaves.
#[derive(Debug, Clone)]
pub struct HssEmbedding {
    pub system: BlockSparse,
    /// Node id of each group.
    pub nodes: Vec<usize>,
    /// `(|g|, |f|, |x|)` per group.
    pub layout: Vec<(usize, usize, usize)>,
    /// Leaves first, then each level up to the root's children.
    pub order: Vec<usize>,
}

pub fn hss_embedding(h: &HssForm) -> HssEmbedding {
    let t = &h.tree;
    let nn = t.num_nodes();
    let nodes: Vec<usize> = if nn == 1 { vec![0] } else { (1..nn).collect() };
    let mut group = vec![usize::MAX; nn];
    for (k, &id) in nodes.iter().enumerate() {
        group[id] = k;
    }
    let layout: Vec<(usize, usize, usize)> = nodes
        .iter()
        .map(|&id| (h.q(id), h.p(id), if t.is_leaf(id) { t.size(id) } else { 0 }))
        .collect();
    let sizes: Vec<usize> = layout.iter().map(|&(g, f, x)| g + f + x).collect();
    let mut m = BlockSparse::new(sizes.clone());
    for (k, &id) in nodes.iter().enumerate() {
        let (g, f, _) = layout[k];
        let mut diag = DenseMatrix::identity(sizes[k]);
        if t.is_leaf(id) {
            let i = t.leaf_index(id);
            diag.set_block(0, g + f, &h.v[i].transpose().scale(-1.0));
            diag.set_block(g + f, g, &h.u[i]);
            diag.set_block(g + f, g + f, &h.d[i]);
        } else {
            let (a, b) = PartitionTree::children(id);
            for c in [a, b] {
                let mut blk = DenseMatrix::zeros(sizes[k], sizes[group[c]]);
                blk.set_block(0, 0, &h.w[c].transpose().scale(-1.0));
                m.add(k, group[c], &blk);
            }
        }
        m.add(k, k, &diag);
        if id == 0 {
            continue;
        }
        let sib = PartitionTree::sibling(id);
        let mut blk = DenseMatrix::zeros(sizes[k], sizes[group[sib]]);
        blk.set_block(g, 0, &h.b[id].scale(-1.0));
        m.add(k, group[sib], &blk);
        let par = PartitionTree::parent(id);
        if par != 0 {
            let mut blk = DenseMatrix::zeros(sizes[k], sizes[group[par]]);
            blk.set_block(g, layout[group[par]].0, &h.r[id].scale(-1.0));
            m.add(k, group[par], &blk);
        }
    }
    let order = if nn == 1 { vec![0] } else { (1..nn).rev().map(|id| group[id]).collect() };
    HssEmbedding { system: m, nodes, layout, order }
}

/// Solves `A x = b` through the sparse embedding, eliminating leaves first
/// and then one level at a time; this order creates no fill-in.
pub fn hss_sparse_solve(h: &HssForm, b: &[f64], pivot_tol: f64) -> Result<Vec<f64>> {
    Ok(hss_sparse_solve_with_stats(h, b, pivot_tol)?.0)
}

/// [`hss_sparse_solve`] together with the elimination statistics.
pub fn hss_sparse_solve_with_stats(h: &HssForm, b: &[f64], pivot_tol: f64) -> Result<(Vec<f64>, EliminationStats)> {
    let t = &h.tree;
    if b.len() != t.n() {
        return Err(Error::DimensionMismatch(format!("size {}, vector {}", t.n(), b.len())));
    }
    let emb = hss_embedding(h);
    let rhs: Vec<Vec<f64>> = emb
        .nodes
        .iter()
        .zip(&emb.layout)
        .map(|(&id, &(g, f, _))| {
            let mut r = vec![0.0; g + f];
            if t.is_leaf(id) {
                r.extend_from_slice(&b[t.range(id)]);
            }
            r
        })
        .collect();
    let (sol, stats) = emb.system.solve(&emb.order, &rhs, pivot_tol)?;
    debug_assert_eq!(stats.fill_in_blocks, 0);
    let mut x = vec![0.0; t.n()];
    for ((&id, &(g, f, _)), s) in emb.nodes.iter().zip(&emb.layout).zip(&sol) {
        if t.is_leaf(id) {
            x[t.range(id)].copy_from_slice(&s[g + f..]);
        }
    }
    Ok((x, stats))
}

fn prefix(sizes: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut out = vec![0];
    for s in sizes {
        out.push(out.last().unwrap() + s);
    }
    out
}

/// Dense evaluation of
/// `D + U P^T (I - R Z_down)^{-1} B Z_sib (I - Z_down^T W^T)^{-1} P V^T`
/// with every operator assembled explicitly over tree-indexed vectors.
/// Only meant for small `n`.
pub fn hss_diagonal_representation_check(h: &HssForm) -> Result<DenseMatrix> {
    let t = &h.tree;
    let n = t.n();
    let nn = t.num_nodes();
    let leaves: Vec<usize> = t.leaf_ids().collect();
    let fo = prefix((0..nn).map(|c| h.p(c)));
    let go = prefix((0..nn).map(|c| h.q(c)));
    // Slot spaces indexed by node id (the root slot is empty).
    let slot = |f: &dyn Fn(usize) -> usize| prefix((0..nn).map(|c| if c == 0 { 0 } else { f(c) }));
    let sp = slot(&|c| h.p(PartitionTree::parent(c)));
    let sq = slot(&|c| h.q(PartitionTree::parent(c)));
    let ss = slot(&|c| h.q(PartitionTree::sibling(c)));
    let lp = prefix(leaves.iter().map(|&c| h.p(c)));
    let lq = prefix(leaves.iter().map(|&c| h.q(c)));
    let (nf, ng) = (fo[nn], go[nn]);

    let mut d = DenseMatrix::zeros(n, n);
    let mut u = DenseMatrix::zeros(n, lp[leaves.len()]);
    let mut v = DenseMatrix::zeros(n, lq[leaves.len()]);
    let mut pf = DenseMatrix::zeros(nf, lp[leaves.len()]);
    let mut pg = DenseMatrix::zeros(ng, lq[leaves.len()]);
    for (k, &id) in leaves.iter().enumerate() {
        let s = t.start(id);
        d.set_block(s, s, &h.d[k]);
        u.set_block(s, lp[k], &h.u[k]);
        v.set_block(s, lq[k], &h.v[k]);
        pf.set_block(fo[id], lp[k], &DenseMatrix::identity(h.p(id)));
        pg.set_block(go[id], lq[k], &DenseMatrix::identity(h.q(id)));
    }
    let mut zf = DenseMatrix::zeros(sp[nn], nf);
    let mut r = DenseMatrix::zeros(nf, sp[nn]);
    let mut zg = DenseMatrix::zeros(sq[nn], ng);
    let mut wt = DenseMatrix::zeros(sq[nn], ng);
    let mut zs = DenseMatrix::zeros(ss[nn], ng);
    let mut b = DenseMatrix::zeros(nf, ss[nn]);
    for c in 1..nn {
        let par = PartitionTree::parent(c);
        let sib = PartitionTree::sibling(c);
        zf.set_block(sp[c], fo[par], &DenseMatrix::identity(h.p(par)));
        r.set_block(fo[c], sp[c], &h.r[c]);
        zg.set_block(sq[c], go[par], &DenseMatrix::identity(h.q(par)));
        wt.set_block(sq[c], go[c], &h.w[c].transpose());
        zs.set_block(ss[c], go[sib], &DenseMatrix::identity(h.q(sib)));
        b.set_block(fo[c], ss[c], &h.b[c]);
    }
    let left = dense_inverse(&(&DenseMatrix::identity(nf) - &(&r * &zf)))?;
    let right = dense_inverse(&(&DenseMatrix::identity(ng) - &zg.t_mul(&wt)))?;
    let core = &(&(&left * &b) * &zs) * &right;
    let low = &(&u * &pf.transpose()) * &core;
    Ok(&d + &(&low * &pg).mul_t(&v))
}

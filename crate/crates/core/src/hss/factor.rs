use super::arith::{hss_multiply, hss_recompress};
use super::{HssForm, PartitionTree};
use crate::error::{Error, Result};
use crate::kernel::{dense_inverse, dense_lu_no_pivot, invert_lower, invert_upper, DenseMatrix};

struct LuState<'a> {
    h: &'a HssForm,
    pivot_tol: f64,
    l: HssForm,
    u: HssForm,
}

impl LuState<'_> {
    /// Factors the effective block `A_nn + U_n X V_n^T` of node `id` and
    /// returns `Psi = V_n^T (A_nn + U_n X V_n^T)^{-1} U_n`.
    fn node(&mut self, id: usize, x: &DenseMatrix) -> Result<DenseMatrix> {
        let h = self.h;
        let t = &h.tree;
        if t.is_leaf(id) {
            let i = t.leaf_index(id);
            let dhat = &h.d[i] + &(&h.u[i] * x).mul_t(&h.v[i]);
            let start = t.start(id);
            let (lk, uk) = dense_lu_no_pivot(&dhat, self.pivot_tol).map_err(|e| match e {
                Error::PivotBreakdown { step, pivot } => Error::PivotBreakdown { step: start + step, pivot },
                e => e,
            })?;
            let vl = invert_upper(&uk)?.t_mul(&h.v[i]);
            let uu = &invert_lower(&lk)? * &h.u[i];
            let psi = vl.t_mul(&uu);
            self.l.d[i] = lk;
            self.l.v[i] = vl;
            self.u.d[i] = uk;
            self.u.u[i] = uu;
            return Ok(psi);
        }
        let (c, s) = PartitionTree::children(id);
        let xc = (&h.r[c] * x).mul_t(&h.w[c]);
        let psi_c = self.node(c, &xc)?;
        let b_cs = &h.b[c] + &(&h.r[c] * x).mul_t(&h.w[s]);
        let b_sc = &h.b[s] + &(&h.r[s] * x).mul_t(&h.w[c]);
        let xs = &(&h.r[s] * x).mul_t(&h.w[s]) - &(&(&b_sc * &psi_c) * &b_cs);
        let psi_s = self.node(s, &xs)?;

        let w_s = &h.w[s] - &(&b_cs.t_mul(&psi_c.transpose()) * &h.w[c]);
        let r_s = &h.r[s] - &(&(&b_sc * &psi_c) * &h.r[c]);
        let psi = &(&h.w[c].t_mul(&psi_c) * &h.r[c]) + &(&w_s.t_mul(&psi_s) * &r_s);
        self.l.w[s] = w_s;
        self.l.b[s] = b_sc;
        self.l.b[c] = DenseMatrix::zeros(h.p(c), h.q(s));
        self.u.r[s] = r_s;
        self.u.b[c] = b_cs;
        self.u.b[s] = DenseMatrix::zeros(h.p(s), h.q(c));
        Ok(psi)
    }
}

/// Block LU over the tree without pivoting. Node `n` is factored as
/// `[[A_cc, A_cs], [A_sc, A_ss]]` plus the update `U_n X_n V_n^T` inherited
/// from eliminated indices; the Schur complement of the left child stays of
/// that form with `X_s = R_s X W_s^T - B~_sc Psi_c B~_cs`. `L` keeps the
/// row generators of `A`, `U` keeps the column generators, so neither factor
/// exceeds the ranks of `A`.
pub fn hss_lu(h: &HssForm, pivot_tol: f64) -> Result<(HssForm, HssForm)> {
    let mut st = LuState { h, pivot_tol, l: h.clone(), u: h.clone() };
    st.node(0, &DenseMatrix::zeros(0, 0))?;
    let LuState { l, u, .. } = st;
    Ok((l, u))
}

/// Inverse of a block lower triangular HSS matrix. The upper couplings of
/// `t` are ignored. With `Xi_c = V_c^T T_cc^{-1} U_c`, the inverse has bases
/// `T^{-1} U` and `T^{-T} V`, coupling `-B_sc`, and translations
/// `R_s - B_sc Xi_c R_c`, `W_c - B_sc^T Xi_s^T W_s`.
fn invert_lower_hss(t: &HssForm) -> Result<HssForm> {
    let tree = &t.tree;
    let nn = tree.num_nodes();
    let mut out = t.clone();
    let mut xi = vec![DenseMatrix::zeros(0, 0); nn];
    for id in tree.leaf_ids() {
        let i = tree.leaf_index(id);
        let dinv = dense_inverse(&t.d[i]).map_err(|_| Error::SingularBlock(i))?;
        out.u[i] = &dinv * &t.u[i];
        out.v[i] = dinv.t_mul(&t.v[i]);
        xi[id] = t.v[i].t_mul(&out.u[i]);
        out.d[i] = dinv;
    }
    for id in (0..tree.first_leaf()).rev() {
        let (c, s) = PartitionTree::children(id);
        let r_s = &t.r[s] - &(&(&t.b[s] * &xi[c]) * &t.r[c]);
        out.w[c] = &t.w[c] - &(&t.b[s].t_mul(&xi[s].transpose()) * &t.w[s]);
        out.b[s] = t.b[s].scale(-1.0);
        out.b[c] = DenseMatrix::zeros(t.p(c), t.q(s));
        xi[id] = &(&t.w[c].t_mul(&xi[c]) * &t.r[c]) + &(&t.w[s].t_mul(&xi[s]) * &r_s);
        out.r[s] = r_s;
    }
    Ok(out)
}

/// Inverse of a block triangular HSS matrix; couplings on the other side of
/// the diagonal are ignored.
pub fn hss_invert_triangular(t: &HssForm, lower: bool) -> Result<HssForm> {
    if lower {
        invert_lower_hss(t)
    } else {
        Ok(invert_lower_hss(&t.transpose())?.transpose())
    }
}

/// `A^{-1} = U^{-1} L^{-1}` from the tree LU, recompressed at `1e-12`.
pub fn hss_invert(h: &HssForm) -> Result<HssForm> {
    let (l, u) = hss_lu(h, 1e-14)?;
    let linv = hss_invert_triangular(&l, true)?;
    let uinv = hss_invert_triangular(&u, false)?;
    let inv = hss_multiply(&uinv, &linv)?;
    Ok(hss_recompress(&inv, 1e-12))
}

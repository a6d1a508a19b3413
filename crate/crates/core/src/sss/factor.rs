use super::arith::{sss_multiply, sss_recompress};
use super::{Chain, SssForm};
use crate::error::{Error, Result};
use crate::kernel::{dense_inverse, dense_lu_no_pivot, invert_lower, invert_upper, DenseMatrix};

/// Block LU without pivoting. `Z_k` carries the coupling between the lower
/// and upper generators accumulated over blocks `0..=k`:
///
/// `D^_k = D_k - P_k Z_{k-1} V_k^T = L_k U_k`,
/// `Z_k = R_k Z_{k-1} W_k + (Q_k^T - R_k Z_{k-1} V_k^T) D^_k^{-1} (U_k - P_k Z_{k-1} W_k)`.
///
/// `L` keeps `P`, `R` and gets `Q'_k = U_k^{-T} (Q_k - V_k Z_{k-1}^T R_k^T)`;
/// `U` keeps `V`, `W` and gets `U'_k = L_k^{-1} (U_k - P_k Z_{k-1} W_k)`.
pub fn sss_lu(s: &SssForm, pivot_tol: f64) -> Result<(SssForm, SssForm)> {
    let p = s.num_blocks();
    let off = s.offsets();
    let (up, lo) = (&s.upper, &s.lower);
    let mut z = DenseMatrix::zeros(0, 0);
    let mut l_d = Vec::with_capacity(p);
    let mut u_d = Vec::with_capacity(p);
    let mut l_chain = lo.clone();
    let mut u_chain = up.clone();
    for k in 0..p {
        let pk = &lo.v[k];
        let qk = &lo.u[k];
        let rk = lo.w[k].transpose();
        let (uk, vk, wk) = (&up.u[k], &up.v[k], &up.w[k]);
        let pz = pk * &z;
        let dhat = &s.d[k] - &pz.mul_t(vk);
        let (lk, ukk) = dense_lu_no_pivot(&dhat, pivot_tol).map_err(|e| match e {
            Error::PivotBreakdown { step, pivot } => Error::PivotBreakdown { step: off[k] + step, pivot },
            e => e,
        })?;
        let linv = invert_lower(&lk)?;
        let uinv = invert_upper(&ukk)?;
        let rz = &rk * &z;
        let right = uk - &(&pz * wk);
        let left_t = qk - &vk.mul_t(&rz);
        u_chain.u[k] = &linv * &right;
        l_chain.u[k] = uinv.t_mul(&left_t);
        // Z_k = R Z W + left^T D^{-1} right, with D^{-1} = U^{-1} L^{-1}.
        let coupled = l_chain.u[k].t_mul(&u_chain.u[k]);
        z = &(&rz * wk) + &coupled;
        l_d.push(lk);
        u_d.push(ukk);
    }
    let sizes = s.sizes.clone();
    let l = SssForm::from_parts(sizes.clone(), l_d, Chain::empty(&sizes), l_chain);
    let u = SssForm::from_parts(sizes.clone(), u_d, u_chain, Chain::empty(&sizes));
    Ok((l, u))
}

/// Inverse of an upper triangular SSS matrix:
/// `D' = D^{-1}`, `U' = D^{-1} U`, `V' = -D^{-T} V`, `W' = W - V^T D^{-1} U`.
fn invert_upper_sss(t: &SssForm) -> Result<SssForm> {
    let p = t.num_blocks();
    let mut d = Vec::with_capacity(p);
    let mut chain = t.upper.clone();
    for k in 0..p {
        let dinv = dense_inverse(&t.d[k]).map_err(|_| Error::SingularBlock(k))?;
        let du = &dinv * &t.upper.u[k];
        chain.w[k] = &t.upper.w[k] - &t.upper.v[k].t_mul(&du);
        chain.u[k] = du;
        chain.v[k] = dinv.t_mul(&t.upper.v[k]).scale(-1.0);
        d.push(dinv);
    }
    Ok(SssForm::from_parts(t.sizes.clone(), d, chain, Chain::empty(&t.sizes)))
}

/// Inverse of a block triangular SSS matrix; the other chain of `t` is
/// ignored.
pub fn sss_invert_triangular(t: &SssForm, lower: bool) -> Result<SssForm> {
    if lower {
        Ok(invert_upper_sss(&t.transpose())?.transpose())
    } else {
        invert_upper_sss(t)
    }
}

/// `A^{-1} = U^{-1} L^{-1}` from the block LU, recompressed at `1e-12`.
pub fn sss_invert(s: &SssForm) -> Result<SssForm> {
    let (l, u) = sss_lu(s, 1e-14)?;
    let linv = sss_invert_triangular(&l, true)?;
    let uinv = sss_invert_triangular(&u, false)?;
    let inv = sss_multiply(&uinv, &linv)?;
    Ok(sss_recompress(&inv, 1e-12))
}

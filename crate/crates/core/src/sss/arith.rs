use super::{sss_matvec, sss_matvec_t, Chain, SssForm};
use crate::error::{Error, Result};
use crate::kernel::{orthonormal_factor, truncated_svd, DenseMatrix, Threshold};

/// Rank truncation of a chain in two sweeps.
///
/// The forward sweep makes the row bases `[U_0 W_1 ...; ...; U_k]`
/// orthonormal by QR of `[S W_k; U_k]`, pushing `S` into `V_{k+1}`. The
/// backward sweep then truncates `[V_{k+1}; W_{k+1}^T]`, whose singular
/// values are those of the `k`-th Hankel block, and pushes the coefficient
/// factor into `W_k` and `U_k`.
pub fn recompress_chain(chain: &Chain, th: Threshold) -> Chain {
    let mut c = chain.clone();
    let p = c.u.len();
    if p < 2 {
        return c;
    }
    let mut s = DenseMatrix::zeros(0, 0);
    for k in 0..p - 1 {
        let top = &s * &c.w[k];
        let x = top.vstack(&c.u[k]);
        let (q, r) = orthonormal_factor(&x);
        c.w[k] = q.submatrix(0, top.rows(), 0, q.cols());
        c.u[k] = q.submatrix(top.rows(), x.rows(), 0, q.cols());
        c.v[k + 1] = c.v[k + 1].mul_t(&r);
        s = r;
    }
    c.w[p - 1] = &s * &c.w[p - 1];
    for k in (0..p - 1).rev() {
        let nv = c.v[k + 1].rows();
        let y = c.v[k + 1].vstack(&c.w[k + 1].transpose());
        let svd = truncated_svd(&y, th);
        let r = svd.rank();
        c.v[k + 1] = svd.u.submatrix(0, nv, 0, r);
        c.w[k + 1] = svd.u.submatrix(nv, y.rows(), 0, r).transpose();
        let coef = svd.v.submatrix(0, svd.v.rows(), 0, r);
        let coef = DenseMatrix::from_fn(coef.rows(), r, |i, j| coef[(i, j)] * svd.s[j]);
        c.w[k] = &c.w[k] * &coef;
        c.u[k] = &c.u[k] * &coef;
    }
    c
}

/// Lower bound on `||A||_2` from a few power iterations on `A^T A`.
pub fn sss_norm_estimate(s: &SssForm) -> f64 {
    let n = s.size();
    if n == 0 {
        return 0.0;
    }
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.618_033_988_75).fract()).collect();
    let mut est = 0.0;
    for _ in 0..8 {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let y = sss_matvec(s, &x).expect("sizes agree");
        est = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = sss_matvec_t(s, &y).expect("sizes agree");
    }
    est
}

fn chain_threshold(tol: f64, scale: f64) -> Threshold {
    Threshold { rel: tol, abs: (1e-3 * tol).max(64.0 * f64::EPSILON) * scale }
}

/// Truncates both chains at relative tolerance `tol`; contributions below
/// `tol * ||A||` in absolute size are dropped as well.
pub fn sss_recompress(s: &SssForm, tol: f64) -> SssForm {
    recompress_with_scale(s, tol, sss_norm_estimate(s))
}

fn recompress_with_scale(s: &SssForm, tol: f64, scale: f64) -> SssForm {
    let th = chain_threshold(tol, scale);
    SssForm::from_parts(
        s.sizes.clone(),
        s.d.clone(),
        recompress_chain(&s.upper, th),
        recompress_chain(&s.lower, th),
    )
}

fn same_partition(a: &SssForm, b: &SssForm) -> Result<()> {
    if a.sizes != b.sizes {
        return Err(Error::PartitionMismatch(format!("{:?} vs {:?}", a.sizes, b.sizes)));
    }
    Ok(())
}

fn concat_chains(a: &Chain, b: &Chain) -> Chain {
    Chain {
        u: a.u.iter().zip(&b.u).map(|(x, y)| x.hstack(y)).collect(),
        v: a.v.iter().zip(&b.v).map(|(x, y)| x.hstack(y)).collect(),
        w: a.w.iter().zip(&b.w).map(|(x, y)| x.block_diag(y)).collect(),
    }
}

/// `A + B` before recompression: ranks add.
pub fn sss_add_uncompressed(a: &SssForm, b: &SssForm) -> Result<SssForm> {
    same_partition(a, b)?;
    Ok(SssForm::from_parts(
        a.sizes.clone(),
        a.d.iter().zip(&b.d).map(|(x, y)| x + y).collect(),
        concat_chains(&a.upper, &b.upper),
        concat_chains(&a.lower, &b.lower),
    ))
}

/// `A + B`, recompressed at `1e-12`.
pub fn sss_add(a: &SssForm, b: &SssForm) -> Result<SssForm> {
    let sum = sss_add_uncompressed(a, b)?;
    let scale = sss_norm_estimate(a) + sss_norm_estimate(b);
    Ok(recompress_with_scale(&sum, 1e-12, scale))
}

/// Upper chain and diagonal blocks of `A B` in one forward and one backward
/// sweep. `M_k` collects the coupling of `A`'s lower generators with `B`'s
/// upper ones through block `k`; `Omega_k` that of `B`'s lower generators
/// with `A`'s upper ones beyond block `k`.
fn upper_product(a: &SssForm, b: &SssForm) -> (Chain, Vec<DenseMatrix>) {
    let p = a.sizes.len();
    let (au, al, bu, bl) = (&a.upper, &a.lower, &b.upper, &b.lower);
    // Lower generators in conventional orientation.
    let pa = |k: usize| &al.v[k];
    let qa = |k: usize| &al.u[k];
    let ra = |k: usize| al.w[k].transpose();
    let pb = |k: usize| &bl.v[k];
    let qb = |k: usize| &bl.u[k];
    let rb = |k: usize| bl.w[k].transpose();

    // m[k] holds M_{k-1}.
    let mut m = vec![DenseMatrix::zeros(0, 0); p + 1];
    for k in 0..p {
        let prev = &m[k];
        let mut next = &(&ra(k) * prev) * &bu.w[k];
        next = &next + &qa(k).t_mul(&bu.u[k]);
        m[k + 1] = next;
    }
    // omega[k] holds Omega_k.
    let mut omega = vec![DenseMatrix::zeros(0, 0); p];
    for k in (0..p.saturating_sub(1)).rev() {
        let o = pb(k + 1).t_mul(&au.v[k + 1]);
        let t = &(&rb(k + 1).transpose() * &omega[k + 1]) * &au.w[k + 1].transpose();
        omega[k] = &o + &t;
    }
    let mut chain = Chain::empty(&a.sizes);
    let mut d = Vec::with_capacity(p);
    for k in 0..p {
        let (da, db) = (&a.d[k], &b.d[k]);
        let pm = pa(k) * &m[k];
        let ub = &(da * &bu.u[k]) + &(&pm * &bu.w[k]);
        chain.u[k] = au.u[k].hstack(&ub);
        let top = au.w[k].hstack(&au.v[k].t_mul(&bu.u[k]));
        let bottom = DenseMatrix::zeros(bu.w[k].rows(), au.w[k].cols()).hstack(&bu.w[k]);
        chain.w[k] = top.vstack(&bottom);
        let qo = &(qb(k) * &omega[k]) * &au.w[k].transpose();
        let va = &db.t_mul(&au.v[k]) + &qo;
        chain.v[k] = va.hstack(&bu.v[k]);
        let mut dk = da * db;
        dk = &dk + &pm.mul_t(&bu.v[k]);
        dk = &dk + &(&au.u[k] * &omega[k].transpose()).mul_t(qb(k));
        d.push(dk);
    }
    (chain, d)
}

/// `A B` before recompression: boundary ranks are the sums of the operands'.
pub fn sss_multiply_uncompressed(a: &SssForm, b: &SssForm) -> Result<SssForm> {
    same_partition(a, b)?;
    let (upper, d) = upper_product(a, b);
    let (lower, _) = upper_product(&b.transpose(), &a.transpose());
    Ok(SssForm::from_parts(a.sizes.clone(), d, upper, lower))
}

/// `A B`, recompressed at `1e-12`.
pub fn sss_multiply(a: &SssForm, b: &SssForm) -> Result<SssForm> {
    let prod = sss_multiply_uncompressed(a, b)?;
    let scale = sss_norm_estimate(a) * sss_norm_estimate(b);
    Ok(recompress_with_scale(&prod, 1e-12, scale))
}

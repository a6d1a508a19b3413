use super::SssForm;
use crate::blocksparse::{BlockSparse, EliminationStats};
use crate::error::{Error, Result};
use crate::kernel::DenseMatrix;

/// The sparse system in the unknowns `(g_i, h_i, x_i)`:
///
/// `g_i - W_i g_{i+1} - V_i^T x_i = 0`,
/// `h_i - R_i h_{i-1} - Q_i^T x_i = 0`,
/// `D_i x_i + U_i g_{i+1} + P_i h_{i-1} = b_i`.
///
/// Each block index forms one group ordered `(g_i, h_i, x_i)`, which makes
/// the system block tridiagonal.
#[derive(Debug, Clone)]
pub struct SssEmbedding {
    pub system: BlockSparse,
    /// `(|g_i|, |h_i|, |x_i|)` per group.
    pub layout: Vec<(usize, usize, usize)>,
}

impl SssEmbedding {
    /// Global indices of the `x` unknowns and of the auxiliary `g`, `h`
    /// unknowns in [`BlockSparse::to_dense`] numbering.
    pub fn index_sets(&self) -> (Vec<usize>, Vec<usize>) {
        let mut xs = Vec::new();
        let mut aux = Vec::new();
        let mut at = 0;
        for &(g, h, x) in &self.layout {
            aux.extend(at..at + g + h);
            xs.extend(at + g + h..at + g + h + x);
            at += g + h + x;
        }
        (xs, aux)
    }
}

pub fn sss_embedding(s: &SssForm) -> SssEmbedding {
    let p = s.num_blocks();
    let layout: Vec<(usize, usize, usize)> =
        (0..p).map(|i| (s.v(i).cols(), s.q(i).cols(), s.block_sizes()[i])).collect();
    let sizes: Vec<usize> = layout.iter().map(|&(g, h, x)| g + h + x).collect();
    let mut m = BlockSparse::new(sizes.clone());
    for i in 0..p {
        let (g, h, _) = layout[i];
        let mut diag = DenseMatrix::zeros(sizes[i], sizes[i]);
        diag.set_block(0, 0, &DenseMatrix::identity(g + h));
        diag.set_block(0, g + h, &s.v(i).transpose().scale(-1.0));
        diag.set_block(g, g + h, &s.q(i).transpose().scale(-1.0));
        diag.set_block(g + h, g + h, s.d(i));
        m.add(i, i, &diag);
        if i + 1 < p {
            // Couplings to g_{i+1}.
            let gn = layout[i + 1].0;
            let mut blk = DenseMatrix::zeros(sizes[i], sizes[i + 1]);
            blk.set_block(0, 0, &s.w(i).scale(-1.0));
            blk.set_block(g + h, 0, s.u(i));
            debug_assert_eq!(s.u(i).cols(), gn);
            m.add(i, i + 1, &blk);
        }
        if i > 0 {
            // Couplings to h_{i-1}.
            let gp = layout[i - 1].0;
            let mut blk = DenseMatrix::zeros(sizes[i], sizes[i - 1]);
            blk.set_block(g, gp, &s.r(i).scale(-1.0));
            blk.set_block(g + h, gp, s.p(i));
            m.add(i, i - 1, &blk);
        }
    }
    SssEmbedding { system: m, layout }
}

/// Solves `A x = b` by eliminating the embedding in block order, which
/// creates no fill-in.
pub fn sss_solve(s: &SssForm, b: &[f64], pivot_tol: f64) -> Result<Vec<f64>> {
    Ok(sss_solve_with_stats(s, b, pivot_tol)?.0)
}

/// [`sss_solve`] together with the elimination statistics.
pub fn sss_solve_with_stats(s: &SssForm, b: &[f64], pivot_tol: f64) -> Result<(Vec<f64>, EliminationStats)> {
    if b.len() != s.size() {
        return Err(Error::DimensionMismatch(format!("size {}, vector {}", s.size(), b.len())));
    }
    let emb = sss_embedding(s);
    let bb = s.split(b);
    let rhs: Vec<Vec<f64>> = emb
        .layout
        .iter()
        .zip(&bb)
        .map(|(&(g, h, _), bi)| {
            let mut r = vec![0.0; g + h];
            r.extend_from_slice(bi);
            r
        })
        .collect();
    let order: Vec<usize> = (0..s.num_blocks()).collect();
    let (sol, stats) = emb.system.solve(&order, &rhs, pivot_tol)?;
    debug_assert_eq!(stats.fill_in_blocks, 0);
    let x = sol
        .iter()
        .zip(&emb.layout)
        .flat_map(|(v, &(g, h, _))| v[g + h..].to_vec())
        .collect();
    Ok((x, stats))
}

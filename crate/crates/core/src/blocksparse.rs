//! Block-sparse Gaussian elimination in a caller-chosen order, with
//! structural fill-in accounting.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::kernel::{matmul, DenseMatrix, PivotedLu};

/// Square block matrix over unknown groups of the given sizes.
#[derive(Debug, Clone)]
pub struct BlockSparse {
    sizes: Vec<usize>,
    rows: Vec<BTreeMap<usize, DenseMatrix>>,
}

/// Outcome of an elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EliminationStats {
    /// Blocks created during elimination that were absent from the input.
    pub fill_in_blocks: usize,
    /// Scalar entries in those blocks.
    pub fill_in_entries: usize,
}

impl BlockSparse {
    pub fn new(sizes: Vec<usize>) -> Self {
        let rows = vec![BTreeMap::new(); sizes.len()];
        Self { sizes, rows }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn groups(&self) -> usize {
        self.sizes.len()
    }

    /// Adds `m` into block `(i, j)`, creating it if needed.
    pub fn add(&mut self, i: usize, j: usize, m: &DenseMatrix) {
        debug_assert_eq!(m.shape(), (self.sizes[i], self.sizes[j]));
        match self.rows[i].get_mut(&j) {
            Some(b) => *b = &*b + m,
            None => {
                self.rows[i].insert(j, m.clone());
            }
        }
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&DenseMatrix> {
        self.rows[i].get(&j)
    }

    /// Number of stored blocks.
    pub fn nnz_blocks(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.sizes.len() + 1);
        let mut acc = 0;
        off.push(0);
        for &s in &self.sizes {
            acc += s;
            off.push(acc);
        }
        off
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let off = self.offsets();
        let n = off[self.sizes.len()];
        let mut out = DenseMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, b) in row {
                out.set_block(off[i], off[j], b);
            }
        }
        out
    }

    /// Solves `M x = rhs` (one vector per group) eliminating groups in
    /// `order`, which must be a permutation of all groups. Each pivot block
    /// is factored with partial pivoting inside the block.
    pub fn solve(
        &self,
        order: &[usize],
        rhs: &[Vec<f64>],
        pivot_tol: f64,
    ) -> Result<(Vec<Vec<f64>>, EliminationStats)> {
        let g = self.groups();
        if order.len() != g || rhs.len() != g {
            return Err(Error::DimensionMismatch(format!(
                "{g} groups, order {}, rhs {}",
                order.len(),
                rhs.len()
            )));
        }
        let mut rows = self.rows.clone();
        let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g];
        for (i, row) in rows.iter().enumerate() {
            for &j in row.keys() {
                cols[j].insert(i);
            }
        }
        let mut b: Vec<Vec<f64>> = rhs.to_vec();
        let mut done = vec![false; g];
        let mut stats = EliminationStats::default();
        let mut factors: Vec<Option<PivotedLu>> = vec![None; g];
        let mut step = 0usize;
        for &k in order {
            if done[k] {
                return Err(Error::DimensionMismatch(format!("group {k} repeated in order")));
            }
            done[k] = true;
            let nk = self.sizes[k];
            if nk == 0 {
                continue;
            }
            let akk = rows[k].get(&k).cloned().unwrap_or_else(|| DenseMatrix::zeros(nk, nk));
            let lu = PivotedLu::factor(&akk, pivot_tol).map_err(|e| match e {
                Error::PivotBreakdown { step: s, pivot } => Error::PivotBreakdown { step: step + s, pivot },
                e => e,
            })?;
            step += nk;
            // Row k scaled: A_kk^{-1} [A_kj | b_k] for every live j.
            let live_cols: Vec<usize> = rows[k].keys().copied().filter(|&j| !done[j]).collect();
            let mut scaled: Vec<(usize, DenseMatrix)> = Vec::with_capacity(live_cols.len());
            for &j in &live_cols {
                scaled.push((j, lu.solve_mat(&rows[k][&j])));
            }
            let bk = lu.solve(&b[k]);
            let live_rows: Vec<usize> = cols[k].iter().copied().filter(|&i| !done[i]).collect();
            for &i in &live_rows {
                let aik = rows[i].remove(&k).expect("column index in sync");
                for (j, skj) in &scaled {
                    let upd = matmul(&aik, skj)?;
                    match rows[i].get_mut(j) {
                        Some(blk) => *blk = &*blk - &upd,
                        None => {
                            if upd.rows() > 0 && upd.cols() > 0 {
                                stats.fill_in_blocks += 1;
                                stats.fill_in_entries += upd.rows() * upd.cols();
                            }
                            rows[i].insert(*j, upd.scale(-1.0));
                            cols[*j].insert(i);
                        }
                    }
                }
                let d = aik.matvec(&bk);
                for (bi, di) in b[i].iter_mut().zip(&d) {
                    *bi -= di;
                }
            }
            factors[k] = Some(lu);
        }
        // Back substitution in reverse order.
        let mut x: Vec<Vec<f64>> = self.sizes.iter().map(|&s| vec![0.0; s]).collect();
        let mut solved = vec![false; g];
        for &k in order.iter().rev() {
            solved[k] = true;
            let Some(lu) = &factors[k] else { continue };
            let mut r = b[k].clone();
            for (&j, akj) in &rows[k] {
                if j != k && solved[j] && self.sizes[j] > 0 {
                    let d = akj.matvec(&x[j]);
                    for (ri, di) in r.iter_mut().zip(&d) {
                        *ri -= di;
                    }
                }
            }
            x[k] = lu.solve(&r);
        }
        Ok((x, stats))
    }
}

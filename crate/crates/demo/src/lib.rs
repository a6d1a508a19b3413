//! WebAssembly entry points for the browser demo. Each one returns a short
//! plain-text report; the page shows it verbatim.

use std::fmt::Write;

use structmat::displacement::{displacement_rank, generalized_schur_lu, generators_toeplitz, DisplacementOp};
use structmat::hss::{hss_construct, hss_matvec, hss_to_dense, separated_kernel, PartitionTree};
use structmat::kernel::{solve_unit_lower, solve_upper, toeplitz_dense, toeplitz_matvec, DenseMatrix};
use structmat::ops;
use structmat::random::{random_vector, Rng64};
use structmat::sss::{sss_from_banded, sss_matvec, sss_solve_with_stats};
use structmat::{Error, Result};
use wasm_bindgen::prelude::*;

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

fn in_range(name: &str, v: usize, lo: usize, hi: usize) -> Result<()> {
    if (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!("{name} = {v} must lie in {lo}..={hi}")))
    }
}

/// Solves a random diagonally dominant Toeplitz system through the
/// generalized Schur LU and compares the work with dense elimination.
pub fn toeplitz_report(n: usize, seed: u32) -> Result<String> {
    in_range("n", n, 2, 2048)?;
    let mut rng = Rng64::new(seed.into());
    let mut col: Vec<f64> = (0..n).map(|k| rng.uniform(-1.0, 1.0) / (1 + k) as f64).collect();
    let mut row: Vec<f64> = (0..n).map(|k| rng.uniform(-1.0, 1.0) / (1 + k) as f64).collect();
    col[0] = 2.0 + (1..n).map(|k| 2.0 / (1 + k) as f64).sum::<f64>();
    row[0] = col[0];
    let g = generators_toeplitz(&col, &row)?;
    let b = random_vector(n, seed.into());
    let (lu, count) = ops::measure(|| generalized_schur_lu(&g, 1e-12));
    let lu = lu?;
    let x = solve_upper(&lu.u, &solve_unit_lower(&lu.l, &b))?;
    let res = rel(&toeplitz_matvec(&col, &row, &x)?, &b);
    let dense_ops = (n * n * n) as f64 / 3.0;

    let mut out = String::new();
    writeln!(out, "n: {n}").ok();
    writeln!(out, "generator width: {}", g.rank()).ok();
    if n <= 512 {
        let z = DisplacementOp::shift(n);
        let r = displacement_rank(&toeplitz_dense(&col, &row), &z, &z, 1e-10)?;
        writeln!(out, "measured displacement rank: {r}").ok();
    }
    writeln!(out, "Schur LU operations: {count}").ok();
    writeln!(out, "dense LU operations (n^3/3): {dense_ops:.0}").ok();
    writeln!(out, "speed-up: {:.1}x", dense_ops / count as f64).ok();
    writeln!(out, "relative residual: {res:.2e}").ok();
    Ok(out)
}

/// Compresses the smooth kernel `1 / (x_i - y_j)` into HSS form and reports
/// ranks per level, storage and the matvec error.
pub fn hss_report(n: usize, leaf: usize, tol: f64) -> Result<String> {
    in_range("n", n, 2, 1024)?;
    in_range("leaf", leaf, 1, n)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::DimensionMismatch(format!("tolerance {tol} must lie in (0, 1)")));
    }
    let a = separated_kernel(n);
    let tree = PartitionTree::build(n, leaf)?;
    let h = hss_construct(&a, &tree, tol)?;
    let x = random_vector(n, 1);
    let (y, count) = ops::measure(|| hss_matvec(&h, &x));
    let err = rel(&y?, &a.matvec(&x));
    let stored: usize = tree
        .leaf_ids()
        .map(|id| {
            let i = tree.leaf_index(id);
            h.d(i).data().len() + h.u(i).data().len() + h.v(i).data().len()
        })
        .sum::<usize>()
        + (1..tree.num_nodes()).map(|id| h.r(id).data().len() + h.w(id).data().len() + h.b(id).data().len()).sum::<usize>();

    let mut out = String::new();
    writeln!(out, "n: {n}, leaves: {}, depth: {}", tree.num_leaves(), tree.depth()).ok();
    let ranks = h.row_ranks();
    for k in 1..=tree.depth() {
        let level = (PartitionTree::id(k, 0)..PartitionTree::id(k + 1, 0)).map(|id| ranks[id]);
        writeln!(out, "level {k} max rank: {}", level.max().unwrap_or(0)).ok();
    }
    writeln!(out, "stored numbers: {stored} (dense {})", n * n).ok();
    writeln!(out, "matvec operations: {count} (dense {})", n * n).ok();
    writeln!(out, "matvec relative error: {err:.2e}").ok();
    writeln!(out, "reconstruction error: {:.2e}", hss_to_dense(&h).rel_diff(&a)).ok();
    Ok(out)
}

/// Solves a random banded system through its SSS form and reports fill-in
/// and work per unknown.
pub fn sss_report(n: usize, bandwidth: usize, seed: u32) -> Result<String> {
    in_range("n", n, 2, 8192)?;
    in_range("bandwidth", bandwidth, 0, 8)?;
    let mut rng = Rng64::new(seed.into());
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i.saturating_sub(bandwidth)..(i + bandwidth + 1).min(n) {
            a[(i, j)] = rng.uniform(-1.0, 1.0);
        }
        a[(i, i)] = 2.0 * bandwidth as f64 + 1.0;
    }
    let s = sss_from_banded(&a, bandwidth)?;
    let b = random_vector(n, seed.into());
    let (solved, count) = ops::measure(|| sss_solve_with_stats(&s, &b, 1e-14));
    let (x, stats) = solved?;
    let res = rel(&sss_matvec(&s, &x)?, &b);

    let mut out = String::new();
    writeln!(out, "n: {n}, blocks: {}, max chain rank: {}", s.num_blocks(), s.max_rank()).ok();
    writeln!(out, "solve operations: {count} ({:.1} per unknown)", count as f64 / n as f64).ok();
    writeln!(out, "fill-in blocks: {}", stats.fill_in_blocks).ok();
    writeln!(out, "relative residual: {res:.2e}").ok();
    Ok(out)
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn toeplitz_solve(n: usize, seed: u32) -> std::result::Result<String, JsError> {
    js(toeplitz_report(n, seed))
}

#[wasm_bindgen]
pub fn hss_compress(n: usize, leaf: usize, tol: f64) -> std::result::Result<String, JsError> {
    js(hss_report(n, leaf, tol))
}

#[wasm_bindgen]
pub fn sss_solve_banded(n: usize, bandwidth: usize, seed: u32) -> std::result::Result<String, JsError> {
    js(sss_report(n, bandwidth, seed))
}

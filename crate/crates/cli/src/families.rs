//! Seeded test-matrix families shared by the commands and the test suites.

use structmat::kernel::DenseMatrix;
use structmat::random::Rng64;

/// First column and row of a random Toeplitz matrix with entries decaying
/// like `1 / (1 + k)^2` and a diagonal that dominates every row.
pub fn toeplitz_data(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = Rng64::new(seed);
    let mut col: Vec<f64> = (0..n).map(|k| rng.uniform(-1.0, 1.0) / ((1 + k) as f64).powi(2)).collect();
    let mut row: Vec<f64> = (0..n).map(|k| rng.uniform(-1.0, 1.0) / ((1 + k) as f64).powi(2)).collect();
    let off: f64 = col[1..].iter().chain(&row[1..]).map(|v| v.abs()).sum();
    col[0] = 1.0 + off;
    row[0] = col[0];
    (col, row)
}

/// Symmetric positive definite Toeplitz symbol `t_k = 1 / (1 + k^2)`.
pub fn spd_toeplitz(n: usize) -> Vec<f64> {
    (0..n).map(|k| 1.0 / (1.0 + (k * k) as f64)).collect()
}

/// Cauchy nodes `x_j = j + e_j` and `y_i = x_i + shift`, with `|e_j| <= 0.2`.
/// A shift of zero makes every pole collide.
pub fn cauchy_nodes(n: usize, seed: u64, shift: f64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = Rng64::new(seed);
    let x: Vec<f64> = (0..n).map(|j| j as f64 + rng.uniform(-0.2, 0.2)).collect();
    let y = x.iter().map(|v| v + shift).collect();
    (x, y)
}

/// Vandermonde nodes, uniform in `(-0.9, 0.9)`.
pub fn vandermonde_nodes(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng64::new(seed);
    (0..n).map(|_| rng.uniform(-0.9, 0.9)).collect()
}

/// Random banded matrix with the given bandwidth and a dominant diagonal.
pub fn banded(n: usize, bandwidth: usize, seed: u64) -> DenseMatrix {
    let mut rng = Rng64::new(seed);
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i.saturating_sub(bandwidth)..(i + bandwidth + 1).min(n) {
            a[(i, j)] = rng.uniform(-1.0, 1.0);
        }
        a[(i, i)] = 2.0 * bandwidth as f64 + 1.0;
    }
    a
}

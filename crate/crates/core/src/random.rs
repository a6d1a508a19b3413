//! Seeded random test data.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernel::DenseMatrix;

/// Deterministic generator used by tests, benches and the command line.
pub struct Rng64(ChaCha8Rng);

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Rng64(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..hi)
    }

    /// Standard normal (Box-Muller).
    pub fn normal(&mut self) -> f64 {
        let u1: f64 = 1.0 - self.0.gen::<f64>();
        let u2: f64 = self.0.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| self.normal())
    }
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    Rng64::new(seed).vector(n)
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    Rng64::new(seed).matrix(rows, cols)
}

/// Random matrix whose diagonal dominates each row by a factor of two, so
/// every leading principal minor is nonsingular.
pub fn diagonally_dominant(n: usize, seed: u64) -> DenseMatrix {
    let mut a = random_matrix(n, n, seed);
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
        a[(i, i)] = 2.0 * off + 1.0;
    }
    a
}

/// Random SSS matrix with every boundary rank equal to `rank` (on both
/// sides). Translation factors are scaled so chain products decay, and
/// `diag_shift * I` is added to the diagonal.
pub fn random_sss(sizes: &[usize], rank: usize, diag_shift: f64, seed: u64) -> crate::sss::SssForm {
    use crate::sss::{Chain, SssForm};
    let mut rng = Rng64::new(seed);
    let p = sizes.len();
    let r = |k: isize| if k < 0 || k as usize + 1 >= p { 0 } else { rank };
    let chain = |rng: &mut Rng64| {
        let mut u = Vec::with_capacity(p);
        let mut v = Vec::with_capacity(p);
        let mut w = Vec::with_capacity(p);
        for (i, &n) in sizes.iter().enumerate() {
            let s = 1.0 / (n.max(1) as f64).sqrt();
            u.push(rng.matrix(n, r(i as isize)).scale(s));
            v.push(rng.matrix(n, r(i as isize - 1)).scale(s));
            w.push(rng.matrix(r(i as isize - 1), r(i as isize)).scale(0.5 / (rank.max(1) as f64).sqrt()));
        }
        Chain::new(u, v, w, sizes).expect("consistent shapes")
    };
    let upper = chain(&mut rng);
    let lower = chain(&mut rng);
    let d = sizes
        .iter()
        .map(|&n| {
            let mut m = rng.matrix(n, n).scale(1.0 / (n.max(1) as f64).sqrt());
            for k in 0..n {
                m[(k, k)] += diag_shift;
            }
            m
        })
        .collect();
    SssForm::new(sizes.to_vec(), d, upper, lower).expect("consistent shapes")
}

/// Random HSS matrix with every row and column rank equal to `rank` below
/// the root and `diag_shift * I` added to the leaf diagonals.
pub fn random_hss(
    tree: &crate::hss::PartitionTree,
    rank: usize,
    diag_shift: f64,
    seed: u64,
) -> crate::hss::HssForm {
    use crate::hss::HssForm;
    let mut rng = Rng64::new(seed);
    let nn = tree.num_nodes();
    let rk = |id: usize| if id == 0 { 0 } else { rank };
    let ts = 0.7 / (rank.max(1) as f64).sqrt();
    let leaf = |rng: &mut Rng64, n: usize| rng.matrix(n, rk(nn - 1)).scale(1.0 / (n.max(1) as f64).sqrt());
    let u: Vec<_> = tree.leaf_sizes().iter().map(|&n| leaf(&mut rng, n)).collect();
    let v: Vec<_> = tree.leaf_sizes().iter().map(|&n| leaf(&mut rng, n)).collect();
    let trans = |rng: &mut Rng64| {
        (0..nn)
            .map(|c| if c == 0 { DenseMatrix::zeros(0, 0) } else { rng.matrix(rk(c), rk((c - 1) / 2)).scale(ts) })
            .collect::<Vec<_>>()
    };
    let r = trans(&mut rng);
    let w = trans(&mut rng);
    let b = (0..nn)
        .map(|c| {
            let k = rk(c);
            rng.matrix(k, k).scale(1.0 / (k.max(1) as f64).sqrt())
        })
        .collect();
    let d = tree
        .leaf_sizes()
        .iter()
        .map(|&n| {
            let mut m = rng.matrix(n, n).scale(1.0 / (n.max(1) as f64).sqrt());
            for k in 0..n {
                m[(k, k)] += diag_shift;
            }
            m
        })
        .collect();
    HssForm::new(tree.clone(), d, u, v, r, w, b).expect("consistent shapes")
}

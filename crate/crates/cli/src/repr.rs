//! A matrix in one of the four supported representations.

use std::fmt;

use structmat::displacement::{
    generalized_schur_lu, generator_matvec, reconstruct, DisplacementOp, GeneratorForm, DEFAULT_PIVOT_TOL,
};
use structmat::hss::{hss_construct, hss_matvec, hss_sparse_solve, hss_to_dense, HssForm, PartitionTree};
use structmat::io;
use structmat::kernel::{dense_lu_no_pivot, solve_unit_lower, solve_upper, truncated_factorization, DenseMatrix};
use structmat::sss::{sss_construct, sss_matvec, sss_solve, sss_to_dense, uniform_blocks, SssForm};
use structmat::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Generator,
    Sss,
    Hss,
    Dense,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Format::Generator => "generator",
            Format::Sss => "sss",
            Format::Hss => "hss",
            Format::Dense => "dense",
        };
        f.write_str(s)
    }
}

/// Block size for SSS (`0` picks `ceil(n / 16)`) and leaf size for HSS.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub block: usize,
    pub leaf: usize,
}

impl Layout {
    pub fn block_sizes(&self, n: usize) -> Vec<usize> {
        let block = if self.block == 0 { n.div_ceil(16).max(1) } else { self.block };
        uniform_blocks(n, block)
    }

    pub fn tree(&self, n: usize) -> Result<PartitionTree> {
        PartitionTree::build(n, self.leaf)
    }
}

#[derive(Debug, Clone)]
pub enum Structured {
    Dense(DenseMatrix),
    Generator(GeneratorForm),
    Sss(SssForm),
    Hss(HssForm),
}

impl Structured {
    pub fn format(&self) -> Format {
        match self {
            Structured::Dense(_) => Format::Dense,
            Structured::Generator(_) => Format::Generator,
            Structured::Sss(_) => Format::Sss,
            Structured::Hss(_) => Format::Hss,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Structured::Dense(a) => a.rows(),
            Structured::Generator(g) => g.size(),
            Structured::Sss(s) => s.size(),
            Structured::Hss(h) => h.size(),
        }
    }

    pub fn parse(format: Format, text: &str) -> Result<Self> {
        Ok(match format {
            Format::Dense => {
                let a = io::parse_matrix(text)?;
                if !a.is_square() {
                    return Err(Error::Parse(format!("expected a square matrix, got {}x{}", a.rows(), a.cols())));
                }
                Structured::Dense(a)
            }
            Format::Generator => Structured::Generator(io::parse_generator(text)?),
            Format::Sss => Structured::Sss(io::parse_sss(text)?),
            Format::Hss => Structured::Hss(io::parse_hss(text)?),
        })
    }

    pub fn write(&self) -> String {
        match self {
            Structured::Dense(a) => io::write_matrix(a),
            Structured::Generator(g) => io::write_generator(g),
            Structured::Sss(s) => io::write_sss(s),
            Structured::Hss(h) => io::write_hss(h),
        }
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        Ok(match self {
            Structured::Dense(a) => a.clone(),
            Structured::Generator(g) => reconstruct(g)?,
            Structured::Sss(s) => sss_to_dense(s),
            Structured::Hss(h) => hss_to_dense(h),
        })
    }

    /// Fast product with the representation's own algorithm.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Structured::Dense(a) => {
                if x.len() != a.cols() {
                    return Err(Error::DimensionMismatch(format!("vector {} for n = {}", x.len(), a.cols())));
                }
                Ok(a.matvec(x))
            }
            Structured::Generator(g) => generator_matvec(g, x),
            Structured::Sss(s) => sss_matvec(s, x),
            Structured::Hss(h) => hss_matvec(h, x),
        }
    }

    /// Solves `A x = b` without pivoting across the structure.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.size() {
            return Err(Error::DimensionMismatch(format!("vector {} for n = {}", b.len(), self.size())));
        }
        match self {
            Structured::Dense(a) => {
                let (l, u) = dense_lu_no_pivot(a, 1e-14)?;
                solve_upper(&u, &solve_unit_lower(&l, b))
            }
            Structured::Generator(g) => {
                let lu = generalized_schur_lu(g, DEFAULT_PIVOT_TOL)?;
                solve_upper(&lu.u, &solve_unit_lower(&lu.l, b))
            }
            Structured::Sss(s) => sss_solve(s, b, 1e-14),
            Structured::Hss(h) => hss_sparse_solve(h, b, 1e-14),
        }
    }

    /// One-line summary of the representation's ranks.
    pub fn rank_summary(&self) -> (usize, String) {
        let join = |v: &[usize]| v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Structured::Dense(a) => (a.rows(), "dense".into()),
            Structured::Generator(g) => (g.rank(), format!("displacement rank {}", g.rank())),
            Structured::Sss(s) => {
                (s.max_rank(), format!("upper [{}] lower [{}]", join(&s.upper_ranks()), join(&s.lower_ranks())))
            }
            Structured::Hss(h) => {
                let (p, q) = (h.row_ranks(), h.col_ranks());
                (h.max_rank(), format!("row [{}] col [{}]", join(&p[1..]), join(&q[1..])))
            }
        }
    }
}

/// Compresses a dense matrix into `format`. Generators use the down-shift
/// pair, which suits Toeplitz-like input.
pub fn compress(a: &DenseMatrix, format: Format, tol: f64, layout: Layout) -> Result<Structured> {
    let n = a.rows();
    Ok(match format {
        Format::Dense => Structured::Dense(a.clone()),
        Format::Generator => {
            let z = DisplacementOp::shift(n);
            let d = structmat::displacement::apply_displacement(a, &z, &z)?;
            let f = truncated_factorization(&d, tol);
            Structured::Generator(GeneratorForm::new(z.clone(), z, f.left, f.right)?)
        }
        Format::Sss => Structured::Sss(sss_construct(a, &layout.block_sizes(n), tol)?),
        Format::Hss => Structured::Hss(hss_construct(a, &layout.tree(n)?, tol)?),
    })
}

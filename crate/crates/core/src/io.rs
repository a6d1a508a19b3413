//! Plain-text file formats.
//!
//! A matrix is a `rows cols` line followed by `rows` lines of `cols`
//! numbers. Generator, SSS and HSS files are a short header followed by
//! matrices in that format. Parsing is whitespace-insensitive; numbers are
//! written with 17 significant digits so a round trip is exact.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::displacement::{DisplacementOp, GeneratorForm};
use crate::error::{Error, Result};
use crate::hss::{HssForm, PartitionTree};
use crate::kernel::DenseMatrix;
use crate::sss::SssForm;

struct Tokens<'a> {
    inner: std::str::SplitWhitespace<'a>,
    taken: usize,
}

impl<'a> Tokens<'a> {
    fn new(s: &'a str) -> Self {
        Self { inner: s.split_whitespace(), taken: 0 }
    }

    fn next<T: FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self
            .inner
            .next()
            .ok_or_else(|| Error::Parse(format!("unexpected end of input, expected {what}")))?;
        self.taken += 1;
        tok.parse()
            .map_err(|_| Error::Parse(format!("token {} ({tok:?}) is not a valid {what}", self.taken)))
    }

    fn word(&mut self, what: &str) -> Result<&'a str> {
        self.taken += 1;
        self.inner.next().ok_or_else(|| Error::Parse(format!("unexpected end of input, expected {what}")))
    }

    fn values(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.next::<f64>("number")).collect()
    }

    fn matrix(&mut self) -> Result<DenseMatrix> {
        let rows = self.next("row count")?;
        let cols = self.next("column count")?;
        DenseMatrix::new(rows, cols, self.values(rows * cols)?)
    }

    fn finish(mut self) -> Result<()> {
        match self.inner.next() {
            None => Ok(()),
            Some(t) => Err(Error::Parse(format!("trailing token {t:?}"))),
        }
    }
}

fn push_values(out: &mut String, v: &[f64]) {
    let line: Vec<String> = v.iter().map(|x| format!("{x:.17e}")).collect();
    out.push_str(&line.join(" "));
    out.push('\n');
}

fn push_matrix(out: &mut String, m: &DenseMatrix) {
    writeln!(out, "{} {}", m.rows(), m.cols()).unwrap();
    for i in 0..m.rows() {
        push_values(out, m.row(i));
    }
}

pub fn write_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    push_matrix(&mut out, m);
    out
}

pub fn parse_matrix(s: &str) -> Result<DenseMatrix> {
    let mut t = Tokens::new(s);
    let m = t.matrix()?;
    t.finish()?;
    Ok(m)
}

/// `n p kindA kindB`, then for each non-shift operator its diagonal on one
/// line (and its subdiagonal on the next for `bidiag`), then `P` and `Q`.
pub fn write_generator(g: &GeneratorForm) -> String {
    let mut out = String::new();
    writeln!(out, "{} {} {} {}", g.size(), g.rank(), g.op_a().kind_name(), g.op_b().kind_name()).unwrap();
    for op in [g.op_a(), g.op_b()] {
        match op {
            DisplacementOp::Shift(_) => {}
            DisplacementOp::Diagonal(d) => push_values(&mut out, d),
            DisplacementOp::Bidiagonal { diag, sub } => {
                push_values(&mut out, diag);
                push_values(&mut out, sub);
            }
        }
    }
    push_matrix(&mut out, g.p());
    push_matrix(&mut out, g.q());
    out
}

pub fn parse_generator(s: &str) -> Result<GeneratorForm> {
    let mut t = Tokens::new(s);
    let n: usize = t.next("size")?;
    let p: usize = t.next("rank")?;
    let kinds = [t.word("operator kind")?, t.word("operator kind")?];
    let mut ops = Vec::with_capacity(2);
    for kind in kinds {
        ops.push(match kind {
            "shift" => DisplacementOp::shift(n),
            "diag" => DisplacementOp::diagonal(t.values(n)?)?,
            "bidiag" => {
                let diag = t.values(n)?;
                DisplacementOp::bidiagonal(diag, t.values(n.saturating_sub(1))?)?
            }
            other => return Err(Error::Parse(format!("unknown operator kind {other:?}"))),
        });
    }
    let pm = t.matrix()?;
    let qm = t.matrix()?;
    t.finish()?;
    if pm.cols() != p {
        return Err(Error::Parse(format!("header rank {p}, P has {} columns", pm.cols())));
    }
    let op_b = ops.pop().unwrap();
    let op_a = ops.pop().unwrap();
    GeneratorForm::new(op_a, op_b, pm, qm)
}

/// `p`, the block sizes, then per block `D, U, V, W, P, Q, R`.
pub fn write_sss(s: &SssForm) -> String {
    let mut out = String::new();
    writeln!(out, "{}", s.num_blocks()).unwrap();
    let sizes: Vec<String> = s.block_sizes().iter().map(|k| k.to_string()).collect();
    writeln!(out, "{}", sizes.join(" ")).unwrap();
    for i in 0..s.num_blocks() {
        for m in [s.d(i), s.u(i), s.v(i), s.w(i), s.p(i), s.q(i), &s.r(i)] {
            push_matrix(&mut out, m);
        }
    }
    out
}

pub fn parse_sss(s: &str) -> Result<SssForm> {
    let mut t = Tokens::new(s);
    let p: usize = t.next("block count")?;
    let sizes: Vec<usize> = (0..p).map(|_| t.next("block size")).collect::<Result<_>>()?;
    let mut parts: [Vec<DenseMatrix>; 7] = Default::default();
    for _ in 0..p {
        for part in parts.iter_mut() {
            part.push(t.matrix()?);
        }
    }
    t.finish()?;
    let [d, u, v, w, pp, q, r] = parts;
    SssForm::from_components(sizes, d, u, v, w, pp, q, r)
}

/// `n K leaf_count`, the node sizes one level per line, then every node in
/// breadth-first order: `R, W, B` for non-root nodes followed by `D, U, V`
/// for leaves.
pub fn write_hss(h: &HssForm) -> String {
    let t = h.tree();
    let mut out = String::new();
    writeln!(out, "{} {} {}", t.n(), t.depth(), t.num_leaves()).unwrap();
    for k in 0..=t.depth() {
        let sizes: Vec<String> = t.level_sizes(k).iter().map(|s| s.to_string()).collect();
        writeln!(out, "{}", sizes.join(" ")).unwrap();
    }
    for id in 0..t.num_nodes() {
        if id > 0 {
            for m in [h.r(id), h.w(id), h.b(id)] {
                push_matrix(&mut out, m);
            }
        }
        if t.is_leaf(id) {
            let i = t.leaf_index(id);
            for m in [h.d(i), h.u(i), h.v(i)] {
                push_matrix(&mut out, m);
            }
        }
    }
    out
}

pub fn parse_hss(s: &str) -> Result<HssForm> {
    let mut t = Tokens::new(s);
    let n: usize = t.next("size")?;
    let depth: usize = t.next("depth")?;
    let leaves: usize = t.next("leaf count")?;
    if depth >= usize::BITS as usize - 1 || leaves != 1 << depth {
        return Err(Error::Parse(format!("depth {depth} does not give {leaves} leaves")));
    }
    let levels = (0..=depth)
        .map(|k| (0..1usize << k).map(|_| t.next("node size")).collect::<Result<Vec<usize>>>())
        .collect::<Result<Vec<_>>>()?;
    let tree = PartitionTree::from_levels(levels)?;
    if tree.n() != n {
        return Err(Error::Parse(format!("header size {n}, root size {}", tree.n())));
    }
    let nn = tree.num_nodes();
    let empty = || vec![DenseMatrix::zeros(0, 0); nn];
    let (mut r, mut w, mut b) = (empty(), empty(), empty());
    let (mut d, mut u, mut v) = (Vec::new(), Vec::new(), Vec::new());
    for id in 0..nn {
        if id > 0 {
            r[id] = t.matrix()?;
            w[id] = t.matrix()?;
            b[id] = t.matrix()?;
        }
        if tree.is_leaf(id) {
            d.push(t.matrix()?);
            u.push(t.matrix()?);
            v.push(t.matrix()?);
        }
    }
    t.finish()?;
    HssForm::new(tree, d, u, v, r, w, b)
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

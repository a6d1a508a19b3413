use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use structmat::displacement::{
    generalized_schur_lu, generators_cauchy, generators_toeplitz, generators_vandermonde, gs_apply_inverse,
    invert_via_augmented, series_reconstruct,
};
use structmat::hss::{hss_matvec, hss_sparse_solve, separated_kernel, PartitionTree};
use structmat::io::{read_file, write_file, write_matrix};
use structmat::kernel::{dense_lu_no_pivot, toeplitz_dense, toeplitz_matvec, DenseMatrix};
use structmat::ops::{self, loglog_slope};
use structmat::random::{random_hss, random_sss, random_vector};
use structmat::sss::{sss_from_banded, sss_matvec, sss_solve, uniform_blocks};

use crate::error::{CliError, CliResult};
use crate::families::{banded, cauchy_nodes, toeplitz_data, vandermonde_nodes};
use crate::repr::{compress, Format, Layout, Structured};

#[derive(Debug, Parser)]
#[command(name = "structmat", version, about = "Structured matrix toolkit: displacement, SSS and HSS forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded test matrix in its natural (or the requested) format.
    Gen(Opts),
    /// Compress a dense matrix file into the requested format.
    Compress(Opts),
    /// Multiply a matrix file (read as --format) by a vector.
    Matvec(Opts),
    /// Solve with a matrix file (read as --format).
    Solve(Opts),
    /// Compress a dense matrix and check it against the dense oracle.
    Verify(Opts),
    /// Count operations of one algorithm over a range of sizes; CSV output.
    Bench(BenchOpts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Toeplitz,
    Vandermonde,
    Cauchy,
    Banded,
    Kernel,
    RandomSss,
    RandomHss,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// SSS block size; 0 picks ceil(n / 16).
    #[arg(long, default_value_t = 0)]
    pub block: usize,
    /// HSS leaf size.
    #[arg(long, default_value_t = 64)]
    pub leaf: usize,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Vector file (an n x 1 matrix) for matvec and solve; seeded random otherwise.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub bandwidth: usize,
    /// Off-diagonal rank of the random SSS and HSS kinds.
    #[arg(long, default_value_t = 4)]
    pub rank: usize,
    /// Offset between the Cauchy node sets (`y = x + shift`).
    #[arg(long, default_value_t = 0.5)]
    pub shift: f64,
    /// Expand generators with the Neumann series instead of the recurrence.
    #[arg(long)]
    pub series: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchOp {
    SssMatvec,
    SssSolve,
    HssMatvec,
    HssSolve,
    GsLu,
    GsApply,
    DenseLu,
    ToeplitzMatvec,
}

#[derive(Debug, Clone, Args)]
pub struct BenchOpts {
    #[arg(long, value_enum)]
    pub op: BenchOp,
    #[arg(long, value_delimiter = ',', default_value = "256,512,1024,2048")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub rep: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Opts {
    fn layout(&self) -> Layout {
        Layout { block: self.block, leaf: self.leaf }
    }

    fn check(&self) -> CliResult<()> {
        if self.n == 0 {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
        if self.leaf == 0 {
            return Err(CliError::Usage("--leaf must be at least 1".into()));
        }
        Ok(())
    }

    fn input(&self) -> CliResult<String> {
        let path = self.input.as_ref().ok_or_else(|| CliError::Usage("--in is required".into()))?;
        Ok(read_file(path)?)
    }

    fn vector(&self, n: usize) -> CliResult<Vec<f64>> {
        match &self.rhs {
            None => Ok(random_vector(n, self.seed)),
            Some(path) => {
                let m = structmat::io::parse_matrix(&read_file(path)?)?;
                if m.shape() != (n, 1) {
                    return Err(structmat::Error::DimensionMismatch(format!(
                        "vector file is {}x{}, expected {n}x1",
                        m.rows(),
                        m.cols()
                    ))
                    .into());
                }
                Ok(m.into_data())
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => Ok(write_file(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn column(v: Vec<f64>) -> DenseMatrix {
    let n = v.len();
    DenseMatrix::new(n, 1, v).expect("length matches")
}

/// The kind in its natural representation.
pub fn generate(kind: Kind, o: &Opts) -> CliResult<Structured> {
    let n = o.n;
    Ok(match kind {
        Kind::Toeplitz => {
            let (col, row) = toeplitz_data(n, o.seed);
            Structured::Generator(generators_toeplitz(&col, &row)?)
        }
        Kind::Vandermonde => Structured::Generator(generators_vandermonde(&vandermonde_nodes(n, o.seed))?),
        Kind::Cauchy => {
            let (x, y) = cauchy_nodes(n, o.seed, o.shift);
            Structured::Generator(generators_cauchy(&x, &y)?)
        }
        Kind::Banded => Structured::Dense(banded(n, o.bandwidth, o.seed)),
        Kind::Kernel => Structured::Dense(separated_kernel(n)),
        Kind::RandomSss => {
            Structured::Sss(random_sss(&o.layout().block_sizes(n), o.rank, 2.0, o.seed))
        }
        Kind::RandomHss => Structured::Hss(random_hss(&o.layout().tree(n)?, o.rank, 3.0, o.seed)),
    })
}

fn convert(s: Structured, target: Format, o: &Opts) -> CliResult<Structured> {
    if s.format() == target {
        return Ok(s);
    }
    let dense = match &s {
        Structured::Generator(g) if o.series => series_reconstruct(g)?,
        other => other.to_dense()?,
    };
    if let (Structured::Dense(_), Format::Sss, Some(Kind::Banded)) = (&s, target, o.kind) {
        return Ok(Structured::Sss(sss_from_banded(&dense, o.bandwidth)?));
    }
    Ok(compress(&dense, target, o.tol, o.layout())?)
}

fn cmd_gen(o: &Opts) -> CliResult<()> {
    let kind = o.kind.ok_or_else(|| CliError::Usage("gen needs --kind".into()))?;
    let native = generate(kind, o)?;
    let target = o.format.unwrap_or(native.format());
    let s = convert(native, target, o)?;
    emit(&o.out, &s.write())
}

fn cmd_compress(o: &Opts) -> CliResult<()> {
    let target = o.format.ok_or_else(|| CliError::Usage("compress needs --format".into()))?;
    let a = Structured::parse(Format::Dense, &o.input()?)?.to_dense()?;
    let s = compress(&a, target, o.tol, o.layout())?;
    let (max, ranks) = s.rank_summary();
    eprintln!("max rank: {max}\nranks: {ranks}");
    emit(&o.out, &s.write())
}

fn cmd_matvec(o: &Opts) -> CliResult<()> {
    let s = Structured::parse(o.format.unwrap_or(Format::Dense), &o.input()?)?;
    let x = o.vector(s.size())?;
    emit(&o.out, &write_matrix(&column(s.matvec(&x)?)))
}

fn cmd_solve(o: &Opts) -> CliResult<()> {
    let s = Structured::parse(o.format.unwrap_or(Format::Dense), &o.input()?)?;
    let b = o.vector(s.size())?;
    let x = s.solve(&b)?;
    let r = s.matvec(&x)?;
    let res = r.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
        / b.iter().map(|q| q * q).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    eprintln!("relative residual: {res:.3e}");
    emit(&o.out, &write_matrix(&column(x)))
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    num / den.max(f64::MIN_POSITIVE)
}

/// Runs `verify` and returns the report; a failed check is an error that
/// carries the report.
pub fn verify_report(o: &Opts) -> CliResult<String> {
    let target = o.format.ok_or_else(|| CliError::Usage("verify needs --format".into()))?;
    let (dense, native) = match (o.kind, &o.input) {
        (Some(kind), None) => {
            let s = generate(kind, o)?;
            (s.to_dense()?, Some(s))
        }
        (None, Some(_)) => (Structured::parse(Format::Dense, &o.input()?)?.to_dense()?, None),
        _ => return Err(CliError::Usage("verify needs exactly one of --kind and --in".into())),
    };
    let rep = match native {
        Some(s) if s.format() == target => s,
        _ => compress(&dense, target, o.tol, o.layout())?,
    };
    let n = dense.rows();
    let err = max_rel(rep.to_dense()?.data(), dense.data());
    let x = random_vector(n, o.seed);
    let mv = max_rel(&rep.matvec(&x)?, &dense.matvec(&x));
    let (max, ranks) = rep.rank_summary();
    let limit = 10.0 * o.tol;
    let ok = err <= limit && mv <= limit;
    let report = format!(
        "format: {target}\nn: {n}\nmax relative error: {err:.3e}\nmatvec relative error: {mv:.3e}\n\
         max rank: {max}\nranks: {ranks}\nstatus: {}\n",
        if ok { "ok" } else { "FAILED" }
    );
    if ok {
        Ok(report)
    } else {
        print!("{report}");
        Err(CliError::Tolerance(format!("error {err:.3e} / {mv:.3e} above {limit:.1e}")))
    }
}

fn cmd_verify(o: &Opts) -> CliResult<()> {
    let report = verify_report(o)?;
    emit(&o.out, &report)
}

/// One benchmark measurement: counted operations and wall time.
fn bench_one(op: BenchOp, n: usize, seed: u64) -> CliResult<(u64, u128)> {
    let x = random_vector(n, seed);
    let toeplitz = || {
        let (col, row) = toeplitz_data(n, seed);
        generators_toeplitz(&col, &row).map(|g| (col, row, g))
    };
    let timed = |f: &mut dyn FnMut() -> CliResult<()>| -> CliResult<(u64, u128)> {
        let start = Instant::now();
        let (res, count) = ops::measure(f);
        res?;
        Ok((count, start.elapsed().as_nanos()))
    };
    match op {
        BenchOp::SssMatvec | BenchOp::SssSolve => {
            let s = random_sss(&uniform_blocks(n, 16), 4, 2.0, seed);
            if op == BenchOp::SssMatvec {
                timed(&mut || sss_matvec(&s, &x).map(drop).map_err(Into::into))
            } else {
                timed(&mut || sss_solve(&s, &x, 1e-14).map(drop).map_err(Into::into))
            }
        }
        BenchOp::HssMatvec | BenchOp::HssSolve => {
            let h = random_hss(&PartitionTree::build(n, 32)?, 4, 3.0, seed);
            if op == BenchOp::HssMatvec {
                timed(&mut || hss_matvec(&h, &x).map(drop).map_err(Into::into))
            } else {
                timed(&mut || hss_sparse_solve(&h, &x, 1e-14).map(drop).map_err(Into::into))
            }
        }
        BenchOp::GsLu => {
            let (_, _, g) = toeplitz()?;
            timed(&mut || generalized_schur_lu(&g, 1e-12).map(drop).map_err(Into::into))
        }
        BenchOp::GsApply => {
            let (_, _, g) = toeplitz()?;
            let ginv = invert_via_augmented(&g)?;
            timed(&mut || gs_apply_inverse(&ginv, &x).map(drop).map_err(Into::into))
        }
        BenchOp::DenseLu => {
            let (col, row, _) = toeplitz()?;
            let a = toeplitz_dense(&col, &row);
            timed(&mut || dense_lu_no_pivot(&a, 1e-14).map(drop).map_err(Into::into))
        }
        BenchOp::ToeplitzMatvec => {
            let (col, row, _) = toeplitz()?;
            timed(&mut || toeplitz_matvec(&col, &row, &x).map(drop).map_err(Into::into))
        }
    }
}

/// CSV rows `n,op,rep,counted_ops,wall_ns` and the log-log slope of the
/// mean counted operations against `n`.
pub fn bench_csv(b: &BenchOpts) -> CliResult<(String, f64)> {
    if b.sizes.len() < 2 || b.sizes.contains(&0) || b.rep == 0 {
        return Err(CliError::Usage("bench needs at least two positive sizes and --rep >= 1".into()));
    }
    let name = b.op.to_possible_value().expect("no skipped variants").get_name().to_string();
    let mut csv = String::from("n,op,rep,counted_ops,wall_ns\n");
    let mut means = Vec::with_capacity(b.sizes.len());
    for &n in &b.sizes {
        let mut total = 0u64;
        for rep in 0..b.rep {
            let (count, wall) = bench_one(b.op, n, b.seed)?;
            csv.push_str(&format!("{n},{name},{rep},{count},{wall}\n"));
            total += count;
        }
        means.push(total as f64 / b.rep as f64);
    }
    let xs: Vec<f64> = b.sizes.iter().map(|&n| n as f64).collect();
    Ok((csv, loglog_slope(&xs, &means)))
}

fn cmd_bench(b: &BenchOpts) -> CliResult<()> {
    let (csv, slope) = bench_csv(b)?;
    emit(&b.out, &csv)?;
    eprintln!("slope: {slope:.3}");
    Ok(())
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Bench(b) => cmd_bench(b),
        Command::Gen(o) | Command::Compress(o) | Command::Matvec(o) | Command::Solve(o) | Command::Verify(o) => {
            o.check()?;
            match &cli.command {
                Command::Gen(_) => cmd_gen(o),
                Command::Compress(_) => cmd_compress(o),
                Command::Matvec(_) => cmd_matvec(o),
                Command::Solve(_) => cmd_solve(o),
                _ => cmd_verify(o),
            }
        }
    }
}

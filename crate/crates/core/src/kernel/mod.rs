//! Dense linear algebra, rank-revealing factorizations and the FFT.
//!
//! These routines are the building blocks of the fast algorithms and, at the
//! same time, the brute-force reference every fast result is checked against.

pub mod dense;
pub mod fft;
pub mod lowrank;
pub mod lu;

pub use dense::{matmul, DenseMatrix};
pub use fft::{fft, ifft, toeplitz_dense, toeplitz_matvec};
pub use lowrank::{
    numerical_rank, orthonormal_factor, recompress, singular_values, truncated_factorization,
    truncated_svd, LowRankFactors, Threshold, TruncatedSvd,
};
pub use lu::{
    dense_inverse, dense_lu_no_pivot, dense_solve, invert_lower, invert_upper, solve_unit_lower, solve_upper,
    PivotedLu,
};

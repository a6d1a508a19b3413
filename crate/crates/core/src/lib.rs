pub mod error;
pub mod kernel;
pub mod ops;
pub mod random;

pub use error::{Error, Result};
pub use kernel::DenseMatrix;
pub mod blocksparse;
pub mod displacement;
pub mod hss;
pub mod io;
pub mod sss;

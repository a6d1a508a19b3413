//! Library side of the `structmat` command-line tool.

pub mod commands;
pub mod error;
pub mod families;
pub mod repr;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};

//! File formats, the parallel study runner, the bundled synthetic network,
//! and the `netspill` command line.

pub mod cli;
pub mod error;
pub mod fixture;
pub mod io;
pub mod study;

pub use error::{CliError, CliResult};

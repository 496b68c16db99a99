//! File formats and the `dendrite` command-line driver on top of
//! `dendrite-core`.

pub mod commands;
pub mod error;
pub mod formats;
pub mod io;
pub mod svg;

pub use commands::{run, Cli};
pub use error::{CliError, Result};

//! File formats, configuration and commands behind the `rulcp` binary.
//!
//! The numerical work lives in [`rulcp_core`]; this crate reads the raw
//! C-MAPSS text files, writes sample/result CSVs atomically and runs seeds in
//! parallel.

pub mod commands;
pub mod config;
mod error;
pub mod io;

pub use error::{CliError, Result};

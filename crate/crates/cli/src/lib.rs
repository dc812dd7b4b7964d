//! Command-line driver for the `mbd` diagnosis engine: instance file
//! formats, the `diag`/`sequential`/`bench`/`check` commands and benchmark
//! CSV handling.

pub mod bench;
pub mod commands;
pub mod format;

pub use commands::{run, Cli};

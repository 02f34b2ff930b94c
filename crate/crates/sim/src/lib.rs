//! Experiment runner, CSV formats and the `dsee-anypath` command-line tool.
//!
//! The algorithms live in `anypath_core`; this crate adds file IO, parallel
//! epoch execution and the comparison summary.

pub mod cli;
pub mod csv_io;
pub mod format;
pub mod runner;
pub mod summary;

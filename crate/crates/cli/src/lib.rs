//! Support code for the `zkcec` binary: configuration files, exit codes,
//! machine-readable outcomes and the benchmark harness.

pub mod bench;
pub mod outcome;
pub mod settings;

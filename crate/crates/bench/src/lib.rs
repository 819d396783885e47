//! Shared fixtures for the criterion benchmarks.

use std::path::{Path, PathBuf};

use zkcec_core::circuit::parse_netlist;
use zkcec_core::protocol::Instance;

/// Corpus root shipped with the workspace.
pub fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Load a corpus pair such as `equiv/adder2` as a protocol instance.
pub fn instance(rel: &str) -> Instance {
    let dir = corpus().join(rel);
    let read = |f: &str| {
        let p = dir.join(f);
        let text = std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        parse_netlist(f, &text).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
    };
    Instance::cec(&read("spec.net"), &read("impl.net")).expect("corpus pairs share an interface")
}

//! Zero-knowledge combinational equivalence checking.
//!
//! A prover holding a secret gate-level implementation convinces a verifier
//! that it computes the same function as a public specification. The miter
//! of the two circuits is encoded as clause polynomials over GF(2^128),
//! committed with IT-MAC commitments, and the prover shows in zero knowledge
//! that the miter has a resolution refutation, that its secret half is
//! satisfiable, and that the secret half only touches interface literals.

pub mod circuit;
pub mod cnf;
pub mod encoding;
pub mod error;
pub mod field;
pub mod poly;
pub mod protocol;
pub mod sat;
pub mod zk;

pub use circuit::{build_miter, parse_netlist, Circuit, MiterBundle};
pub use cnf::{Clause, CnfFormula, Lit, Var};
pub use error::{Error, Phase, ProtocolAbort, Result};
pub use field::FieldElem;
pub use poly::{poly_from_roots, Poly};

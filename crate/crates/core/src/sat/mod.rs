//! Resolution refutations and the tools around them.

mod compress;
mod oracle;
mod proof;
mod solver;
mod trace;

pub use compress::{
    compress, count_structures, factorial, uncompressed, Chain, ChainStep, CompressedProof, Operand,
};
pub use oracle::{tt_equiv, MAX_TT_INPUTS};
pub use proof::{resolve, validate_refutation, RefutationProof, RejectReason, Rejection, Step};
pub use solver::{find_assignment, solve, SolveResult, DEFAULT_BUDGET};
pub use trace::{export_trace, import_trace, TraceError};

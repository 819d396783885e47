//! Commit-and-prove machinery: dealer correlations, transport, IT-MAC
//! commitments, clause polynomials and the hidden-index memory.

pub mod backend;
pub mod channel;
pub mod clause;
pub mod rom;
pub mod tape;

pub use backend::{run_pair, Backend, PShare, ProverBackend, Share, VShare, VerifierBackend};
pub use channel::{duplex, Channel, Duplex, Frame, Role, Session, Tag, Tamper, TcpChannel, Traffic};
pub use tape::{dealer_gen, write_tapes, ProverTape, VerifierTape};

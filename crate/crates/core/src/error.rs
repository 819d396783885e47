//! Error types shared across the crate.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("width {got} exceeds declared maximum {max}")]
pub struct WidthError {
    pub got: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct StructureError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("scale limit exceeded: {0}")]
pub struct ScaleError(pub String);

/// Protocol phase a failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Phase {
    Hello,
    Commit,
    P1,
    P2,
    P3,
    P4,
    Verdict,
}

impl Phase {
    pub fn to_byte(self) -> u8 {
        match self {
            Phase::Hello => 0,
            Phase::Commit => 1,
            Phase::P1 => 2,
            Phase::P2 => 3,
            Phase::P3 => 4,
            Phase::P4 => 5,
            Phase::Verdict => 6,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0 => Phase::Hello,
            1 => Phase::Commit,
            2 => Phase::P1,
            3 => Phase::P2,
            4 => Phase::P3,
            5 => Phase::P4,
            6 => Phase::Verdict,
            _ => return None,
        })
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Hello => "hello",
            Phase::Commit => "commit",
            Phase::P1 => "P1",
            Phase::P2 => "P2",
            Phase::P3 => "P3",
            Phase::P4 => "P4",
            Phase::Verdict => "verdict",
        };
        f.write_str(s)
    }
}

/// Which check inside a phase rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Open,
    Mul,
    Chal,
    PoPIdt,
    Res,
    IsFalse,
    Rom,
    Complement,
    IndexMap,
    Statement,
    Checkpoint,
    Framing,
    Peer,
    Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("protocol abort in {phase} ({kind:?}): {reason}")]
pub struct ProtocolAbort {
    pub phase: Phase,
    pub kind: CheckKind,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Width(#[from] WidthError),
    #[error(transparent)]
    Parse(#[from] crate::circuit::ParseError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Cnf(#[from] crate::cnf::CnfError),
    #[error("solver exceeded its conflict budget of {0}")]
    SolverTimeout(u64),
    #[error(transparent)]
    Trace(#[from] crate::sat::TraceError),
    #[error("no satisfying assignment: {0}")]
    Witness(String),
    #[error("key setup failed after {0} resamples: persistent code collision")]
    Collision(usize),
    #[error("dealer tape exhausted: need {need}, have {have}")]
    TapeExhausted { need: u64, have: u64 },
    #[error("transport: {0}")]
    Transport(String),
    #[error(transparent)]
    Abort(#[from] ProtocolAbort),
    #[error("circuits are not equivalent")]
    NotEquivalent,
    #[error("formula is satisfiable; no refutation exists")]
    NotRefutable,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn abort(phase: Phase, kind: CheckKind, reason: impl Into<String>) -> Self {
        Error::Abort(ProtocolAbort { phase, kind, reason: reason.into() })
    }

    /// The abort record, if this error is a protocol abort.
    pub fn as_abort(&self) -> Option<&ProtocolAbort> {
        match self {
            Error::Abort(a) => Some(a),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

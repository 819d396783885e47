//! The two-party protocol.
//!
//! After a statement of sizes, the prover commits the secret clauses, then
//! proves four things about them without revealing them:
//!
//! * P1: the public clauses it committed are the verifier's own.
//! * P2: the committed memory admits a resolution refutation.
//! * P3: the secret clauses alone are satisfiable.
//! * P4: no secret clause mentions a public variable outside the interface.

mod config;
mod instance;
mod phases;
mod plan;
mod run;
mod statement;

pub use config::{Config, RomMode, PROTOCOL_VERSION};
pub use instance::{Instance, Mode, PublicInstance};
pub use phases::{commit_secret, p1, p2, p3, p4, private_codes, P1Prover};
pub use plan::{p2_witness, prepare, Mutation, P2Witness, Plan, PlanStats, ReadWitness, StepWitness};
pub use run::{
    run_blueprint, run_local, run_plan, run_prover, run_verifier, Leakage, LocalRun, PhaseTimes, Report, TapeSource, TrafficReport,
    VerifyOptions,
};
pub use statement::{
    decode_index_map, encode_index_map, PublicCodes, Statement, TapeBudget, MAX_COUNT, MAX_WIDTH,
};

//! Exit codes and the JSON outcome printed by protocol commands.

use serde::Serialize;
use zkcec_core::error::Error;
use zkcec_core::protocol::Report;

pub const EXIT_ACCEPT: i32 = 0;
pub const EXIT_NOT_EQUIVALENT: i32 = 2;
pub const EXIT_ABORT: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotEquivalent | Error::NotRefutable => EXIT_NOT_EQUIVALENT,
        Error::Abort(_) | Error::Transport(_) => EXIT_ABORT,
        _ => EXIT_INPUT,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verifier: Option<Report>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prover: Option<Report>,
}

impl Outcome {
    pub fn accepted(verifier: Option<Report>, prover: Option<Report>) -> Self {
        Self { status: "accept", phase: None, check: None, reason: None, verifier, prover }
    }

    pub fn failed(e: &Error) -> Self {
        let mut o = Self { status: "error", phase: None, check: None, reason: Some(e.to_string()), verifier: None, prover: None };
        match e {
            Error::NotEquivalent => o.status = "not-equivalent",
            Error::NotRefutable => o.status = "not-refutable",
            Error::Abort(a) => {
                o.status = "abort";
                o.phase = Some(a.phase.to_string());
                o.check = Some(format!("{:?}", a.kind));
                o.reason = Some(a.reason.clone());
            }
            Error::Transport(_) => o.status = "transport-error",
            _ => {}
        }
        o
    }

    pub fn code(&self) -> i32 {
        match self.status {
            "accept" => EXIT_ACCEPT,
            "not-equivalent" | "not-refutable" => EXIT_NOT_EQUIVALENT,
            "abort" | "transport-error" => EXIT_ABORT,
            _ => EXIT_INPUT,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcome serializes")
    }
}

//! Line-based netlist format.
//!
//! ```text
//! # comment
//! input a
//! input b
//! output c
//! gate AND c a b
//! ```
//!
//! Statements may appear in any order; gates are topologically sorted after
//! parsing.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::{Circuit, Gate, GateKind, NetId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownGate(String),
    Arity { kind: GateKind, expected: usize, got: usize },
    BadNetName(String),
    MultiplyDriven(String),
    Undriven(String),
    DuplicateInput(String),
    RepeatedGateInput(String),
    CombinationalLoop(String),
    NoOutputs,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(s) => write!(f, "syntax error: {s}"),
            ParseErrorKind::UnknownGate(s) => write!(f, "unknown gate kind `{s}`"),
            ParseErrorKind::Arity { kind, expected, got } => {
                write!(f, "arity mismatch: {kind} takes {expected} input(s), got {got}")
            }
            ParseErrorKind::BadNetName(s) => write!(f, "invalid net name `{s}`"),
            ParseErrorKind::MultiplyDriven(s) => write!(f, "net `{s}` is driven more than once"),
            ParseErrorKind::Undriven(s) => write!(f, "net `{s}` is used but never driven"),
            ParseErrorKind::DuplicateInput(s) => write!(f, "input `{s}` declared twice"),
            ParseErrorKind::RepeatedGateInput(s) => {
                write!(f, "gate reads net `{s}` on both inputs")
            }
            ParseErrorKind::CombinationalLoop(s) => {
                write!(f, "combinational loop through net `{s}`")
            }
            ParseErrorKind::NoOutputs => write!(f, "circuit declares no outputs"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Copy)]
struct Pos {
    line: usize,
    col: usize,
}

fn valid_net(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Split a line into tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

pub fn parse_netlist(name: &str, text: &str) -> Result<Circuit, ParseError> {
    let mut nets: Vec<String> = Vec::new();
    let mut ids: HashMap<String, NetId> = HashMap::new();
    let mut first_use: Vec<Pos> = Vec::new();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut raw_gates: Vec<(Gate, Pos)> = Vec::new();

    let mut intern = |s: &str, pos: Pos| -> Result<NetId, ParseError> {
        if !valid_net(s) {
            return Err(ParseError {
                line: pos.line,
                col: pos.col,
                kind: ParseErrorKind::BadNetName(s.to_string()),
            });
        }
        Ok(*ids.entry(s.to_string()).or_insert_with(|| {
            nets.push(s.to_string());
            first_use.push(pos);
            nets.len() - 1
        }))
    };

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokens(content);
        let Some(&(col, head)) = toks.first() else { continue };
        let at = |col: usize| Pos { line, col };
        let err = |col: usize, kind| ParseError { line, col, kind };
        match head {
            "input" | "output" => {
                if toks.len() != 2 {
                    return Err(err(col, ParseErrorKind::Syntax(format!("`{head}` takes one net"))));
                }
                let (c, s) = toks[1];
                let id = intern(s, at(c))?;
                if head == "input" {
                    if inputs.contains(&id) {
                        return Err(err(c, ParseErrorKind::DuplicateInput(s.to_string())));
                    }
                    inputs.push(id);
                } else {
                    outputs.push(id);
                }
            }
            "gate" => {
                if toks.len() < 3 {
                    return Err(err(col, ParseErrorKind::Syntax("gate needs a kind and an output".into())));
                }
                let (kc, ks) = toks[1];
                let kind: GateKind = ks
                    .parse()
                    .map_err(|_| err(kc, ParseErrorKind::UnknownGate(ks.to_string())))?;
                let got = toks.len() - 3;
                if got != kind.arity() {
                    return Err(err(kc, ParseErrorKind::Arity { kind, expected: kind.arity(), got }));
                }
                let (oc, os) = toks[2];
                let out = intern(os, at(oc))?;
                let mut ins = Vec::with_capacity(got);
                for &(c, s) in &toks[3..] {
                    let id = intern(s, at(c))?;
                    if ins.contains(&id) {
                        return Err(err(c, ParseErrorKind::RepeatedGateInput(s.to_string())));
                    }
                    ins.push(id);
                }
                raw_gates.push((Gate { kind, out, ins }, at(oc)));
            }
            other => {
                return Err(err(col, ParseErrorKind::Syntax(format!("unknown statement `{other}`"))));
            }
        }
    }

    // driver table
    let mut driver: Vec<Option<usize>> = vec![None; nets.len()];
    let mut is_input = vec![false; nets.len()];
    for i in &inputs {
        is_input[*i] = true;
    }
    for (gi, (g, pos)) in raw_gates.iter().enumerate() {
        if is_input[g.out] || driver[g.out].is_some() {
            return Err(ParseError {
                line: pos.line,
                col: pos.col,
                kind: ParseErrorKind::MultiplyDriven(nets[g.out].clone()),
            });
        }
        driver[g.out] = Some(gi);
    }
    for net in 0..nets.len() {
        if !is_input[net] && driver[net].is_none() {
            let pos = first_use[net];
            return Err(ParseError {
                line: pos.line,
                col: pos.col,
                kind: ParseErrorKind::Undriven(nets[net].clone()),
            });
        }
    }
    if outputs.is_empty() {
        return Err(ParseError { line: text.lines().count().max(1), col: 1, kind: ParseErrorKind::NoOutputs });
    }

    // Kahn's algorithm, stable in declaration order
    let mut pending: Vec<usize> = raw_gates
        .iter()
        .map(|(g, _)| g.ins.iter().filter(|n| driver[**n].is_some()).count())
        .collect();
    let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); nets.len()];
    for (gi, (g, _)) in raw_gates.iter().enumerate() {
        for n in &g.ins {
            if driver[*n].is_some() {
                fanout[*n].push(gi);
            }
        }
    }
    let mut ready: std::collections::BTreeSet<usize> =
        (0..raw_gates.len()).filter(|g| pending[*g] == 0).collect();
    let mut order = Vec::with_capacity(raw_gates.len());
    while let Some(gi) = ready.pop_first() {
        order.push(gi);
        for &succ in &fanout[raw_gates[gi].0.out] {
            pending[succ] -= 1;
            if pending[succ] == 0 {
                ready.insert(succ);
            }
        }
    }
    if order.len() != raw_gates.len() {
        let stuck = (0..raw_gates.len()).find(|g| pending[*g] > 0).unwrap();
        let (g, pos) = &raw_gates[stuck];
        return Err(ParseError {
            line: pos.line,
            col: pos.col,
            kind: ParseErrorKind::CombinationalLoop(nets[g.out].clone()),
        });
    }
    let gates = order.into_iter().map(|gi| raw_gates[gi].0.clone()).collect();
    Ok(Circuit { name: name.to_string(), nets, inputs, outputs, gates })
}

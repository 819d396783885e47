//! Gate-level combinational circuits: netlist parsing, simulation, Tseitin
//! encoding and miter construction.

mod miter;
mod parse;
mod tseitin;

pub use miter::{build_miter, build_public_part, MiterBundle, PublicPart, VarClass};
pub use parse::{parse_netlist, ParseError, ParseErrorKind};
pub use tseitin::{gate_clauses, template_size, tseitin, VarAlloc};

use std::fmt;
use std::str::FromStr;

pub type NetId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Not,
    Xor,
    Nand,
    Nor,
    Xnor,
    Buf,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Not,
        GateKind::Xor,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Xnor,
        GateKind::Buf,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Not | GateKind::Buf => 1,
            _ => 2,
        }
    }

    /// Bitwise evaluation over 64 patterns at once.
    pub fn eval_word(self, a: u64, b: u64) -> u64 {
        match self {
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Not => !a,
            GateKind::Xor => a ^ b,
            GateKind::Nand => !(a & b),
            GateKind::Nor => !(a | b),
            GateKind::Xnor => !(a ^ b),
            GateKind::Buf => a,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Not => "NOT",
            GateKind::Xor => "XOR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Xnor => "XNOR",
            GateKind::Buf => "BUF",
        }
    }
}

impl FromStr for GateKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        GateKind::ALL.into_iter().find(|k| k.name() == s).ok_or(())
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub out: NetId,
    pub ins: Vec<NetId>,
}

/// A validated combinational circuit. Gates are stored in topological order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub name: String,
    pub nets: Vec<String>,
    pub inputs: Vec<NetId>,
    pub outputs: Vec<NetId>,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn net_name(&self, n: NetId) -> &str {
        &self.nets[n]
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Simulate 64 input patterns at once. `inputs[i]` holds bit lanes for input `i`.
    pub fn simulate_words(&self, inputs: &[u64]) -> Vec<u64> {
        let mut val = vec![0u64; self.nets.len()];
        for (net, w) in self.inputs.iter().zip(inputs) {
            val[*net] = *w;
        }
        for g in &self.gates {
            let a = val[g.ins[0]];
            let b = g.ins.get(1).map_or(0, |n| val[*n]);
            val[g.out] = g.kind.eval_word(a, b);
        }
        self.outputs.iter().map(|n| val[*n]).collect()
    }

    pub fn simulate(&self, inputs: &[bool]) -> Vec<bool> {
        let words: Vec<u64> = inputs.iter().map(|b| if *b { !0 } else { 0 }).collect();
        self.simulate_words(&words).into_iter().map(|w| w & 1 == 1).collect()
    }

    /// Values of every net under one input pattern.
    pub fn simulate_nets(&self, inputs: &[bool]) -> Vec<bool> {
        let mut val = vec![false; self.nets.len()];
        for (net, b) in self.inputs.iter().zip(inputs) {
            val[*net] = *b;
        }
        for g in &self.gates {
            let a = val[g.ins[0]] as u64;
            let b = g.ins.get(1).map_or(0, |n| val[*n] as u64);
            val[g.out] = g.kind.eval_word(a, b) & 1 == 1;
        }
        val
    }

    /// Render back to netlist text.
    pub fn to_netlist(&self) -> String {
        let mut out = String::new();
        for i in &self.inputs {
            out.push_str(&format!("input {}\n", self.nets[*i]));
        }
        for o in &self.outputs {
            out.push_str(&format!("output {}\n", self.nets[*o]));
        }
        for g in &self.gates {
            out.push_str(&format!("gate {} {}", g.kind, self.nets[g.out]));
            for i in &g.ins {
                out.push(' ');
                out.push_str(&self.nets[*i]);
            }
            out.push('\n');
        }
        out
    }
}

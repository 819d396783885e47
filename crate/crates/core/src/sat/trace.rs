//! Import and export of resolution traces.
//!
//! One clause per line: `<id> <lit>* 0 <antecedent-id>* 0`. Input clauses
//! have an empty antecedent list and must match a clause of the formula.
//! Derived clauses list two or more antecedents, all defined on earlier
//! lines; the chain is expanded by folding left in the listed order.

use std::collections::HashMap;

use thiserror::Error;

use crate::cnf::{Clause, CnfFormula, Lit};

use super::proof::{resolve, validate_refutation, RefutationProof, Step};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: antecedent {id} is not defined on an earlier line")]
    DanglingAntecedent { line: usize, id: u64 },
    #[error("line {line}: input clause does not occur in the formula")]
    UnknownInput { line: usize },
    #[error("line {line}: chain does not derive the stated clause")]
    NotDerivable { line: usize },
    #[error("trace never derives the empty clause")]
    MissingEmptyClause,
    #[error("expanded proof is invalid: {0}")]
    Invalid(String),
}

pub fn import_trace(text: &str, f: &CnfFormula) -> Result<RefutationProof, TraceError> {
    let mut by_set: HashMap<Vec<Lit>, Vec<usize>> = HashMap::new();
    for (i, c) in f.clauses.iter().enumerate() {
        by_set.entry(c.sorted()).or_default().push(i);
    }
    let mut defined: HashMap<u64, usize> = HashMap::new();
    let mut steps: Vec<Step> = Vec::new();
    let n = f.len();
    let mut bottom = None;

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('c') {
            continue;
        }
        let syn = |msg: &str| TraceError::Syntax { line, msg: msg.to_string() };
        let nums: Vec<i64> = t
            .split_whitespace()
            .map(|x| x.parse::<i64>().map_err(|_| syn("non-integer token")))
            .collect::<Result<_, _>>()?;
        let (&id, rest) = nums.split_first().ok_or_else(|| syn("empty line"))?;
        if id <= 0 {
            return Err(syn("clause ids are positive"));
        }
        let z1 = rest.iter().position(|x| *x == 0).ok_or_else(|| syn("unterminated literal list"))?;
        let lits: Vec<Lit> = rest[..z1]
            .iter()
            .map(|x| Lit::from_dimacs(*x).ok_or_else(|| syn("bad literal")))
            .collect::<Result<_, _>>()?;
        let tail = &rest[z1 + 1..];
        let z2 = tail.iter().position(|x| *x == 0).ok_or_else(|| syn("unterminated antecedent list"))?;
        if z2 + 1 != tail.len() {
            return Err(syn("trailing tokens"));
        }
        let ants = &tail[..z2];
        let clause = Clause::new(lits).map_err(|e| syn(&e.to_string()))?;
        let id = id as u64;
        if defined.contains_key(&id) {
            return Err(syn("clause id defined twice"));
        }

        let idx = if ants.is_empty() {
            let slot = by_set.get_mut(&clause.sorted()).and_then(|v| v.pop());
            slot.ok_or(TraceError::UnknownInput { line })?
        } else {
            if ants.len() < 2 {
                return Err(TraceError::NotDerivable { line });
            }
            let lookup = |a: i64| -> Result<usize, TraceError> {
                if a <= 0 {
                    return Err(syn("antecedent ids are positive"));
                }
                defined
                    .get(&(a as u64))
                    .copied()
                    .ok_or(TraceError::DanglingAntecedent { line, id: a as u64 })
            };
            let mut cur_idx = lookup(ants[0])?;
            let mut cur = clause_at(f, &steps, cur_idx).clone();
            for a in &ants[1..] {
                let other = lookup(*a)?;
                let (_, res) = resolve(&cur, clause_at(f, &steps, other))
                    .ok_or(TraceError::NotDerivable { line })?;
                steps.push(Step { left: cur_idx, right: other, resolvent: res.clone() });
                cur_idx = n + steps.len() - 1;
                cur = res;
            }
            if !cur.same_set(&clause) {
                return Err(TraceError::NotDerivable { line });
            }
            if clause.is_empty() && bottom.is_none() {
                bottom = Some(steps.len());
            }
            cur_idx
        };
        defined.insert(id, idx);
    }

    let end = bottom.ok_or(TraceError::MissingEmptyClause)?;
    steps.truncate(end);
    let proof = RefutationProof { num_inputs: n, steps }.trimmed();
    validate_refutation(f, &proof).map_err(|r| TraceError::Invalid(r.to_string()))?;
    Ok(proof)
}

fn clause_at<'a>(f: &'a CnfFormula, steps: &'a [Step], idx: usize) -> &'a Clause {
    if idx < f.len() {
        &f.clauses[idx]
    } else {
        &steps[idx - f.len()].resolvent
    }
}

/// Render a proof in the trace format: inputs as ids `1..=n`, each step as
/// a two-antecedent line.
pub fn export_trace(f: &CnfFormula, p: &RefutationProof) -> String {
    let mut out = String::new();
    let write_lits = |out: &mut String, c: &Clause| {
        for l in c.lits() {
            out.push_str(&l.to_dimacs().to_string());
            out.push(' ');
        }
        out.push('0');
    };
    for (i, c) in f.clauses.iter().enumerate() {
        out.push_str(&format!("{} ", i + 1));
        write_lits(&mut out, c);
        out.push_str(" 0\n");
    }
    for (k, s) in p.steps.iter().enumerate() {
        out.push_str(&format!("{} ", f.len() + k + 1));
        write_lits(&mut out, &s.resolvent);
        out.push_str(&format!(" {} {} 0\n", s.left + 1, s.right + 1));
    }
    out
}

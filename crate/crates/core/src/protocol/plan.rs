//! Prover-side preparation: refutation, key, witnesses and the statement.
//!
//! A [`Mutation`] turns the honest plan into a specific cheating prover.
//! Each one keeps the message schedule intact so that the verifier, not a
//! framing error, has to catch it.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::circuit::VarClass;
use crate::cnf::{Clause, CnfFormula, Lit, Var};
use crate::encoding::{setup_key, Blake2Hasher, EncodingContext, IndexMap};
use crate::error::{Error, Result, ScaleError, StructureError};
use crate::field::FieldElem;
use crate::sat::{compress, find_assignment, resolve, solve, uncompressed, CompressedProof, Operand, SolveResult};
use crate::zk::rom::MAX_CELLS;

use super::config::{Config, PROTOCOL_VERSION};
use super::instance::{Instance, Mode};
use super::statement::{Statement, MAX_COUNT, MAX_WIDTH};

/// Ways a dishonest prover can deviate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Commit a public clause with one literal dropped.
    AlterPublicClause,
    /// Commit one public clause too few.
    DropPublicClause,
    /// Drop a literal from one resolvent.
    ForgeResolvent,
    /// Read a stored resolvent from beyond the readable prefix.
    ForwardRead,
    /// Read a cell but substitute another clause for its value.
    WrongRomValue,
    /// Read a different cell than the step resolves against.
    AntecedentSwap,
    /// Refute the formula plus blocking clauses, faking each read of one.
    GhostClauses,
    /// Add `(x)(¬x)` to the secret clauses and claim both literals true.
    ContradictorySecret,
    /// Claim an assignment that falsifies a secret clause.
    BadAssignment,
    /// Copy a specification-internal clause into the secret clauses.
    SmuggleClause,
    /// Corrupt one opened tag.
    TamperMac,
    /// Flip a byte of one outgoing frame in transit.
    FlipWireByte { frame: usize, byte: usize },
}

impl Mutation {
    pub const NAMED: [(&'static str, Mutation); 12] = [
        ("alter-public-clause", Mutation::AlterPublicClause),
        ("drop-public-clause", Mutation::DropPublicClause),
        ("forge-resolvent", Mutation::ForgeResolvent),
        ("forward-read", Mutation::ForwardRead),
        ("wrong-rom-value", Mutation::WrongRomValue),
        ("antecedent-swap", Mutation::AntecedentSwap),
        ("ghost-clauses", Mutation::GhostClauses),
        ("contradictory-secret", Mutation::ContradictorySecret),
        ("bad-assignment", Mutation::BadAssignment),
        ("smuggle-clause", Mutation::SmuggleClause),
        ("tamper-mac", Mutation::TamperMac),
        ("flip-wire-byte", Mutation::FlipWireByte { frame: 1, byte: 0 }),
    ];

    pub fn from_name(s: &str) -> Option<Self> {
        Self::NAMED.iter().find(|(n, _)| *n == s).map(|(_, m)| *m)
    }
}

/// One memory read: the address and the clause claimed to be there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadWitness {
    pub addr: usize,
    pub value: Clause,
}

/// One resolution step. The first step of a chain reads both operands;
/// later steps resolve the previous resolvent (`c0`) with one read (`c1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepWitness {
    pub reads: Vec<ReadWitness>,
    pub c0: Clause,
    pub c1: Clause,
    pub cr: Clause,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct P2Witness {
    /// Stored resolvents, committed at the start of P2.
    pub stored: Vec<Clause>,
    pub chains: Vec<Vec<StepWitness>>,
}

/// Timing and size figures gathered while planning.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct PlanStats {
    pub num_vars: usize,
    pub num_clauses: usize,
    pub literals: usize,
    /// Resolution steps.
    pub r: usize,
    /// Stored resolvents.
    pub r_stored: usize,
    pub key_attempts: usize,
    #[serde(with = "secs")]
    pub solve_time: Duration,
}

pub(crate) mod secs {
    use serde::Serializer;
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }
}

/// Everything the prover needs to run the protocol.
#[derive(Clone, Debug)]
pub struct Plan {
    pub instance: Instance,
    pub ctx: EncodingContext,
    pub statement: Statement,
    /// Public clauses as committed; equal to the real ones when honest.
    pub committed_pub: Vec<Clause>,
    pub p2: P2Witness,
    /// Codes of the literals claimed true, sorted.
    pub assignment_codes: Vec<FieldElem>,
    pub mutation: Option<Mutation>,
    pub stats: PlanStats,
}

impl Plan {
    /// `(name, index)` for every public variable, sorted by index.
    pub fn index_entries(&self) -> Vec<(String, u64)> {
        let mut v: Vec<(String, u64)> =
            self.instance.public.vars.iter().map(|(var, n)| (n.clone(), self.ctx.index().get(*var))).collect();
        v.sort_by_key(|e| e.1);
        v
    }
}

fn fail_witness(m: Mutation, why: &str) -> Error {
    Error::Witness(format!("{m:?} is not applicable: {why}"))
}

/// Solve, compress, key and encode. Returns `NotEquivalent` (or
/// `NotRefutable` for properties) when the combined formula is satisfiable,
/// unless the ghost-clause mutation is forcing a proof anyway.
pub fn prepare(inst: &Instance, cfg: &Config, mutation: Option<Mutation>) -> Result<Plan> {
    cfg.validate().map_err(|e| Error::Structure(StructureError(e)))?;
    let mut inst = inst.clone();
    let pristine_sec = inst.phi_sec.clone();
    match mutation {
        Some(Mutation::ContradictorySecret) => {
            let x = pick_var(&inst, VarClass::Secret)
                .or_else(|| inst.phi_sec.used_vars().first().copied())
                .ok_or_else(|| fail_witness(Mutation::ContradictorySecret, "no secret variable"))?;
            inst.phi_sec.push(Clause::new(vec![Lit::pos(x)])?);
            inst.phi_sec.push(Clause::new(vec![Lit::neg(x)])?);
        }
        Some(Mutation::SmuggleClause) => {
            let classes = inst.classes();
            let c = inst
                .public
                .phi_pub
                .clauses
                .iter()
                .find(|c| c.lits().iter().any(|l| classes[l.var() as usize] == VarClass::Public))
                .cloned()
                .ok_or_else(|| fail_witness(Mutation::SmuggleClause, "no specification-internal clause"))?;
            inst.phi_sec.push(c);
        }
        _ => {}
    }
    let classes = inst.classes();
    let combined = inst.combined();
    let n_cells = combined.len();

    let t0 = Instant::now();
    let (inputs, refutation) = match solve(&combined, cfg.solver_budget)? {
        SolveResult::Unsat(p) => (combined.clauses.clone(), p),
        SolveResult::Sat(_) if mutation == Some(Mutation::GhostClauses) => ghost_refutation(&inst, &combined, cfg)?,
        SolveResult::Sat(_) => {
            return Err(match inst.public.mode {
                Mode::Cec => Error::NotEquivalent,
                Mode::Blueprint => Error::NotRefutable,
            })
        }
    };
    let solve_time = t0.elapsed();
    let mut proof = if cfg.compress { compress(&refutation) } else { uncompressed(&refutation) };
    if mutation == Some(Mutation::ForgeResolvent) {
        forge_resolvent(&mut proof)?;
    }
    if n_cells + proof.num_stored() > MAX_CELLS || proof.num_steps() > MAX_COUNT {
        return Err(ScaleError(format!(
            "{} cells and {} steps exceed the {}-cell memory",
            n_cells + proof.num_stored(),
            proof.num_steps(),
            MAX_CELLS
        ))
        .into());
    }
    let mut p2 = p2_witness(&proof, &inputs, n_cells);
    if let Some(m) = mutation {
        mutate_reads(&mut p2, m, &combined.clauses)?;
    }

    let mut omega = match mutation {
        Some(Mutation::ContradictorySecret) => find_assignment(&pristine_sec)?,
        // Unsatisfiable secret clauses: send codes of the all-false assignment.
        Some(Mutation::BadAssignment) => find_assignment(&inst.phi_sec).unwrap_or_default(),
        _ => find_assignment(&inst.phi_sec)?,
    };
    omega.resize(inst.num_vars, false);
    if mutation == Some(Mutation::BadAssignment) {
        let c = inst.phi_sec.clauses.first().ok_or_else(|| fail_witness(Mutation::BadAssignment, "no secret clause"))?;
        for l in c.lits() {
            omega[l.var() as usize] = l.is_neg();
        }
    }

    let index = IndexMap::sequential(inst.num_vars)?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.prover_seed);
    let ctx = setup_key(index, classes, Arc::new(Blake2Hasher), &mut rng)?;

    let sec_vars = inst.phi_sec.used_vars();
    let mut true_lits: Vec<Lit> = sec_vars.iter().map(|v| Lit::new(*v, !omega[*v as usize])).collect();
    if mutation == Some(Mutation::ContradictorySecret) {
        let x = inst.phi_sec.clauses.last().expect("unit pushed").lits()[0].var();
        let xi = true_lits.iter().position(|l| l.var() == x).expect("x occurs in the secret clauses");
        let comp = !true_lits[xi];
        match true_lits.iter().position(|l| l.var() != x) {
            Some(i) => true_lits[i] = comp,
            None => true_lits.push(comp),
        }
    }
    let mut assignment_codes: Vec<FieldElem> = true_lits.iter().map(|l| ctx.code(*l)).collect();
    assignment_codes.sort_unstable_by_key(|c| c.0);

    let mut committed_pub = inst.public.phi_pub.clauses.clone();
    match mutation {
        Some(Mutation::AlterPublicClause) => {
            let c = committed_pub
                .iter_mut()
                .find(|c| c.len() >= 2)
                .ok_or_else(|| fail_witness(Mutation::AlterPublicClause, "all public clauses are units"))?;
            *c = Clause::new(c.lits()[1..].to_vec())?;
        }
        Some(Mutation::DropPublicClause) => {
            committed_pub.pop();
        }
        _ => {}
    }

    let w = plan_width(&combined, &committed_pub, &p2);
    if w > MAX_WIDTH {
        return Err(ScaleError(format!("clause width {w} exceeds {MAX_WIDTH}")).into());
    }
    let statement = Statement {
        version: PROTOCOL_VERSION,
        mode: inst.public.mode,
        config: cfg.digest(),
        n_sec: inst.phi_sec.len(),
        w,
        m: assignment_codes.len(),
        chains: proof.chain_lengths(),
    };
    let stats = PlanStats {
        num_vars: inst.num_vars,
        num_clauses: combined.len(),
        literals: combined.clauses.iter().map(Clause::len).sum(),
        r: refutation.len(),
        r_stored: proof.num_stored(),
        key_attempts: ctx.attempts(),
        solve_time,
    };
    Ok(Plan { instance: inst, ctx, statement, committed_pub, p2, assignment_codes, mutation, stats })
}

fn pick_var(inst: &Instance, class: VarClass) -> Option<Var> {
    let classes = inst.classes();
    inst.phi_sec.used_vars().into_iter().find(|v| classes[*v as usize] == class)
}

fn plan_width(f: &CnfFormula, committed_pub: &[Clause], p2: &P2Witness) -> usize {
    let steps = p2.chains.iter().flatten();
    let reads = steps.clone().flat_map(|s| s.reads.iter().map(|r| r.value.len()));
    let ops = steps.flat_map(|s| [s.c0.len(), s.c1.len(), s.cr.len()]);
    f.clauses
        .iter()
        .chain(committed_pub)
        .chain(&p2.stored)
        .map(Clause::len)
        .chain(reads)
        .chain(ops)
        .max()
        .unwrap_or(0)
        .max(1)
}

/// Flatten a compressed proof into per-step reads. Input clauses at
/// positions `n_real..inputs.len()` do not exist in memory; reads of them
/// are served from address 0.
pub fn p2_witness(proof: &CompressedProof, inputs: &[Clause], n_real: usize) -> P2Witness {
    let n_in = proof.num_inputs;
    debug_assert_eq!(n_in, inputs.len());
    let stored: Vec<Clause> = proof.chains.iter().map(|c| c.stored().clone()).collect();
    let read = |i: usize| -> ReadWitness {
        if i < n_real {
            ReadWitness { addr: i, value: inputs[i].clone() }
        } else if i < n_in {
            ReadWitness { addr: 0, value: inputs[i].clone() }
        } else {
            ReadWitness { addr: n_real + (i - n_in), value: stored[i - n_in].clone() }
        }
    };
    let mut chains = Vec::with_capacity(proof.chains.len());
    for chain in &proof.chains {
        let mut steps: Vec<StepWitness> = Vec::with_capacity(chain.steps.len());
        for s in &chain.steps {
            let sw = match (s.left, s.right) {
                (Operand::Cell(a), Operand::Cell(b)) => {
                    let (ra, rb) = (read(a), read(b));
                    StepWitness { c0: ra.value.clone(), c1: rb.value.clone(), reads: vec![ra, rb], cr: s.resolvent.clone() }
                }
                (Operand::Prev, Operand::Cell(a)) | (Operand::Cell(a), Operand::Prev) => {
                    let r = read(a);
                    let prev = steps.last().expect("Prev follows a step").cr.clone();
                    StepWitness { c0: prev, c1: r.value.clone(), reads: vec![r], cr: s.resolvent.clone() }
                }
                (Operand::Prev, Operand::Prev) => unreachable!("a step cannot use its predecessor twice"),
            };
            steps.push(sw);
        }
        chains.push(steps);
    }
    P2Witness { stored, chains }
}

fn forge_resolvent(proof: &mut CompressedProof) -> Result<()> {
    let step = proof
        .chains
        .iter_mut()
        .flat_map(|c| c.steps.iter_mut())
        .find(|s| !s.resolvent.is_empty())
        .ok_or_else(|| fail_witness(Mutation::ForgeResolvent, "every resolvent is empty"))?;
    let mut lits = step.resolvent.lits().to_vec();
    lits.pop();
    step.resolvent = Clause::new(lits)?;
    Ok(())
}

fn mutate_reads(p2: &mut P2Witness, m: Mutation, cells: &[Clause]) -> Result<()> {
    let size = cells.len();
    let first = &mut p2.chains[0][0];
    match m {
        Mutation::ForwardRead => {
            let v = p2.stored[0].clone();
            first.reads[0] = ReadWitness { addr: size, value: v.clone() };
            first.c0 = v;
        }
        Mutation::WrongRomValue => {
            let orig = first.reads[0].value.clone();
            let other = cells
                .iter()
                .find(|c| !c.same_set(&orig))
                .cloned()
                .ok_or_else(|| fail_witness(m, "all cells hold the same clause"))?;
            first.reads[0].value = other.clone();
            first.c0 = other;
        }
        Mutation::AntecedentSwap => {
            let c0 = first.c0.clone();
            let cr = first.cr.clone();
            let a = (0..size)
                .find(|a| *a != first.reads[1].addr && !resolve(&c0, &cells[*a]).is_some_and(|(_, r)| r.same_set(&cr)))
                .ok_or_else(|| fail_witness(m, "no illegal antecedent"))?;
            first.reads[1] = ReadWitness { addr: a, value: cells[a].clone() };
            first.c1 = cells[a].clone();
        }
        _ => {}
    }
    Ok(())
}

/// Blocking clauses over the interface until the formula is refutable, and
/// a refutation of the extended formula. Inputs are `cells ∥ blocking`.
fn ghost_refutation(
    inst: &Instance,
    combined: &CnfFormula,
    cfg: &Config,
) -> Result<(Vec<Clause>, crate::sat::RefutationProof)> {
    const MAX_BLOCKS: usize = 1 << 12;
    let mut f = combined.clone();
    let io = &inst.public.io;
    for _ in 0..MAX_BLOCKS {
        match solve(&f, cfg.solver_budget)? {
            SolveResult::Unsat(p) => return Ok((f.clauses, p)),
            SolveResult::Sat(model) => {
                let block: Vec<Lit> = io.iter().map(|v| Lit::new(*v, model[*v as usize])).collect();
                f.push(Clause::new(block)?);
            }
        }
    }
    Err(fail_witness(Mutation::GhostClauses, "too many blocking clauses"))
}

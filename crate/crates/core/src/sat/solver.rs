//! A compact CDCL solver that logs every resolution it performs.
//!
//! Conflict analysis is first-UIP; literals fixed at level 0 are resolved out
//! of each learned clause rather than silently dropped, so every learned
//! clause has an explicit binary-resolution derivation. Branching uses VSIDS
//! with phase saving, restarts follow the Luby sequence, and learned clauses
//! are never deleted.

use crate::cnf::{Clause, CnfFormula, Lit, Var};
use crate::error::Error;

use super::proof::{RefutationProof, Step};

#[derive(Clone, Debug)]
pub enum SolveResult {
    /// Value of every variable of the formula.
    Sat(Vec<bool>),
    Unsat(RefutationProof),
}

const NO_REASON: u32 = u32::MAX;
const RESTART_UNIT: u64 = 64;

struct SClause {
    lits: Vec<Lit>,
    /// Index of this clause in the proof numbering.
    pid: usize,
}

struct VarHeap {
    heap: Vec<Var>,
    pos: Vec<usize>,
}

impl VarHeap {
    const ABSENT: usize = usize::MAX;

    fn new(n: usize) -> Self {
        VarHeap { heap: Vec::with_capacity(n), pos: vec![Self::ABSENT; n] }
    }

    fn contains(&self, v: Var) -> bool {
        self.pos[v as usize] != Self::ABSENT
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if act[self.heap[p] as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[p];
            self.pos[self.heap[i] as usize] = i;
            i = p;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] { r } else { l };
            if act[self.heap[c] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = i;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn insert(&mut self, v: Var, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = i;
        self.up(i, act);
    }

    fn bumped(&mut self, v: Var, act: &[f64]) {
        if self.contains(v) {
            self.up(self.pos[v as usize], act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<Var> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = Self::ABSENT;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, act);
        }
        Some(top)
    }
}

fn luby(mut i: u64) -> u64 {
    // 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

pub struct Solver {
    clauses: Vec<SClause>,
    watches: Vec<Vec<u32>>,
    /// Per literal code: 1 true, -1 false, 0 unassigned.
    value: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    in_cur: Vec<bool>,
    num_inputs: usize,
    steps: Vec<Step>,
    pub conflicts: u64,
}

enum Outcome {
    Sat,
    Unsat,
}

impl Solver {
    fn new(f: &CnfFormula) -> Self {
        let n = f.num_vars as usize;
        let mut s = Solver {
            clauses: Vec::with_capacity(f.len() * 2),
            watches: vec![Vec::new(); 2 * n],
            value: vec![0; 2 * n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            heap: VarHeap::new(n),
            phase: vec![false; n],
            in_cur: vec![false; n],
            num_inputs: f.len(),
            steps: Vec::new(),
            conflicts: 0,
        };
        for v in 0..n as Var {
            s.heap.insert(v, &s.activity);
        }
        s
    }

    #[inline]
    fn val(&self, l: Lit) -> i8 {
        self.value[l.code() as usize]
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        self.value[l.code() as usize] = 1;
        self.value[(!l).code() as usize] = -1;
        self.level[l.var() as usize] = self.decision_level();
        self.reason[l.var() as usize] = reason;
        self.trail.push(l);
    }

    fn attach(&mut self, ci: u32) {
        let c = &self.clauses[ci as usize].lits;
        self.watches[c[0].code() as usize].push(ci);
        self.watches[c[1].code() as usize].push(ci);
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let fl = !p;
            let mut ws = std::mem::take(&mut self.watches[fl.code() as usize]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            'clauses: while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let lits = &mut self.clauses[ci as usize].lits;
                if lits[0] == fl {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                if self.value[first.code() as usize] == 1 {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                for k in 2..lits.len() {
                    if self.value[lits[k].code() as usize] != -1 {
                        lits.swap(1, k);
                        let nw = lits[1];
                        self.watches[nw.code() as usize].push(ci);
                        continue 'clauses;
                    }
                }
                ws[j] = ci;
                j += 1;
                if self.value[first.code() as usize] == -1 {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, ci);
                }
            }
            ws.truncate(j);
            self.watches[fl.code() as usize] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: Var) {
        let a = &mut self.activity[v as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    /// Resolve the working clause `cur` with clause `ci` on variable `v`,
    /// logging the step. Returns the new proof id.
    fn resolve_into(&mut self, cur: &mut Vec<Lit>, cur_pid: usize, ci: u32, v: Var) -> usize {
        cur.retain(|l| l.var() != v);
        self.in_cur[v as usize] = false;
        let reason_pid = self.clauses[ci as usize].pid;
        for k in 0..self.clauses[ci as usize].lits.len() {
            let l = self.clauses[ci as usize].lits[k];
            if l.var() != v && !self.in_cur[l.var() as usize] {
                self.in_cur[l.var() as usize] = true;
                cur.push(l);
            }
        }
        self.steps.push(Step {
            left: cur_pid,
            right: reason_pid,
            resolvent: Clause::new(cur.clone()).expect("resolvents are tautology-free"),
        });
        self.num_inputs + self.steps.len() - 1
    }

    /// Derive ⊥ from a clause whose literals are all false at level 0.
    fn refute_at_root(&mut self, confl: u32) {
        let mut cur = self.clauses[confl as usize].lits.clone();
        let mut pid = self.clauses[confl as usize].pid;
        for l in &cur {
            self.in_cur[l.var() as usize] = true;
        }
        let mut idx = self.trail.len();
        while !cur.is_empty() {
            idx -= 1;
            let v = self.trail[idx].var();
            if self.in_cur[v as usize] {
                let r = self.reason[v as usize];
                pid = self.resolve_into(&mut cur, pid, r, v);
            }
        }
        debug_assert_eq!(self.steps.last().map(|s| s.resolvent.len()), Some(0));
        let _ = pid;
    }

    /// First-UIP analysis followed by level-0 elimination. Returns the
    /// learned literals (asserting literal first), their proof id and the
    /// backjump level.
    fn analyze(&mut self, confl: u32) -> (Vec<Lit>, usize, u32) {
        let dl = self.decision_level();
        let mut cur = self.clauses[confl as usize].lits.clone();
        let mut pid = self.clauses[confl as usize].pid;
        let mut at_dl = 0usize;
        for l in &cur {
            self.in_cur[l.var() as usize] = true;
            self.bump(l.var());
            if self.level[l.var() as usize] == dl {
                at_dl += 1;
            }
        }
        let mut idx = self.trail.len();
        while at_dl > 1 {
            idx -= 1;
            let v = self.trail[idx].var();
            if !self.in_cur[v as usize] {
                continue;
            }
            let r = self.reason[v as usize];
            debug_assert_ne!(r, NO_REASON);
            for l in &self.clauses[r as usize].lits {
                let u = l.var();
                if u != v && !self.in_cur[u as usize] && self.level[u as usize] == dl {
                    at_dl += 1;
                }
            }
            at_dl -= 1;
            let lits: Vec<Var> = self.clauses[r as usize].lits.iter().map(|l| l.var()).collect();
            pid = self.resolve_into(&mut cur, pid, r, v);
            for u in lits {
                if u != v {
                    self.bump(u);
                }
            }
        }
        // resolve away literals fixed at the root, latest first
        let root_end = self.trail_lim.first().copied().unwrap_or(self.trail.len());
        if cur.iter().any(|l| self.level[l.var() as usize] == 0) {
            let mut k = root_end;
            while k > 0 {
                k -= 1;
                let v = self.trail[k].var();
                if self.in_cur[v as usize] {
                    let r = self.reason[v as usize];
                    pid = self.resolve_into(&mut cur, pid, r, v);
                }
            }
        }
        for l in &cur {
            self.in_cur[l.var() as usize] = false;
        }
        // asserting literal first, highest remaining level second
        let uip = cur.iter().position(|l| self.level[l.var() as usize] == dl).expect("one UIP literal");
        cur.swap(0, uip);
        let mut bj = 0;
        if cur.len() > 1 {
            let mut best = 1;
            for k in 1..cur.len() {
                if self.level[cur[k].var() as usize] > self.level[cur[best].var() as usize] {
                    best = k;
                }
            }
            cur.swap(1, best);
            bj = self.level[cur[1].var() as usize];
        }
        self.var_inc /= 0.95;
        (cur, pid, bj)
    }

    fn backtrack(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var();
            self.value[l.code() as usize] = 0;
            self.value[(!l).code() as usize] = 0;
            self.reason[v as usize] = NO_REASON;
            self.phase[v as usize] = !l.is_neg();
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn load(&mut self, f: &CnfFormula) -> Option<Outcome> {
        let mut units = Vec::new();
        for (i, c) in f.clauses.iter().enumerate() {
            if c.is_empty() {
                return Some(Outcome::Unsat);
            }
            self.clauses.push(SClause { lits: c.lits().to_vec(), pid: i });
            let ci = (self.clauses.len() - 1) as u32;
            if c.len() == 1 {
                units.push(ci);
            } else {
                self.attach(ci);
            }
        }
        for ci in units {
            let l = self.clauses[ci as usize].lits[0];
            match self.val(l) {
                0 => self.enqueue(l, ci),
                -1 => {
                    self.refute_at_root(ci);
                    return Some(Outcome::Unsat);
                }
                _ => {}
            }
        }
        None
    }

    fn search(&mut self, budget: u64) -> Result<Outcome, Error> {
        let mut restarts = 0u64;
        let mut since_restart = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.refute_at_root(confl);
                    return Ok(Outcome::Unsat);
                }
                if self.conflicts > budget {
                    return Err(Error::SolverTimeout(budget));
                }
                let (lits, pid, bj) = self.analyze(confl);
                self.backtrack(bj);
                self.clauses.push(SClause { lits, pid });
                let ci = (self.clauses.len() - 1) as u32;
                let first = self.clauses[ci as usize].lits[0];
                if self.clauses[ci as usize].lits.len() > 1 {
                    self.attach(ci);
                }
                self.enqueue(first, ci);
                continue;
            }
            if since_restart >= luby(restarts) * RESTART_UNIT {
                restarts += 1;
                since_restart = 0;
                self.backtrack(0);
                continue;
            }
            let mut next = None;
            while let Some(v) = self.heap.pop(&self.activity) {
                if self.value[Lit::pos(v).code() as usize] == 0 {
                    next = Some(v);
                    break;
                }
            }
            let Some(v) = next else { return Ok(Outcome::Sat) };
            self.trail_lim.push(self.trail.len());
            self.enqueue(Lit::new(v, !self.phase[v as usize]), NO_REASON);
        }
    }
}

/// Decide `f`. UNSAT answers carry a trimmed refutation; SAT answers carry a
/// checked model. `budget` caps the number of conflicts.
pub fn solve(f: &CnfFormula, budget: u64) -> Result<SolveResult, Error> {
    let mut s = Solver::new(f);
    let outcome = match s.load(f) {
        Some(o) => o,
        None => s.search(budget)?,
    };
    match outcome {
        Outcome::Unsat => {
            let proof = RefutationProof { num_inputs: f.len(), steps: s.steps }.trimmed();
            debug_assert!(super::proof::validate_refutation(f, &proof).is_ok());
            Ok(SolveResult::Unsat(proof))
        }
        Outcome::Sat => {
            let model: Vec<bool> =
                (0..f.num_vars).map(|v| s.value[Lit::pos(v).code() as usize] == 1).collect();
            assert!(f.satisfied_by(&model), "solver produced a non-model");
            Ok(SolveResult::Sat(model))
        }
    }
}

/// Conflict budget used when callers do not choose one.
pub const DEFAULT_BUDGET: u64 = 5_000_000;

/// A satisfying assignment of `f`, or a witness error if none exists.
pub fn find_assignment(f: &CnfFormula) -> Result<Vec<bool>, Error> {
    match solve(f, DEFAULT_BUDGET)? {
        SolveResult::Sat(m) => Ok(m),
        SolveResult::Unsat(_) => Err(Error::Witness("formula is unsatisfiable".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::proof::validate_refutation;
    use proptest::prelude::*;

    fn cl(v: &[i64]) -> Clause {
        Clause::new(v.iter().map(|x| Lit::from_dimacs(*x).unwrap()).collect()).unwrap()
    }

    fn formula(nv: u32, cs: &[&[i64]]) -> CnfFormula {
        let mut f = CnfFormula::new(nv);
        for c in cs {
            f.push(cl(c));
        }
        f
    }

    #[test]
    fn luby_prefix() {
        let got: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(got, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn unit_pair_single_step() {
        let f = formula(1, &[&[1], &[-1]]);
        let SolveResult::Unsat(p) = solve(&f, 100).unwrap() else { panic!() };
        assert_eq!(p.len(), 1);
        assert_eq!(validate_refutation(&f, &p), Ok(()));
    }

    #[test]
    fn simple_sat() {
        let f = formula(2, &[&[1, 2]]);
        let SolveResult::Sat(m) = solve(&f, 100).unwrap() else { panic!() };
        assert!(m[0] || m[1]);
    }

    #[test]
    fn and_gate_property_instance() {
        // (a∨¬c)(b∨¬c)(¬a∨¬b∨c)(c)(¬a) with a=1, b=2, c=3
        let f = formula(3, &[&[1, -3], &[2, -3], &[-1, -2, 3], &[3], &[-1]]);
        let SolveResult::Unsat(p) = solve(&f, 100).unwrap() else { panic!() };
        assert_eq!(validate_refutation(&f, &p), Ok(()));
    }

    #[test]
    fn pigeonhole_3_into_2() {
        // p_{i,j}: pigeon i in hole j, var = 2*i + j + 1
        let v = |i: i64, j: i64| 2 * i + j + 1;
        let mut cs: Vec<Vec<i64>> = (0..3).map(|i| vec![v(i, 0), v(i, 1)]).collect();
        for j in 0..2 {
            for a in 0..3 {
                for b in a + 1..3 {
                    cs.push(vec![-v(a, j), -v(b, j)]);
                }
            }
        }
        let refs: Vec<&[i64]> = cs.iter().map(|c| c.as_slice()).collect();
        let f = formula(6, &refs);
        let SolveResult::Unsat(p) = solve(&f, 10_000).unwrap() else { panic!() };
        assert_eq!(validate_refutation(&f, &p), Ok(()));
        assert!(p.len() > 3);
    }

    #[test]
    fn budget_exhaustion() {
        // pigeonhole 7 into 6 needs many conflicts
        let n = 7i64;
        let h = 6i64;
        let v = |i: i64, j: i64| h * i + j + 1;
        let mut f = CnfFormula::new((n * h) as u32);
        for i in 0..n {
            f.push(cl(&(0..h).map(|j| v(i, j)).collect::<Vec<_>>()));
        }
        for j in 0..h {
            for a in 0..n {
                for b in a + 1..n {
                    f.push(cl(&[-v(a, j), -v(b, j)]));
                }
            }
        }
        assert!(matches!(solve(&f, 5), Err(Error::SolverTimeout(5))));
    }

    #[test]
    fn find_assignment_rejects_contradiction() {
        let f = formula(1, &[&[1], &[-1]]);
        assert!(matches!(find_assignment(&f), Err(Error::Witness(_))));
    }

    fn brute_force_sat(f: &CnfFormula) -> bool {
        (0..1u32 << f.num_vars).any(|m| {
            let a: Vec<bool> = (0..f.num_vars).map(|v| m >> v & 1 == 1).collect();
            f.satisfied_by(&a)
        })
    }

    fn arb_3cnf() -> impl Strategy<Value = CnfFormula> {
        (3u32..9).prop_flat_map(|nv| {
            proptest::collection::vec(
                proptest::sample::subsequence((0..nv).collect::<Vec<_>>(), 1..=3).prop_flat_map(
                    |vars| {
                        let n = vars.len();
                        proptest::collection::vec(any::<bool>(), n).prop_map(move |s| {
                            Clause::new(vars.iter().zip(s).map(|(v, n)| Lit::new(*v, n)).collect())
                                .unwrap()
                        })
                    },
                ),
                1..40,
            )
            .prop_map(move |clauses| CnfFormula { num_vars: nv, clauses })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]
        #[test]
        fn answers_agree_with_brute_force(f in arb_3cnf()) {
            match solve(&f, 100_000).unwrap() {
                SolveResult::Sat(m) => {
                    prop_assert!(f.satisfied_by(&m));
                }
                SolveResult::Unsat(p) => {
                    prop_assert!(!brute_force_sat(&f));
                    prop_assert_eq!(validate_refutation(&f, &p), Ok(()));
                }
            }
        }
    }
}

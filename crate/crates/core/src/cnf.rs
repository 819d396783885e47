//! Literals, clauses and CNF formulas, plus DIMACS interchange.

use std::fmt;

use thiserror::Error;

/// Variable identifier, zero based. DIMACS numbering is `var + 1`.
pub type Var = u32;

/// A literal packed as `2 * var + negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, negated: bool) -> Self {
        Lit((var << 1) | negated as u32)
    }

    pub fn pos(var: Var) -> Self {
        Lit::new(var, false)
    }

    pub fn neg(var: Var) -> Self {
        Lit::new(var, true)
    }

    pub fn var(self) -> Var {
        self.0 >> 1
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn code(self) -> u32 {
        self.0
    }

    pub fn from_code(code: u32) -> Self {
        Lit(code)
    }

    /// DIMACS integer (`±(var + 1)`).
    pub fn to_dimacs(self) -> i64 {
        let v = self.var() as i64 + 1;
        if self.is_neg() {
            -v
        } else {
            v
        }
    }

    pub fn from_dimacs(v: i64) -> Option<Self> {
        if v == 0 || v.unsigned_abs() > (u32::MAX >> 1) as u64 {
            return None;
        }
        Some(Lit::new((v.unsigned_abs() - 1) as Var, v < 0))
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("clause repeats literal {0:?}")]
    DuplicateLiteral(Lit),
    #[error("clause contains both polarities of variable {0}")]
    Tautology(Var),
    #[error("DIMACS line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
}

/// An ordered set of literals. Order is kept as given; membership is set-like.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn new(lits: Vec<Lit>) -> Result<Self, CnfError> {
        for (i, a) in lits.iter().enumerate() {
            for b in &lits[..i] {
                if a == b {
                    return Err(CnfError::DuplicateLiteral(*a));
                }
                if *a == !*b {
                    return Err(CnfError::Tautology(a.var()));
                }
            }
        }
        Ok(Clause { lits })
    }

    pub fn empty() -> Self {
        Clause { lits: Vec::new() }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, l: Lit) -> bool {
        self.lits.contains(&l)
    }

    /// Literals in ascending code order, for set comparisons.
    pub fn sorted(&self) -> Vec<Lit> {
        let mut v = self.lits.clone();
        v.sort_unstable();
        v
    }

    pub fn same_set(&self, other: &Clause) -> bool {
        self.len() == other.len() && self.sorted() == other.sorted()
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.lits.iter().any(|l| assignment.get(l.var() as usize).copied() == Some(!l.is_neg()))
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.lits).finish()
    }
}

impl FromIterator<Lit> for Result<Clause, CnfError> {
    fn from_iter<I: IntoIterator<Item = Lit>>(iter: I) -> Self {
        Clause::new(iter.into_iter().collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: u32) -> Self {
        Self { num_vars, clauses: Vec::new() }
    }

    pub fn push(&mut self, c: Clause) {
        for l in c.lits() {
            self.num_vars = self.num_vars.max(l.var() + 1);
        }
        self.clauses.push(c);
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn max_width(&self) -> usize {
        self.clauses.iter().map(Clause::len).max().unwrap_or(0)
    }

    /// Variables that occur in some clause, ascending.
    pub fn used_vars(&self) -> Vec<Var> {
        let mut seen = vec![false; self.num_vars as usize];
        for c in &self.clauses {
            for l in c.lits() {
                seen[l.var() as usize] = true;
            }
        }
        seen.iter().enumerate().filter(|(_, s)| **s).map(|(v, _)| v as Var).collect()
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.satisfied_by(assignment))
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            out.push('\n');
            for l in c.lits() {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push('0');
        }
        out
    }

    pub fn from_dimacs(text: &str) -> Result<Self, CnfError> {
        let err = |line: usize, msg: &str| CnfError::Dimacs { line, msg: msg.to_string() };
        let mut header: Option<(u32, usize)> = None;
        let mut f = CnfFormula::default();
        let mut pending: Vec<Lit> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                let parts: Vec<_> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" || header.is_some() {
                    return Err(err(line_no, "malformed header"));
                }
                let v = parts[2].parse().map_err(|_| err(line_no, "bad variable count"))?;
                let c = parts[3].parse().map_err(|_| err(line_no, "bad clause count"))?;
                header = Some((v, c));
                f.num_vars = v;
                continue;
            }
            let Some((nv, _)) = header else {
                return Err(err(line_no, "clause before header"));
            };
            for tok in line.split_whitespace() {
                let v: i64 = tok.parse().map_err(|_| err(line_no, "bad literal"))?;
                if v == 0 {
                    let c = Clause::new(std::mem::take(&mut pending))
                        .map_err(|e| err(line_no, &e.to_string()))?;
                    f.clauses.push(c);
                } else {
                    let l = Lit::from_dimacs(v).ok_or_else(|| err(line_no, "bad literal"))?;
                    if l.var() >= nv {
                        return Err(err(line_no, "variable exceeds header"));
                    }
                    pending.push(l);
                }
            }
        }
        let Some((_, nc)) = header else {
            return Err(err(0, "missing header"));
        };
        if !pending.is_empty() {
            return Err(err(0, "unterminated clause"));
        }
        if f.clauses.len() != nc {
            return Err(err(0, "clause count differs from header"));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn literal_packing() {
        let l = Lit::neg(5);
        assert_eq!(l.var(), 5);
        assert!(l.is_neg());
        assert_eq!(!l, Lit::pos(5));
        assert_eq!(l.to_dimacs(), -6);
        assert_eq!(Lit::from_dimacs(-6), Some(l));
    }

    #[test]
    fn clause_rejects_duplicates_and_tautologies() {
        assert_eq!(
            Clause::new(vec![Lit::pos(0), Lit::pos(0)]),
            Err(CnfError::DuplicateLiteral(Lit::pos(0)))
        );
        assert_eq!(Clause::new(vec![Lit::pos(1), Lit::neg(1)]), Err(CnfError::Tautology(1)));
    }

    #[test]
    fn dimacs_empty() {
        assert_eq!(CnfFormula::default().to_dimacs(), "p cnf 0 0");
    }

    #[test]
    fn dimacs_single_clause() {
        let mut f = CnfFormula::new(2);
        f.push(Clause::new(vec![Lit::pos(0), Lit::neg(1)]).unwrap());
        assert_eq!(f.to_dimacs(), "p cnf 2 1\n1 -2 0");
    }

    fn arb_formula() -> impl Strategy<Value = CnfFormula> {
        (1u32..12).prop_flat_map(|nv| {
            proptest::collection::vec(
                proptest::collection::btree_set(0..nv, 0..5).prop_flat_map(move |vars| {
                    let vars: Vec<_> = vars.into_iter().collect();
                    let n = vars.len();
                    proptest::collection::vec(any::<bool>(), n).prop_map(move |signs| {
                        Clause::new(
                            vars.iter().zip(signs).map(|(v, s)| Lit::new(*v, s)).collect(),
                        )
                        .unwrap()
                    })
                }),
                0..10,
            )
            .prop_map(move |clauses| CnfFormula { num_vars: nv, clauses })
        })
    }

    proptest! {
        #[test]
        fn dimacs_round_trip(f in arb_formula()) {
            prop_assert_eq!(CnfFormula::from_dimacs(&f.to_dimacs()).unwrap(), f);
        }
    }
}

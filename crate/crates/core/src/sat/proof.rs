//! Resolution refutations: representation, validation, trimming and the
//! binary interchange format.

use std::fmt;
use std::io::{self, Read, Write};

use crate::cnf::{Clause, CnfFormula, Lit};

/// One binary resolution. Indices below `num_inputs` name input clauses;
/// index `num_inputs + k` names the resolvent of step `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub left: usize,
    pub right: usize,
    pub resolvent: Clause,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefutationProof {
    pub num_inputs: usize,
    pub steps: Vec<Step>,
}

impl RefutationProof {
    /// `R`, the number of resolution steps.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Maximum clause width over the inputs and every resolvent.
    pub fn width(&self, f: &CnfFormula) -> usize {
        let r = self.steps.iter().map(|s| s.resolvent.len()).max().unwrap_or(0);
        r.max(f.max_width())
    }

    /// Clause at a proof index.
    pub fn clause<'a>(&'a self, f: &'a CnfFormula, idx: usize) -> &'a Clause {
        if idx < self.num_inputs {
            &f.clauses[idx]
        } else {
            &self.steps[idx - self.num_inputs].resolvent
        }
    }

    /// Keep only the steps the final resolvent depends on, renumbered in order.
    pub fn trimmed(&self) -> RefutationProof {
        let n = self.num_inputs;
        let r = self.steps.len();
        if r == 0 {
            return self.clone();
        }
        let mut keep = vec![false; r];
        keep[r - 1] = true;
        for k in (0..r).rev() {
            if !keep[k] {
                continue;
            }
            for a in [self.steps[k].left, self.steps[k].right] {
                if a >= n {
                    keep[a - n] = true;
                }
            }
        }
        let mut remap = vec![usize::MAX; r];
        let mut steps = Vec::new();
        for k in 0..r {
            if keep[k] {
                let fix = |a: usize| if a < n { a } else { n + remap[a - n] };
                let s = &self.steps[k];
                steps.push(Step { left: fix(s.left), right: fix(s.right), resolvent: s.resolvent.clone() });
                remap[k] = steps.len() - 1;
            }
        }
        RefutationProof { num_inputs: n, steps }
    }
}

/// Resolve two clauses. Returns the literal of `left` that was clashed on and
/// the resolvent, or `None` unless exactly one complementary pair exists.
pub fn resolve(left: &Clause, right: &Clause) -> Option<(Lit, Clause)> {
    let mut pivot = None;
    for l in left.lits() {
        if right.contains(!*l) {
            if pivot.is_some() {
                return None;
            }
            pivot = Some(*l);
        }
    }
    let p = pivot?;
    let mut out: Vec<Lit> = left.lits().iter().copied().filter(|l| *l != p).collect();
    for l in right.lits() {
        if *l != !p && !out.contains(l) {
            out.push(*l);
        }
    }
    Some((p, Clause::new(out).expect("single clash keeps the union tautology-free")))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    InputCountMismatch,
    ForwardReference,
    NoClash,
    MultipleClashes,
    NotAResolvent,
    FinalNotEmpty,
    NoSteps,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub step: usize,
    pub reason: RejectReason,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {:?}", self.step, self.reason)
    }
}

/// Plaintext check of a refutation against its input formula.
pub fn validate_refutation(f: &CnfFormula, p: &RefutationProof) -> Result<(), Rejection> {
    let rej = |step, reason| Err(Rejection { step, reason });
    if p.num_inputs != f.len() {
        return rej(0, RejectReason::InputCountMismatch);
    }
    if p.steps.is_empty() {
        // only a formula that already contains ⊥ is refuted without steps
        return if f.clauses.iter().any(Clause::is_empty) { Ok(()) } else { rej(0, RejectReason::NoSteps) };
    }
    for (k, s) in p.steps.iter().enumerate() {
        let avail = p.num_inputs + k;
        if s.left >= avail || s.right >= avail {
            return rej(k, RejectReason::ForwardReference);
        }
        let (l, r) = (p.clause(f, s.left), p.clause(f, s.right));
        let clashes = l.lits().iter().filter(|x| r.contains(!**x)).count();
        match clashes {
            0 => return rej(k, RejectReason::NoClash),
            1 => {}
            _ => return rej(k, RejectReason::MultipleClashes),
        }
        let (_, res) = resolve(l, r).expect("exactly one clash");
        if !res.same_set(&s.resolvent) {
            return rej(k, RejectReason::NotAResolvent);
        }
    }
    if !p.steps.last().unwrap().resolvent.is_empty() {
        return rej(p.steps.len() - 1, RejectReason::FinalNotEmpty);
    }
    Ok(())
}

const MAGIC: &[u8; 4] = b"ZKRP";
const VERSION: u8 = 1;
const MAX_INDEX: usize = (1 << 24) - 1;

fn put24<W: Write>(w: &mut W, v: usize) -> io::Result<()> {
    if v > MAX_INDEX {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "index exceeds 24 bits"));
    }
    w.write_all(&(v as u32).to_le_bytes()[..3])
}

fn get24<R: Read>(r: &mut R) -> io::Result<usize> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b[..3])?;
    Ok(u32::from_le_bytes(b) as usize)
}

impl RefutationProof {
    /// Binary interchange: magic, version, 24-bit input count and step count,
    /// then per step two 24-bit indices and a length-prefixed literal list.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION])?;
        put24(w, self.num_inputs)?;
        put24(w, self.steps.len())?;
        for s in &self.steps {
            put24(w, s.left)?;
            put24(w, s.right)?;
            let n = u16::try_from(s.resolvent.len())
                .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "clause too wide"))?;
            w.write_all(&n.to_le_bytes())?;
            for l in s.resolvent.lits() {
                w.write_all(&l.code().to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> io::Result<Self> {
        let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic[..4] != MAGIC || magic[4] != VERSION {
            return Err(bad("not a proof file"));
        }
        let num_inputs = get24(r)?;
        let count = get24(r)?;
        let mut steps = Vec::with_capacity(count);
        for _ in 0..count {
            let left = get24(r)?;
            let right = get24(r)?;
            let mut nb = [0u8; 2];
            r.read_exact(&mut nb)?;
            let mut lits = Vec::with_capacity(u16::from_le_bytes(nb) as usize);
            for _ in 0..u16::from_le_bytes(nb) {
                let mut lb = [0u8; 4];
                r.read_exact(&mut lb)?;
                lits.push(Lit::from_code(u32::from_le_bytes(lb)));
            }
            let resolvent = Clause::new(lits).map_err(|e| bad(&e.to_string()))?;
            steps.push(Step { left, right, resolvent });
        }
        Ok(RefutationProof { num_inputs, steps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cl(v: &[i64]) -> Clause {
        Clause::new(v.iter().map(|x| Lit::from_dimacs(*x).unwrap()).collect()).unwrap()
    }

    fn unit_pair() -> (CnfFormula, RefutationProof) {
        let mut f = CnfFormula::new(1);
        f.push(cl(&[1]));
        f.push(cl(&[-1]));
        let p = RefutationProof {
            num_inputs: 2,
            steps: vec![Step { left: 0, right: 1, resolvent: Clause::empty() }],
        };
        (f, p)
    }

    #[test]
    fn accepts_unit_pair() {
        let (f, p) = unit_pair();
        assert_eq!(validate_refutation(&f, &p), Ok(()));
    }

    #[test]
    fn rejects_wrong_resolvent() {
        let (f, mut p) = unit_pair();
        p.steps[0].resolvent = cl(&[2]);
        assert_eq!(
            validate_refutation(&f, &p),
            Err(Rejection { step: 0, reason: RejectReason::NotAResolvent })
        );
    }

    #[test]
    fn rejects_forward_reference_and_multiple_clashes() {
        let mut f = CnfFormula::new(2);
        f.push(cl(&[1, 2]));
        f.push(cl(&[-1, -2]));
        let p = RefutationProof {
            num_inputs: 2,
            steps: vec![Step { left: 0, right: 1, resolvent: Clause::empty() }],
        };
        assert_eq!(validate_refutation(&f, &p).unwrap_err().reason, RejectReason::MultipleClashes);
        let p = RefutationProof {
            num_inputs: 2,
            steps: vec![Step { left: 0, right: 2, resolvent: Clause::empty() }],
        };
        assert_eq!(validate_refutation(&f, &p).unwrap_err().reason, RejectReason::ForwardReference);
    }

    #[test]
    fn rejects_nonempty_final() {
        let mut f = CnfFormula::new(2);
        f.push(cl(&[1, 2]));
        f.push(cl(&[-1]));
        let p = RefutationProof {
            num_inputs: 2,
            steps: vec![Step { left: 0, right: 1, resolvent: cl(&[2]) }],
        };
        assert_eq!(validate_refutation(&f, &p).unwrap_err().reason, RejectReason::FinalNotEmpty);
    }

    #[test]
    fn resolvent_order_does_not_matter() {
        let a = cl(&[1, 2, 3]);
        let b = cl(&[-1, 4]);
        let (p, r) = resolve(&a, &b).unwrap();
        assert_eq!(p, Lit::from_dimacs(1).unwrap());
        assert!(r.same_set(&cl(&[4, 3, 2])));
    }

    #[test]
    fn trimming_drops_unused_steps() {
        let mut f = CnfFormula::new(2);
        f.push(cl(&[1, 2]));
        f.push(cl(&[-1, 2]));
        f.push(cl(&[-2]));
        let p = RefutationProof {
            num_inputs: 3,
            steps: vec![
                Step { left: 0, right: 2, resolvent: cl(&[1]) },
                Step { left: 0, right: 1, resolvent: cl(&[2]) },
                Step { left: 4, right: 2, resolvent: Clause::empty() },
            ],
        };
        assert_eq!(validate_refutation(&f, &p), Ok(()));
        let t = p.trimmed();
        assert_eq!(t.len(), 2);
        assert_eq!(t.steps[1].left, 3);
        assert_eq!(validate_refutation(&f, &t), Ok(()));
    }

    #[test]
    fn binary_round_trip() {
        let (_, p) = unit_pair();
        let mut buf = Vec::new();
        p.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"ZKRP");
        assert_eq!(RefutationProof::read_binary(&mut buf.as_slice()).unwrap(), p);
        assert!(RefutationProof::read_binary(&mut &b"nope!"[..]).is_err());
    }
}

//! Chain compression of refutations and the proof-structure count.
//!
//! A resolvent is ephemeral when exactly one later step uses it and that
//! step comes immediately after it. Maximal runs of steps linked by
//! ephemeral resolvents form a chain; only the last resolvent of each chain
//! is stored. The uncompressed schedule is the special case where every
//! chain has length one.

use num_bigint::BigUint;

use crate::cnf::Clause;
use crate::error::DomainError;

use super::proof::{RefutationProof, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operand {
    /// Memory cell: input clause `i < num_inputs`, or stored resolvent
    /// `num_inputs + j` produced by chain `j`.
    Cell(usize),
    /// The resolvent of the previous step in the same chain.
    Prev,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainStep {
    pub left: Operand,
    pub right: Operand,
    pub resolvent: Clause,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub steps: Vec<ChainStep>,
}

impl Chain {
    pub fn stored(&self) -> &Clause {
        &self.steps.last().expect("chains are nonempty").resolvent
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedProof {
    pub num_inputs: usize,
    pub chains: Vec<Chain>,
}

impl CompressedProof {
    /// `R'`, the number of stored resolvents.
    pub fn num_stored(&self) -> usize {
        self.chains.len()
    }

    /// Total resolution steps over all chains.
    pub fn num_steps(&self) -> usize {
        self.chains.iter().map(|c| c.steps.len()).sum()
    }

    /// `n_res_j` for each chain.
    pub fn chain_lengths(&self) -> Vec<usize> {
        self.chains.iter().map(|c| c.steps.len()).collect()
    }

    pub fn max_width(&self) -> usize {
        self.chains.iter().flat_map(|c| &c.steps).map(|s| s.resolvent.len()).max().unwrap_or(0)
    }

    /// Replay as a flat refutation over the same inputs.
    pub fn expand(&self) -> RefutationProof {
        let n = self.num_inputs;
        let mut cell_pid: Vec<usize> = (0..n).collect();
        let mut steps: Vec<Step> = Vec::new();
        for chain in &self.chains {
            let mut prev = None;
            for s in &chain.steps {
                let pid = |o: Operand| match o {
                    Operand::Cell(c) => cell_pid[c],
                    Operand::Prev => prev.expect("Prev only after the first step"),
                };
                steps.push(Step { left: pid(s.left), right: pid(s.right), resolvent: s.resolvent.clone() });
                prev = Some(n + steps.len() - 1);
            }
            cell_pid.push(prev.expect("nonempty chain"));
        }
        RefutationProof { num_inputs: n, steps }
    }
}

fn schedule(p: &RefutationProof, ephemeral: &[bool]) -> CompressedProof {
    let n = p.num_inputs;
    let mut cell_of = vec![usize::MAX; p.steps.len()];
    let mut chains = Vec::new();
    let mut cur: Vec<ChainStep> = Vec::new();
    for (k, s) in p.steps.iter().enumerate() {
        let op = |a: usize| {
            if a < n {
                Operand::Cell(a)
            } else if k > 0 && a - n == k - 1 && ephemeral[k - 1] {
                Operand::Prev
            } else {
                Operand::Cell(cell_of[a - n])
            }
        };
        cur.push(ChainStep { left: op(s.left), right: op(s.right), resolvent: s.resolvent.clone() });
        if !ephemeral[k] {
            cell_of[k] = n + chains.len();
            chains.push(Chain { steps: std::mem::take(&mut cur) });
        }
    }
    CompressedProof { num_inputs: n, chains }
}

/// Merge single-use intermediates into their consumer's chain.
pub fn compress(p: &RefutationProof) -> CompressedProof {
    let n = p.num_inputs;
    let r = p.steps.len();
    let mut uses = vec![0usize; r];
    let mut used_by_next = vec![false; r];
    for (k, s) in p.steps.iter().enumerate() {
        for a in [s.left, s.right] {
            if a >= n {
                uses[a - n] += 1;
                if a - n + 1 == k {
                    used_by_next[a - n] = true;
                }
            }
        }
    }
    let ephemeral: Vec<bool> =
        (0..r).map(|k| k + 1 < r && uses[k] == 1 && used_by_next[k]).collect();
    schedule(p, &ephemeral)
}

/// Every resolvent stored: one chain per step.
pub fn uncompressed(p: &RefutationProof) -> CompressedProof {
    schedule(p, &vec![false; p.steps.len()])
}

/// Lower bound on the number of proof structures consistent with the chain
/// lengths `n_res`.
pub fn count_structures(n_res: &[usize]) -> Result<BigUint, DomainError> {
    if n_res.is_empty() {
        return Err(DomainError::Empty("chain length list"));
    }
    if n_res.contains(&0) {
        return Err(DomainError::Invalid("chain lengths must be at least 1".into()));
    }
    let last = n_res.len() - 1;
    let n: Vec<u64> = n_res
        .iter()
        .enumerate()
        .map(|(j, &r)| match (r, j == last) {
            (1, _) => 1,
            (r, false) => r as u64 - 1,
            (r, true) => r as u64,
        })
        .collect();
    // suffix sums: factor i (1-based, i < R') is Σ_{j > i} n_j
    let mut total = BigUint::from(1u32);
    let mut suffix = 0u64;
    for i in (1..n.len()).rev() {
        suffix += n[i];
        total *= suffix;
    }
    Ok(total)
}

pub fn factorial(k: usize) -> BigUint {
    (1..=k as u64).fold(BigUint::from(1u32), |acc, x| acc * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{CnfFormula, Lit};
    use crate::sat::proof::validate_refutation;
    use proptest::prelude::*;

    fn cl(v: &[i64]) -> Clause {
        Clause::new(v.iter().map(|x| Lit::from_dimacs(*x).unwrap()).collect()).unwrap()
    }

    #[test]
    fn worked_example_is_210() {
        assert_eq!(count_structures(&[1, 1, 2, 5]).unwrap(), BigUint::from(210u32));
        assert!(BigUint::from(210u32) > factorial(3));
    }

    #[test]
    fn single_chain_is_one() {
        assert_eq!(count_structures(&[17]).unwrap(), BigUint::from(1u32));
    }

    #[test]
    fn all_unit_chains_give_factorial() {
        for k in 1..10 {
            assert_eq!(count_structures(&vec![1; k]).unwrap(), factorial(k - 1));
        }
    }

    #[test]
    fn empty_is_error() {
        assert!(count_structures(&[]).is_err());
    }

    // Linear proof: (1 2 3)(¬1)(¬2)(¬3), each resolvent feeds the next step.
    #[test]
    fn linear_proof_is_one_chain() {
        let mut f = CnfFormula::new(3);
        for c in [&[1, 2, 3][..], &[-1], &[-2], &[-3]] {
            f.push(cl(c));
        }
        let p = RefutationProof {
            num_inputs: 4,
            steps: vec![
                Step { left: 0, right: 1, resolvent: cl(&[2, 3]) },
                Step { left: 4, right: 2, resolvent: cl(&[3]) },
                Step { left: 5, right: 3, resolvent: Clause::empty() },
            ],
        };
        assert_eq!(validate_refutation(&f, &p), Ok(()));
        let c = compress(&p);
        assert_eq!(c.num_stored(), 1);
        assert_eq!(c.chain_lengths(), vec![3]);
        assert_eq!(c.expand(), p);
    }

    // (1 2)(1 ¬2)(¬1 3)(¬1 ¬3): the resolvent (1) is used twice.
    #[test]
    fn shared_resolvent_is_stored() {
        let mut f = CnfFormula::new(3);
        for c in [&[1, 2][..], &[1, -2], &[-1, 3], &[-1, -3]] {
            f.push(cl(c));
        }
        let p = RefutationProof {
            num_inputs: 4,
            steps: vec![
                Step { left: 0, right: 1, resolvent: cl(&[1]) },
                Step { left: 4, right: 2, resolvent: cl(&[3]) },
                Step { left: 4, right: 3, resolvent: cl(&[-3]) },
                Step { left: 5, right: 6, resolvent: Clause::empty() },
            ],
        };
        assert_eq!(validate_refutation(&f, &p), Ok(()));
        let c = compress(&p);
        // (1) is used twice, (3) is used by a non-adjacent step, (¬3) feeds ⊥
        assert_eq!(c.chain_lengths(), vec![1, 1, 2]);
        assert_eq!(c.chains[2].steps[1].left, Operand::Cell(5));
        assert_eq!(c.chains[2].steps[1].right, Operand::Prev);
        let e = c.expand();
        assert_eq!(validate_refutation(&f, &e), Ok(()));
    }

    #[test]
    fn uncompressed_is_identity_schedule() {
        let mut f = CnfFormula::new(1);
        f.push(cl(&[1]));
        f.push(cl(&[-1]));
        let p = RefutationProof {
            num_inputs: 2,
            steps: vec![Step { left: 0, right: 1, resolvent: Clause::empty() }],
        };
        let u = uncompressed(&p);
        assert_eq!(u.num_stored(), 1);
        assert_eq!(u.expand(), p);
    }

    proptest! {
        #[test]
        fn count_bounds(n_res in proptest::collection::vec(1usize..12, 1..12), bump in 0usize..12) {
            let n = count_structures(&n_res).unwrap();
            prop_assert!(n >= factorial(n_res.len() - 1));
            let j = bump % n_res.len();
            let mut more = n_res.clone();
            more[j] += 1;
            prop_assert!(count_structures(&more).unwrap() >= n);
        }
    }
}

use crate::cnf::{Clause, CnfFormula, Lit, Var};

use super::{Circuit, GateKind};

/// Hands out variables in order and remembers a name for each.
#[derive(Clone, Debug, Default)]
pub struct VarAlloc {
    names: Vec<String>,
}

impl VarAlloc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, name: impl Into<String>) -> Var {
        self.names.push(name.into());
        (self.names.len() - 1) as Var
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn into_names(self) -> Vec<String> {
        self.names
    }
}

fn cl(lits: &[Lit]) -> Clause {
    Clause::new(lits.to_vec()).expect("template clauses are tautology-free over distinct variables")
}

/// Canonical clause template for `out = kind(ins)`. Inputs and output must be
/// distinct variables.
pub fn gate_clauses(kind: GateKind, out: Var, ins: &[Var]) -> Vec<Clause> {
    let c = Lit::pos(out);
    let a = Lit::pos(ins[0]);
    match kind {
        GateKind::Not => vec![cl(&[a, c]), cl(&[!a, !c])],
        GateKind::Buf => vec![cl(&[!a, c]), cl(&[a, !c])],
        _ => {
            let b = Lit::pos(ins[1]);
            match kind {
                GateKind::And => vec![cl(&[a, !c]), cl(&[b, !c]), cl(&[!a, !b, c])],
                GateKind::Or => vec![cl(&[!a, c]), cl(&[!b, c]), cl(&[a, b, !c])],
                GateKind::Nand => vec![cl(&[a, c]), cl(&[b, c]), cl(&[!a, !b, !c])],
                GateKind::Nor => vec![cl(&[!a, !c]), cl(&[!b, !c]), cl(&[a, b, c])],
                GateKind::Xor => vec![
                    cl(&[!a, !b, !c]),
                    cl(&[a, b, !c]),
                    cl(&[a, !b, c]),
                    cl(&[!a, b, c]),
                ],
                GateKind::Xnor => vec![
                    cl(&[!a, !b, c]),
                    cl(&[a, b, c]),
                    cl(&[a, !b, !c]),
                    cl(&[!a, b, !c]),
                ],
                GateKind::Not | GateKind::Buf => unreachable!(),
            }
        }
    }
}

pub fn template_size(kind: GateKind) -> usize {
    match kind {
        GateKind::Not | GateKind::Buf => 2,
        GateKind::Xor | GateKind::Xnor => 4,
        _ => 3,
    }
}

/// Encode gates in order. Nets already bound in `net_vars` keep their
/// variable; every other gate output gets a fresh one named `prefix + net`.
pub(crate) fn tseitin_into(
    c: &Circuit,
    alloc: &mut VarAlloc,
    net_vars: &mut [Option<Var>],
    prefix: &str,
    out: &mut CnfFormula,
) {
    for g in &c.gates {
        let v = *net_vars[g.out].get_or_insert_with(|| alloc.fresh(format!("{prefix}{}", c.nets[g.out])));
        let ins: Vec<Var> = g
            .ins
            .iter()
            .map(|n| net_vars[*n].expect("topological order binds inputs first"))
            .collect();
        for clause in gate_clauses(g.kind, v, &ins) {
            out.push(clause);
        }
    }
    out.num_vars = out.num_vars.max(alloc.len() as u32);
}

/// Standalone Tseitin encoding: inputs get variables first, then gate
/// outputs in gate order. Returns the formula and the net-to-variable map.
pub fn tseitin(c: &Circuit, alloc: &mut VarAlloc) -> (CnfFormula, Vec<Var>) {
    let mut net_vars: Vec<Option<Var>> = vec![None; c.nets.len()];
    for i in &c.inputs {
        net_vars[*i] = Some(alloc.fresh(c.nets[*i].clone()));
    }
    let mut f = CnfFormula::new(0);
    tseitin_into(c, alloc, &mut net_vars, "", &mut f);
    let map = net_vars.into_iter().map(|v| v.expect("validated circuits drive every net")).collect();
    (f, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_netlist;
    use crate::sat::{solve, SolveResult};

    #[test]
    fn and_template_literal_for_literal() {
        let c = parse_netlist("and", "input a\ninput b\noutput c\ngate AND c a b").unwrap();
        let (f, map) = tseitin(&c, &mut VarAlloc::new());
        let (a, b, cc) = (Lit::pos(map[0]), Lit::pos(map[1]), Lit::pos(map[2]));
        assert_eq!(f.clauses[0].lits(), &[a, !cc]);
        assert_eq!(f.clauses[1].lits(), &[b, !cc]);
        assert_eq!(f.clauses[2].lits(), &[!a, !b, cc]);
        assert_eq!(f.len(), 3);
    }

    #[test]
    fn not_template() {
        let clauses = gate_clauses(GateKind::Not, 1, &[0]);
        assert_eq!(clauses[0].lits(), &[Lit::pos(0), Lit::pos(1)]);
        assert_eq!(clauses[1].lits(), &[Lit::neg(0), Lit::neg(1)]);
    }

    // Every template, under every input pattern, must force exactly the gate's
    // output value: the clause set satisfied iff c = kind(a, b).
    #[test]
    fn templates_define_gate_function() {
        for kind in GateKind::ALL {
            let clauses = gate_clauses(kind, 2, &[0, 1][..kind.arity()]);
            assert_eq!(clauses.len(), template_size(kind));
            for pat in 0..8u8 {
                let asg = [pat & 1 == 1, pat & 2 == 2, pat & 4 == 4];
                let expect = kind.eval_word(asg[0] as u64, asg[1] as u64) & 1 == 1;
                let sat = clauses.iter().all(|c| c.satisfied_by(&asg));
                assert_eq!(sat, asg[2] == expect, "{kind} pattern {pat:03b}");
            }
        }
    }

    #[test]
    fn clause_count_is_sum_of_templates() {
        let text = "input a\ninput b\noutput y\ngate XOR t a b\ngate NAND u t a\ngate NOT y u";
        let c = parse_netlist("x", text).unwrap();
        let (f, _) = tseitin(&c, &mut VarAlloc::new());
        let expect: usize = c.gates.iter().map(|g| template_size(g.kind)).sum();
        assert_eq!(f.len(), expect);
    }

    // For each input pattern the encoding restricted to it is satisfiable and
    // every satisfying assignment agrees with simulation on the outputs.
    #[test]
    fn equisatisfiable_with_simulation() {
        let text = "input a\ninput b\ninput c\noutput y\noutput z\n\
                    gate XOR t a b\ngate AND u t c\ngate NOR y u a\ngate XNOR z t c";
        let c = parse_netlist("x", text).unwrap();
        let (f, map) = tseitin(&c, &mut VarAlloc::new());
        for pat in 0..8u32 {
            let ins: Vec<bool> = (0..3).map(|i| pat >> i & 1 == 1).collect();
            let outs = c.simulate(&ins);
            let mut g = f.clone();
            for (i, n) in c.inputs.iter().enumerate() {
                g.push(Clause::new(vec![Lit::new(map[*n], !ins[i])]).unwrap());
            }
            let SolveResult::Sat(asg) = solve(&g, 100_000).unwrap() else { panic!("unsat") };
            for (k, o) in c.outputs.iter().enumerate() {
                assert_eq!(asg[map[*o] as usize], outs[k]);
                // forcing the opposite output value is contradictory
                let mut h = g.clone();
                h.push(Clause::new(vec![Lit::new(map[*o], outs[k])]).unwrap());
                assert!(matches!(solve(&h, 100_000).unwrap(), SolveResult::Unsat(_)));
            }
        }
    }
}

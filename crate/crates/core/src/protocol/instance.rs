//! What each party knows before the protocol starts.

use std::collections::HashSet;

use crate::circuit::{build_miter, build_public_part, Circuit, VarClass};
use crate::cnf::{CnfFormula, Var};
use crate::error::{Result, StructureError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Equivalence of a private implementation against a public
    /// specification.
    Cec,
    /// A public property of a private system formula.
    Blueprint,
}

impl Mode {
    pub fn to_byte(self) -> u8 {
        match self {
            Mode::Cec => 0,
            Mode::Blueprint => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Mode::Cec),
            1 => Some(Mode::Blueprint),
            _ => None,
        }
    }
}

/// The verifier's input: the public clauses, the named public variables
/// and the interface they share with the secret clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicInstance {
    pub mode: Mode,
    pub phi_pub: CnfFormula,
    /// Public variables with their agreed names, ascending.
    pub vars: Vec<(Var, String)>,
    /// Interface variables, ascending. A subset of `vars`.
    pub io: Vec<Var>,
}

impl PublicInstance {
    /// Specification-side miter half.
    pub fn cec(spec: &Circuit) -> Self {
        let part = build_public_part(spec);
        let vars = part.alloc.names().iter().enumerate().map(|(v, n)| (v as Var, n.clone())).collect();
        let mut io = part.io_vars();
        io.sort_unstable();
        Self { mode: Mode::Cec, phi_pub: part.phi_pub, vars, io }
    }

    /// A property over the variables it mentions, named `x<v+1>`.
    pub fn blueprint(phi_prop: CnfFormula, interface: &[Var]) -> Result<Self> {
        let used = phi_prop.used_vars();
        let mut io = interface.to_vec();
        io.sort_unstable();
        io.dedup();
        if let Some(v) = io.iter().find(|v| used.binary_search(v).is_err()) {
            return Err(StructureError(format!("interface variable x{} does not occur in the property", v + 1)).into());
        }
        let vars = used.iter().map(|v| (*v, format!("x{}", v + 1))).collect();
        Ok(Self { mode: Mode::Blueprint, phi_pub: phi_prop, vars, io })
    }

    /// Public variables outside the interface.
    pub fn private_vars(&self) -> Vec<Var> {
        let io: HashSet<Var> = self.io.iter().copied().collect();
        self.vars.iter().map(|(v, _)| *v).filter(|v| !io.contains(v)).collect()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|(_, n)| n.as_str())
    }
}

/// The prover's input: the public part plus the secret clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub public: PublicInstance,
    pub phi_sec: CnfFormula,
    pub num_vars: usize,
}

impl Instance {
    pub fn cec(spec: &Circuit, imp: &Circuit) -> Result<Self> {
        let m = build_miter(spec, imp)?;
        let public = PublicInstance::cec(spec);
        debug_assert_eq!(public.phi_pub.clauses, m.phi_pub.clauses);
        Ok(Self { num_vars: m.num_vars(), public, phi_sec: m.phi_sec })
    }

    /// Property `phi_prop` of the secret system `phi_sys`. Variables the two
    /// share must lie in `interface`.
    pub fn blueprint(phi_prop: CnfFormula, phi_sys: CnfFormula, interface: &[Var]) -> Result<Self> {
        let public = PublicInstance::blueprint(phi_prop, interface)?;
        let io: HashSet<Var> = public.io.iter().copied().collect();
        let sys_vars = phi_sys.used_vars();
        for (v, _) in &public.vars {
            if sys_vars.binary_search(v).is_ok() && !io.contains(v) {
                return Err(StructureError(format!("x{} is shared but not in the interface", v + 1)).into());
            }
        }
        let num_vars = public.phi_pub.num_vars.max(phi_sys.num_vars) as usize;
        Ok(Self { public, phi_sec: phi_sys, num_vars })
    }

    pub fn classes(&self) -> Vec<VarClass> {
        let mut c = vec![VarClass::Secret; self.num_vars];
        for (v, _) in &self.public.vars {
            c[*v as usize] = VarClass::Public;
        }
        for v in &self.public.io {
            c[*v as usize] = VarClass::Io;
        }
        c
    }

    /// `phi_sec ∥ phi_pub`: the memory layout for commitments and proofs.
    pub fn combined(&self) -> CnfFormula {
        let mut f = CnfFormula::new(self.num_vars as u32);
        f.clauses.extend(self.phi_sec.clauses.iter().cloned());
        f.clauses.extend(self.public.phi_pub.clauses.iter().cloned());
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_netlist;
    use crate::cnf::{Clause, Lit};

    fn and_pair() -> (Circuit, Circuit) {
        let spec = parse_netlist("spec", "input a\ninput b\noutput c\ngate AND c a b\n").unwrap();
        let imp = parse_netlist("impl", "input a\ninput b\noutput c\ngate NAND n a b\ngate NOT c n\n").unwrap();
        (spec, imp)
    }

    #[test]
    fn cec_classes_match_miter() {
        let (s, i) = and_pair();
        let inst = Instance::cec(&s, &i).unwrap();
        let m = build_miter(&s, &i).unwrap();
        assert_eq!(inst.classes(), m.classes);
        assert_eq!(inst.combined().clauses, m.combined().clauses);
        assert_eq!(inst.public.vars.len(), m.num_public_vars);
        assert!(inst.public.names().any(|n| n == "in:a"));
    }

    #[test]
    fn blueprint_checks_interface() {
        let cl = |v: &[i64]| Clause::new(v.iter().map(|x| Lit::from_dimacs(*x).unwrap()).collect()).unwrap();
        let mut prop = CnfFormula::new(3);
        prop.push(cl(&[3]));
        prop.push(cl(&[-1]));
        let mut sys = CnfFormula::new(3);
        sys.push(cl(&[-3, 1]));
        sys.push(cl(&[-3, 2]));
        sys.push(cl(&[3, -1, -2]));
        let inst = Instance::blueprint(prop.clone(), sys.clone(), &[0, 2]).unwrap();
        assert_eq!(inst.classes(), vec![VarClass::Io, VarClass::Secret, VarClass::Io]);
        assert!(inst.public.private_vars().is_empty());
        assert!(Instance::blueprint(prop.clone(), sys.clone(), &[0]).is_err());
        assert!(Instance::blueprint(prop, sys, &[0, 1, 2]).is_err());
    }
}

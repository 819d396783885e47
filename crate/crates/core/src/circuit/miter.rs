//! Miter construction and the public/secret clause partition.
//!
//! Variable layout, in allocation order:
//!
//! 1. `in:<name>` for each shared input, in specification input order
//! 2. `spec:<net>` for each specification gate output, in gate order
//! 3. `cmp:<k>` for each output comparator
//! 4. `or:<k>` for each node of the left-leaning OR tree
//! 5. `impl_out:<k>` for each implementation output position
//! 6. `impl:<net>` for implementation internals
//!
//! Groups 1 to 5 depend only on the specification, so both parties can
//! rebuild them.

use crate::cnf::{Clause, CnfFormula, Lit, Var};
use crate::error::StructureError;

use super::tseitin::{gate_clauses, tseitin_into, VarAlloc};
use super::{Circuit, GateKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarClass {
    /// Specification internals and miter glue.
    Public,
    /// Shared inputs and implementation outputs.
    Io,
    /// Implementation internals.
    Secret,
}

/// The specification-only half of a miter.
#[derive(Clone, Debug)]
pub struct PublicPart {
    pub alloc: VarAlloc,
    pub phi_pub: CnfFormula,
    pub input_vars: Vec<Var>,
    pub impl_out_vars: Vec<Var>,
    pub out_var: Var,
}

impl PublicPart {
    /// `vars_io`: shared inputs followed by implementation outputs.
    pub fn io_vars(&self) -> Vec<Var> {
        self.input_vars.iter().chain(&self.impl_out_vars).copied().collect()
    }
}

#[derive(Clone, Debug)]
pub struct MiterBundle {
    pub phi_pub: CnfFormula,
    pub phi_sec: CnfFormula,
    pub vars_io: Vec<Var>,
    pub vars_sec: Vec<Var>,
    pub out_var: Var,
    /// One name per variable.
    pub names: Vec<String>,
    pub classes: Vec<VarClass>,
    /// Variables `0..num_public_vars` are known to the verifier.
    pub num_public_vars: usize,
}

impl MiterBundle {
    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    /// `phi_sec ∥ phi_pub`, the clause order used for commitment and proofs.
    pub fn combined(&self) -> CnfFormula {
        let mut f = CnfFormula::new(self.num_vars() as u32);
        f.clauses.extend(self.phi_sec.clauses.iter().cloned());
        f.clauses.extend(self.phi_pub.clauses.iter().cloned());
        f
    }
}

pub fn build_public_part(spec: &Circuit) -> PublicPart {
    let mut alloc = VarAlloc::new();
    let mut net_vars: Vec<Option<Var>> = vec![None; spec.nets.len()];
    let mut input_vars = Vec::with_capacity(spec.inputs.len());
    for i in &spec.inputs {
        let v = alloc.fresh(format!("in:{}", spec.nets[*i]));
        net_vars[*i] = Some(v);
        input_vars.push(v);
    }
    let mut phi_pub = CnfFormula::new(0);
    tseitin_into(spec, &mut alloc, &mut net_vars, "spec:", &mut phi_pub);

    let m = spec.outputs.len();
    let cmp: Vec<Var> = (0..m).map(|k| alloc.fresh(format!("cmp:{k}"))).collect();
    let ors: Vec<Var> = (0..m.saturating_sub(1)).map(|k| alloc.fresh(format!("or:{k}"))).collect();
    let impl_out_vars: Vec<Var> = (0..m).map(|k| alloc.fresh(format!("impl_out:{k}"))).collect();

    for k in 0..m {
        let s = net_vars[spec.outputs[k]].expect("outputs are driven");
        for c in gate_clauses(GateKind::Xor, cmp[k], &[s, impl_out_vars[k]]) {
            phi_pub.push(c);
        }
    }
    for k in 0..ors.len() {
        let left = if k == 0 { cmp[0] } else { ors[k - 1] };
        for c in gate_clauses(GateKind::Or, ors[k], &[left, cmp[k + 1]]) {
            phi_pub.push(c);
        }
    }
    let out_var = ors.last().copied().unwrap_or(cmp[0]);
    phi_pub.push(Clause::new(vec![Lit::pos(out_var)]).expect("unit clause"));
    phi_pub.num_vars = alloc.len() as u32;
    PublicPart { alloc, phi_pub, input_vars, impl_out_vars, out_var }
}

pub fn build_miter(spec: &Circuit, imp: &Circuit) -> Result<MiterBundle, StructureError> {
    if spec.inputs.len() != imp.inputs.len() {
        return Err(StructureError(format!(
            "input count mismatch: spec has {}, impl has {}",
            spec.inputs.len(),
            imp.inputs.len()
        )));
    }
    if spec.outputs.len() != imp.outputs.len() {
        return Err(StructureError(format!(
            "output count mismatch: spec has {}, impl has {}",
            spec.outputs.len(),
            imp.outputs.len()
        )));
    }
    let PublicPart { mut alloc, phi_pub, input_vars, impl_out_vars, out_var } =
        build_public_part(spec);
    let num_public_vars = alloc.len();

    let mut net_vars: Vec<Option<Var>> = vec![None; imp.nets.len()];
    for (pos, n) in imp.inputs.iter().enumerate() {
        net_vars[*n] = Some(input_vars[pos]);
    }
    let mut fixups = Vec::new();
    for (k, n) in imp.outputs.iter().enumerate() {
        match net_vars[*n] {
            None => net_vars[*n] = Some(impl_out_vars[k]),
            Some(_) => fixups.push((k, *n)),
        }
    }
    let mut phi_sec = CnfFormula::new(0);
    tseitin_into(imp, &mut alloc, &mut net_vars, "impl:", &mut phi_sec);
    for (k, n) in fixups {
        let src = net_vars[n].expect("bound");
        for c in gate_clauses(GateKind::Buf, impl_out_vars[k], &[src]) {
            phi_sec.push(c);
        }
    }

    let total = alloc.len();
    let mut classes = vec![VarClass::Public; total];
    for v in input_vars.iter().chain(&impl_out_vars) {
        classes[*v as usize] = VarClass::Io;
    }
    for c in classes.iter_mut().skip(num_public_vars) {
        *c = VarClass::Secret;
    }
    let vars_io: Vec<Var> = input_vars.iter().chain(&impl_out_vars).copied().collect();
    let vars_sec: Vec<Var> = (num_public_vars as Var..total as Var).collect();

    let mut phi_pub = phi_pub;
    phi_pub.num_vars = total as u32;
    phi_sec.num_vars = total as u32;

    let bundle = MiterBundle {
        phi_pub,
        phi_sec,
        vars_io,
        vars_sec,
        out_var,
        names: alloc.into_names(),
        classes,
        num_public_vars,
    };
    debug_assert!(shared_vars_are_io(&bundle));
    Ok(bundle)
}

/// `vars(phi_pub) ∩ vars(phi_sec) ⊆ vars_io`.
pub(crate) fn shared_vars_are_io(m: &MiterBundle) -> bool {
    let pub_vars = m.phi_pub.used_vars();
    m.phi_sec
        .used_vars()
        .into_iter()
        .filter(|v| pub_vars.binary_search(v).is_ok())
        .all(|v| m.classes[v as usize] == VarClass::Io)
}

//! Phase scripts shared by prover and verifier. Prover-only inputs are
//! `Some` on the prover and `None` on the verifier.

use std::collections::HashSet;

use crate::cnf::Clause;
use crate::encoding::{encode_clause, EncodingContext, CONST_LIT};
use crate::error::{CheckKind, Error, Phase, Result};
use crate::field::{powers, FieldElem};
use crate::poly::{poly_from_roots, Poly};
use crate::zk::clause::{clause_isfalse, commit_polys, eval, res_constraints, res_witness, CPoly, ResEvals};
use crate::zk::rom::{read_constraints, read_cost, selector_entries, selector_witness, selector_size};
use crate::zk::{Backend, Share, Tag};

use super::instance::PublicInstance;
use super::plan::{P2Witness, StepWitness};
use super::statement::{decode_index_map, encode_index_map, PublicCodes, Statement};

fn encode_all(ctx: &EncodingContext, cs: &[Clause], w: usize) -> Result<Vec<Poly>> {
    cs.iter().map(|c| Ok(encode_clause(ctx, c, w)?)).collect()
}

/// Commit the secret clauses.
pub fn commit_secret<B: Backend>(
    b: &mut B,
    st: &Statement,
    prover: Option<(&EncodingContext, &[Clause])>,
) -> Result<Vec<CPoly<B::S>>> {
    b.set_phase(Phase::Commit);
    let polys = prover.map(|(ctx, cs)| encode_all(ctx, cs, st.w)).transpose()?;
    commit_polys(b, polys.as_deref(), st.n_sec, st.w)
}

/// Prover input to P1.
#[derive(Clone, Copy)]
pub struct P1Prover<'a> {
    pub ctx: &'a EncodingContext,
    pub committed_pub: &'a [Clause],
    pub index: &'a [(String, u64)],
}

/// Commit the public clauses, agree on public indices and open the
/// commitments against the verifier's own encoding.
pub fn p1<B: Backend>(
    b: &mut B,
    st: &Statement,
    public: &PublicInstance,
    prover: Option<P1Prover<'_>>,
) -> Result<(Vec<CPoly<B::S>>, PublicCodes)> {
    b.set_phase(Phase::P1);
    let w = st.w;
    let polys = prover.map(|p| encode_all(p.ctx, p.committed_pub, w)).transpose()?;
    let count = prover.map_or(public.phi_pub.len(), |p| p.committed_pub.len());
    let shares = commit_polys(b, polys.as_deref(), count, w)?;
    let (codes, expected) = match prover {
        Some(p) => {
            b.session().send(Tag::IndexMap, encode_index_map(p.index))?;
            let idx = public.vars.iter().map(|(v, _)| (*v, p.ctx.index().get(*v))).collect();
            (PublicCodes::new(idx), vec![FieldElem::ZERO; count * (w + 1)])
        }
        None => {
            let payload = b.session().recv(Tag::IndexMap)?;
            let codes = decode_index_map(&payload, public).map_err(|e| b.session().abort(CheckKind::IndexMap, e))?;
            let mut expected = Vec::with_capacity(count * (w + 1));
            for c in &public.phi_pub.clauses {
                let roots: Vec<FieldElem> = c.lits().iter().map(|l| codes.code(*l).expect("public literal")).collect();
                expected.extend_from_slice(poly_from_roots(&roots, w)?.coeffs());
            }
            (codes, expected)
        }
    };
    b.open_eq(&shares.concat(), &expected, CheckKind::Open)?;
    b.checkpoint()?;
    Ok((shares, codes))
}

/// Committed values in one step, in order: per read the selector and the
/// read clause, then the resolvent unless it is stored, then the pivot and
/// the two weakening witnesses.
fn step_cost(first: bool, last: bool, size: usize, w: usize) -> usize {
    let reads = if first { 2 } else { 1 };
    reads * read_cost(size, w) + if last { 0 } else { w + 1 } + 1 + 2 * (w + 1)
}

fn step_values(ctx: &EncodingContext, s: &StepWitness, size: usize, last: bool, w: usize, out: &mut Vec<FieldElem>) -> Result<()> {
    for r in &s.reads {
        out.extend(selector_witness(r.addr, size));
        out.extend_from_slice(encode_clause(ctx, &r.value, w)?.coeffs());
    }
    if !last {
        out.extend_from_slice(encode_clause(ctx, &s.cr, w)?.coeffs());
    }
    let rw = res_witness(ctx, &s.c0, &s.c1, &s.cr, w);
    out.push(rw.pivot);
    out.extend_from_slice(rw.w0.coeffs());
    out.extend_from_slice(rw.w1.coeffs());
    Ok(())
}

/// Prove the refutation: every step is a resolution of clauses read from
/// memory or carried from the previous step, and the last stored resolvent
/// is empty. `cells` holds the committed inputs on entry and gains the
/// stored resolvents.
pub fn p2<B: Backend>(
    b: &mut B,
    st: &Statement,
    batch_steps: usize,
    cells: &mut Vec<CPoly<B::S>>,
    prover: Option<(&EncodingContext, &P2Witness)>,
) -> Result<()> {
    b.set_phase(Phase::P2);
    let w = st.w;
    let n = cells.len();
    let stored_polys = prover.map(|(ctx, p2)| encode_all(ctx, &p2.stored, w)).transpose()?;
    cells.extend(commit_polys(b, stored_polys.as_deref(), st.num_stored(), w)?);

    let schedule: Vec<(usize, usize)> =
        st.chains.iter().enumerate().flat_map(|(j, len)| (0..*len).map(move |t| (j, t))).collect();
    let mut prev: Option<CPoly<B::S>> = None;
    for batch in schedule.chunks(batch_steps) {
        let count: usize =
            batch.iter().map(|&(j, t)| step_cost(t == 0, t + 1 == st.chains[j], n + j, w)).sum();
        let vals = match prover {
            Some((ctx, p2)) => {
                let mut v = Vec::with_capacity(count);
                for &(j, t) in batch {
                    step_values(ctx, &p2.chains[j][t], n + j, t + 1 == st.chains[j], w, &mut v)?;
                }
                Some(v)
            }
            None => None,
        };
        let flat = b.commit(vals.as_deref(), count)?;
        let ch = b.challenge(2)?;
        let (alpha, chi) = (ch[0], ch[1]);
        b.fold(chi);
        let pw = powers(alpha, w + 1);
        let top = n + batch.last().expect("nonempty batch").0;
        let cell_ev: Vec<B::S> = cells[..top].iter().map(|c| eval(c, &pw)).collect();

        let mut rest = &flat[..];
        let mut take = |k: usize| {
            let (a, r) = rest.split_at(k);
            rest = r;
            a
        };
        for &(j, t) in batch {
            let size = n + j;
            let last = t + 1 == st.chains[j];
            let mut read = |b: &mut B| -> B::S {
                let sel = take(selector_size(size));
                let d = take(w + 1);
                let e = selector_entries(b, sel, size);
                let d_ev = eval(d, &pw);
                read_constraints(b, &e, &cell_ev[..size], d_ev);
                d_ev
            };
            let (c0, c1) = if t == 0 {
                let a = read(b);
                (a, read(b))
            } else {
                let p = eval(prev.as_ref().expect("chain continues"), &pw);
                (p, read(b))
            };
            let cr_poly: CPoly<B::S> = if last { cells[n + j].clone() } else { take(w + 1).to_vec() };
            let pivot = take(1)[0];
            let w0 = eval(take(w + 1), &pw);
            let w1 = eval(take(w + 1), &pw);
            let cr = eval(&cr_poly, &pw);
            res_constraints(b, alpha, &ResEvals { c0, c1, cr, pivot, w0, w1 });
            prev = if last { None } else { Some(cr_poly) };
        }
        debug_assert!(rest.is_empty());
    }
    clause_isfalse(b, cells.last().expect("at least one stored resolvent"))?;
    b.finish(CheckKind::Res)?;
    b.checkpoint()
}

fn exchange<B: Backend>(b: &mut B, tag: Tag, mine: Option<&[FieldElem]>, n: usize) -> Result<Vec<FieldElem>> {
    match mine {
        Some(v) => {
            b.session().send_elems(tag, v)?;
            Ok(v.to_vec())
        }
        None => b.session().recv_elems(tag, n),
    }
}

/// Prove the secret clauses are satisfiable: the announced true literals
/// are consistent, and each secret clause vanishes at one of them.
pub fn p3<B: Backend>(b: &mut B, st: &Statement, sec: &[CPoly<B::S>], codes: Option<&[FieldElem]>) -> Result<()> {
    b.set_phase(Phase::P3);
    let codes = exchange(b, Tag::AssignCodes, codes, st.m)?;
    if !b.is_prover() {
        let set: HashSet<u128> = codes.iter().map(|c| c.0).collect();
        if let Some(c) = codes.iter().find(|c| set.contains(&(**c + CONST_LIT).0)) {
            return Err(b.session().abort(CheckKind::Complement, format!("literal code {:#x} appears in both polarities", c.0)));
        }
    }
    let pws: Vec<Vec<FieldElem>> = codes.iter().map(|c| powers(*c, st.w + 1)).collect();
    let evals: Vec<Vec<B::S>> = sec.iter().map(|p| pws.iter().map(|pw| eval(p, pw)).collect()).collect();
    let per = st.m.saturating_sub(2);
    let vals = b.is_prover().then(|| {
        let mut v = Vec::with_capacity(sec.len() * per);
        for e in &evals {
            let mut acc = e[0].value().expect("prover share");
            for x in &e[1..=per] {
                acc *= x.value().expect("prover share");
                v.push(acc);
            }
        }
        v
    });
    let prods = b.commit(vals.as_deref(), sec.len() * per)?;
    let chi = b.challenge(1)?[0];
    b.fold(chi);
    let zero = B::S::ZERO;
    for (i, e) in evals.iter().enumerate() {
        match st.m {
            0 => {}
            1 => b.quad(&[], e[0]),
            _ => {
                let ps = &prods[i * per..(i + 1) * per];
                let mut acc = e[0];
                for (x, p) in e[1..=per].iter().zip(ps) {
                    b.quad(&[(acc, *x)], *p);
                    acc = *p;
                }
                b.quad(&[(acc, e[st.m - 1])], zero);
            }
        }
    }
    b.finish(CheckKind::Mul)?;
    b.checkpoint()
}

/// Prove no secret clause mentions a public literal outside the
/// interface: each secret clause is invertible at every such code.
pub fn p4<B: Backend>(b: &mut B, sec: &[CPoly<B::S>], private_codes: &[FieldElem], w: usize) -> Result<()> {
    b.set_phase(Phase::P4);
    let pws: Vec<Vec<FieldElem>> = private_codes.iter().map(|c| powers(*c, w + 1)).collect();
    let evals: Vec<B::S> = sec.iter().flat_map(|p| pws.iter().map(move |pw| eval(p, pw))).collect();
    let vals = b.is_prover().then(|| {
        evals.iter().map(|e| e.value().expect("prover share").inv().unwrap_or(FieldElem::ZERO)).collect::<Vec<_>>()
    });
    let inv = b.commit(vals.as_deref(), evals.len())?;
    let chi = b.challenge(1)?[0];
    b.fold(chi);
    let one = b.constant(FieldElem::ONE);
    for (e, i) in evals.iter().zip(&inv) {
        b.quad(&[(*e, *i)], one);
    }
    b.finish(CheckKind::Mul)?;
    b.checkpoint()
}

/// Codes of both polarities of every public variable outside the
/// interface, in variable order.
pub fn private_codes(public: &PublicInstance, codes: &PublicCodes) -> Result<Vec<FieldElem>> {
    let mut out = Vec::new();
    for v in public.private_vars() {
        for l in [crate::cnf::Lit::pos(v), crate::cnf::Lit::neg(v)] {
            out.push(codes.code(l).ok_or_else(|| Error::Witness(format!("no index for public variable {v}")))?);
        }
    }
    Ok(out)
}

//! Committed clause polynomials and the checks built on them.

use crate::cnf::{Clause, Lit};
use crate::encoding::{encode_clause, EncodingContext, CONST_LIT};
use crate::error::{CheckKind, Result, WidthError};
use crate::field::{powers, FieldElem};
use crate::poly::{poly_from_roots, Poly};

use super::backend::{Backend, Share};

/// Coefficient commitments of one polynomial, low degree first.
pub type CPoly<S> = Vec<S>;

pub fn eval<S: Share>(p: &[S], pw: &[FieldElem]) -> S {
    S::eval(p, pw)
}

/// Commit `count` polynomials of width `w` in one message.
pub fn commit_polys<B: Backend>(b: &mut B, polys: Option<&[Poly]>, count: usize, w: usize) -> Result<Vec<CPoly<B::S>>> {
    let vals: Option<Vec<FieldElem>> = polys.map(|ps| {
        ps.iter()
            .flat_map(|p| {
                debug_assert_eq!(p.len(), w + 1);
                p.coeffs().iter().copied()
            })
            .collect()
    });
    let flat = b.commit(vals.as_deref(), count * (w + 1))?;
    Ok(flat.chunks(w + 1).map(|c| c.to_vec()).collect())
}

/// Encode and commit one clause.
pub fn clause_input<B: Backend>(
    b: &mut B,
    ctx: Option<&EncodingContext>,
    c: Option<&Clause>,
    w: usize,
) -> Result<CPoly<B::S>> {
    let poly = match (ctx, c) {
        (Some(ctx), Some(c)) => Some(encode_clause(ctx, c, w)?),
        _ => None,
    };
    Ok(commit_polys(b, poly.as_ref().map(std::slice::from_ref), 1, w)?.pop().expect("one"))
}

/// Check a committed clause is ⊥.
pub fn clause_isfalse<B: Backend>(b: &mut B, c: &[B::S]) -> Result<()> {
    let mut bot = vec![FieldElem::ZERO; c.len()];
    bot[0] = FieldElem::ONE;
    b.open_eq(c, &bot, CheckKind::IsFalse)
}

/// Plaintext inputs to one resolution check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResWitness {
    pub pivot: FieldElem,
    pub w0: Poly,
    pub w1: Poly,
}

/// Pivot code and weakening witnesses for `c0, c1 ⊢ cr`. The pivot is the
/// clashing literal as it occurs in `c0`. Inputs that are not a resolution
/// step still yield a witness of the right shape, which then fails the
/// identity check.
pub fn res_witness(ctx: &EncodingContext, c0: &Clause, c1: &Clause, cr: &Clause, w: usize) -> ResWitness {
    let piv = c0
        .lits()
        .iter()
        .copied()
        .find(|l| c1.contains(!*l))
        .or_else(|| c0.lits().first().copied())
        .unwrap_or_else(|| Lit::pos(0));
    let witness = |c: &Clause, extra: Lit| -> Poly {
        let mut roots: Vec<FieldElem> = cr
            .lits()
            .iter()
            .chain(std::iter::once(&extra))
            .filter(|l| !c.contains(**l))
            .map(|l| ctx.code(*l))
            .collect();
        roots.truncate(w);
        poly_from_roots(&roots, w).expect("truncated to width")
    };
    let pivot = ctx.code(piv);
    ResWitness { pivot, w0: witness(c0, piv), w1: witness(c1, !piv) }
}

/// Evaluations at `alpha` of the operands of one resolution step.
#[derive(Clone, Copy, Debug)]
pub struct ResEvals<S> {
    pub c0: S,
    pub c1: S,
    pub cr: S,
    pub pivot: S,
    pub w0: S,
    pub w1: S,
}

/// `w0·c0 = cr·(x + p)` and `w1·c1 = cr·(x + p + CONST_LIT)` at `x = alpha`.
pub fn res_constraints<B: Backend>(b: &mut B, alpha: FieldElem, e: &ResEvals<B::S>) {
    b.quad(&[(e.w0, e.c0), (e.cr, e.pivot)], e.cr * alpha);
    b.quad(&[(e.w1, e.c1), (e.cr, e.pivot)], e.cr * (alpha + CONST_LIT));
}

/// Standalone resolution check over already committed clauses.
#[allow(clippy::too_many_arguments)]
pub fn clause_res<B: Backend>(
    b: &mut B,
    c0: &[B::S],
    c1: &[B::S],
    cr: &[B::S],
    pivot: B::S,
    w0: &[B::S],
    w1: &[B::S],
) -> Result<()> {
    let ch = b.challenge(2)?;
    let (alpha, chi) = (ch[0], ch[1]);
    b.fold(chi);
    let pw = powers(alpha, cr.len());
    let e = ResEvals {
        c0: eval(c0, &pw),
        c1: eval(c1, &pw),
        cr: eval(cr, &pw),
        pivot,
        w0: eval(w0, &pw),
        w1: eval(w1, &pw),
    };
    res_constraints(b, alpha, &e);
    b.finish(CheckKind::Res)
}

/// Product-of-polynomials identity `Π lhs = Π rhs` at a random point.
pub fn pop_idt<B: Backend>(b: &mut B, lhs: &[CPoly<B::S>], rhs: &[CPoly<B::S>]) -> Result<()> {
    let alpha = b.challenge(1)?[0];
    let len = lhs.iter().chain(rhs).map(|p| p.len()).max().unwrap_or(1);
    let pw = powers(alpha, len);
    let le: Vec<B::S> = lhs.iter().map(|p| eval(p, &pw)).collect();
    let re: Vec<B::S> = rhs.iter().map(|p| eval(p, &pw)).collect();
    let partial = |ev: &[B::S]| -> Option<Vec<FieldElem>> {
        let mut acc = ev.first()?.value()?;
        let mut out = Vec::new();
        for e in &ev[1..] {
            acc *= e.value()?;
            out.push(acc);
        }
        Some(out)
    };
    let nl = le.len().saturating_sub(1);
    let nr = re.len().saturating_sub(1);
    let vals = if b.is_prover() {
        let mut v = partial(&le).unwrap_or_default();
        v.extend(partial(&re).unwrap_or_default());
        Some(v)
    } else {
        None
    };
    let prods = b.commit(vals.as_deref(), nl + nr)?;
    let chi = b.challenge(1)?[0];
    b.fold(chi);
    let chain = |b: &mut B, ev: &[B::S], ps: &[B::S]| -> B::S {
        let Some(first) = ev.first() else { return b.constant(FieldElem::ONE) };
        let mut acc = *first;
        for (e, p) in ev[1..].iter().zip(ps) {
            b.quad(&[(acc, *e)], *p);
            acc = *p;
        }
        acc
    };
    let l = chain(b, &le, &prods[..nl]);
    let r = chain(b, &re, &prods[nl..]);
    b.quad(&[], l + r);
    b.finish(CheckKind::PoPIdt)
}

/// Public `x + c` as a committed polynomial of the given width.
pub fn linear_factor<B: Backend>(b: &B, root: B::S, w: usize) -> CPoly<B::S> {
    let mut p = vec![B::S::ZERO; w + 1];
    p[0] = root;
    if w >= 1 {
        p[1] = b.constant(FieldElem::ONE);
    }
    p
}

pub fn check_width(c: &Clause, w: usize) -> Result<(), WidthError> {
    if c.len() > w {
        return Err(WidthError { got: c.len(), max: w });
    }
    Ok(())
}

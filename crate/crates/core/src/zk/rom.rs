//! Hidden-index reads from a committed read-only memory.
//!
//! The address is committed as 24 bits, most significant first. A tensor
//! expansion of the bits yields a one-hot selector over the first `size`
//! cells: at level `l` the entries are indexed by `l`-bit prefixes, and each
//! kept parent entry `e` splits into `e·b` and `e + e·b`, with one committed
//! product per parent. Prefixes that cannot lead below `size` are pruned,
//! so an address `>= size` selects nothing and fails the sum check.
//!
//! For a read of value `d` at challenge `alpha` the constraints are
//! `b·b = b` for every bit, `e·b = t` for every product,
//! `Σ e_i·cell_i(alpha) = d(alpha)` and `Σ e_i = 1`.

use crate::field::FieldElem;

use super::backend::{Backend, Share};

pub const ADDR_BITS: usize = 24;
pub const MAX_CELLS: usize = 1 << ADDR_BITS;

/// Number of prefixes of length `level` that can lead to an address below
/// `size`.
fn bound(size: usize, level: usize) -> usize {
    size.div_ceil(1 << (ADDR_BITS - level))
}

/// Committed values per selector: bits plus one product per kept parent.
pub fn selector_size(size: usize) -> usize {
    ADDR_BITS + (1..ADDR_BITS).map(|k| size.div_ceil(1 << k)).sum::<usize>()
}

/// Committed values per read of a `w`-wide clause from `size` cells.
pub fn read_cost(size: usize, w: usize) -> usize {
    selector_size(size) + w + 1
}

/// Prover values for a selector of `addr`: bits first, then products in
/// level order.
pub fn selector_witness(addr: usize, size: usize) -> Vec<FieldElem> {
    let bit = |j: usize| (addr >> (ADDR_BITS - 1 - j)) & 1;
    let mut out: Vec<FieldElem> = (0..ADDR_BITS).map(|j| FieldElem(bit(j) as u128)).collect();
    for level in 2..=ADDR_BITS {
        let b = bit(level - 1);
        let prefix = addr >> (ADDR_BITS - (level - 1));
        for h in 0..bound(size, level - 1) {
            out.push(FieldElem((h == prefix && b == 1) as u128));
        }
    }
    debug_assert_eq!(out.len(), selector_size(size));
    out
}

/// Expand committed selector values into `size` one-hot entries, adding
/// the bit and product constraints. Call after `fold`.
pub fn selector_entries<B: Backend>(b: &mut B, sel: &[B::S], size: usize) -> Vec<B::S> {
    debug_assert_eq!(sel.len(), selector_size(size));
    let (bits, prods) = sel.split_at(ADDR_BITS);
    for x in bits {
        b.quad(&[(*x, *x)], *x);
    }
    let one = b.constant(FieldElem::ONE);
    let mut level: Vec<B::S> = [one + bits[0], bits[0]].into_iter().take(bound(size, 1)).collect();
    let mut next_prod = 0;
    for l in 2..=ADDR_BITS {
        let bit = bits[l - 1];
        let keep = bound(size, l);
        let mut nxt = Vec::with_capacity(keep);
        for e in &level {
            let t = prods[next_prod];
            next_prod += 1;
            b.quad(&[(*e, bit)], t);
            for child in [*e + t, t] {
                if nxt.len() < keep {
                    nxt.push(child);
                }
            }
        }
        level = nxt;
    }
    debug_assert_eq!(next_prod, prods.len());
    level
}

/// `Σ e_i·cells_i = d` and `Σ e_i = 1`, on evaluations.
pub fn read_constraints<B: Backend>(b: &mut B, e: &[B::S], cells: &[B::S], d: B::S) {
    b.quad_dot(e, &cells[..e.len()], d);
    let one = b.constant(FieldElem::ONE);
    b.quad(&[], B::S::sum(e) + one);
}

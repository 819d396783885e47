//! Literal codes and clause polynomials.
//!
//! Every variable gets an index in `1..2^64`. A positive public literal is
//! encoded as its index; a positive secret literal as a keyed hash of its
//! index, truncated to 120 bits. Negation adds `CONST_LIT = 2^64`, so
//! `code(l) + code(!l) = CONST_LIT` for every literal. A clause is the
//! polynomial whose roots are the codes of its literals, zero-padded to a
//! global width.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use blake2::digest::consts::U16;
use blake2::digest::{KeyInit, Mac};
use blake2::Blake2bMac;
use rand::RngCore;

use crate::circuit::{MiterBundle, VarClass};
use crate::cnf::{Clause, Lit, Var};
use crate::error::{Error, ScaleError, WidthError};
use crate::field::FieldElem;
use crate::poly::{poly_from_roots, Poly};

pub const W_LIT: u32 = 64;
pub const CONST_LIT: FieldElem = FieldElem(1u128 << W_LIT);
pub const HASH_BITS: u32 = 120;
pub const MAX_KEY_ATTEMPTS: usize = 16;

pub type HashKey = [u8; 32];

/// Keyed pseudorandom function from indices to field elements.
pub trait CodeHasher: Send + Sync {
    /// Stable identifier bound into the session configuration.
    fn id(&self) -> &'static str;
    fn hash(&self, key: &HashKey, idx: u64) -> FieldElem;
}

/// BLAKE2b in keyed mode with a 16-byte tag, truncated to 120 bits.
#[derive(Clone, Copy, Debug, Default)]
pub struct Blake2Hasher;

impl CodeHasher for Blake2Hasher {
    fn id(&self) -> &'static str {
        "blake2b-mac128-t120"
    }

    fn hash(&self, key: &HashKey, idx: u64) -> FieldElem {
        let mut mac = <Blake2bMac<U16> as KeyInit>::new_from_slice(key).expect("32-byte keys are valid");
        mac.update(&idx.to_le_bytes());
        let tag: [u8; 16] = mac.finalize().into_bytes().into();
        FieldElem(u128::from_le_bytes(tag) & ((1u128 << HASH_BITS) - 1))
    }
}

/// Variable indices, one per variable, `idx[v] ∈ 1..2^64`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexMap {
    idx: Vec<u64>,
}

impl IndexMap {
    /// Identity layout `idx(v) = v + 1`.
    pub fn sequential(num_vars: usize) -> Result<Self, ScaleError> {
        if num_vars as u128 >= u64::MAX as u128 {
            return Err(ScaleError(format!("{num_vars} variables exceed the 64-bit index space")));
        }
        Ok(Self { idx: (1..=num_vars as u64).collect() })
    }

    /// Build from explicit indices, checking range and injectivity.
    pub fn from_indices(idx: Vec<u128>) -> Result<Self, String> {
        let mut seen = HashSet::with_capacity(idx.len());
        let mut out = Vec::with_capacity(idx.len());
        for (v, i) in idx.into_iter().enumerate() {
            if i == 0 || i >> W_LIT != 0 {
                return Err(format!("index {i} of variable {v} is outside 1..2^64"));
            }
            if !seen.insert(i) {
                return Err(format!("index {i} assigned twice"));
            }
            out.push(i as u64);
        }
        Ok(Self { idx: out })
    }

    pub fn get(&self, v: Var) -> u64 {
        self.idx[v as usize]
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.idx
    }

    /// `(name, index)` pairs for the first `n` variables, sorted by index.
    pub fn named_prefix(&self, names: &[String], n: usize) -> Vec<(String, u64)> {
        let mut v: Vec<(String, u64)> = (0..n).map(|i| (names[i].clone(), self.idx[i])).collect();
        v.sort_by_key(|(_, i)| *i);
        v
    }
}

/// Canonical indices for a miter: the variable layout already places shared
/// inputs, specification internals, comparator glue, implementation outputs
/// and implementation internals in that order.
pub fn assign_indices(m: &MiterBundle) -> Result<IndexMap, ScaleError> {
    IndexMap::sequential(m.num_vars())
}

#[derive(Clone)]
pub struct EncodingContext {
    index: IndexMap,
    classes: Vec<VarClass>,
    key: Option<HashKey>,
    hasher: Arc<dyn CodeHasher>,
    /// Code of the positive literal of each variable; `None` for secret
    /// variables when no key is held.
    pos: Vec<Option<FieldElem>>,
    attempts: usize,
}

impl fmt::Debug for EncodingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EncodingContext")
            .field("num_vars", &self.index.len())
            .field("hasher", &self.hasher.id())
            .field("has_key", &self.key.is_some())
            .finish()
    }
}

impl EncodingContext {
    /// Keyless context: only non-secret literals can be encoded.
    pub fn public(index: IndexMap, classes: Vec<VarClass>) -> Self {
        let pos = index
            .as_slice()
            .iter()
            .zip(&classes)
            .map(|(i, c)| (*c != VarClass::Secret).then_some(FieldElem(*i as u128)))
            .collect();
        Self { index, classes, key: None, hasher: Arc::new(Blake2Hasher), pos, attempts: 0 }
    }

    pub fn with_key(
        index: IndexMap,
        classes: Vec<VarClass>,
        hasher: Arc<dyn CodeHasher>,
        key: HashKey,
    ) -> Self {
        let pos = index
            .as_slice()
            .iter()
            .zip(&classes)
            .map(|(i, c)| {
                Some(match c {
                    VarClass::Secret => hasher.hash(&key, *i),
                    _ => FieldElem(*i as u128),
                })
            })
            .collect();
        Self { index, classes, key: Some(key), hasher, pos, attempts: 0 }
    }

    pub fn index(&self) -> &IndexMap {
        &self.index
    }

    pub fn classes(&self) -> &[VarClass] {
        &self.classes
    }

    pub fn class(&self, v: Var) -> VarClass {
        self.classes[v as usize]
    }

    pub fn key(&self) -> Option<&HashKey> {
        self.key.as_ref()
    }

    pub fn hasher_id(&self) -> &'static str {
        self.hasher.id()
    }

    /// Number of keys sampled by [`setup_key`] before a collision-free one.
    pub fn attempts(&self) -> usize {
        self.attempts
    }

    pub fn num_vars(&self) -> usize {
        self.pos.len()
    }

    pub fn try_code(&self, l: Lit) -> Option<FieldElem> {
        let p = (*self.pos.get(l.var() as usize)?)?;
        Some(if l.is_neg() { p + CONST_LIT } else { p })
    }

    /// Code of `l`. Panics if `l` is secret and the context holds no key.
    pub fn code(&self, l: Lit) -> FieldElem {
        self.try_code(l).unwrap_or_else(|| panic!("no code for literal {l:?}"))
    }

    /// Whether every literal code, both polarities, is distinct.
    pub fn collision_free(&self) -> bool {
        let mut seen = HashSet::with_capacity(2 * self.pos.len());
        self.pos.iter().flatten().all(|p| seen.insert(p.0) && seen.insert((*p + CONST_LIT).0))
    }
}

/// Sample hash keys until every literal code is distinct.
pub fn setup_key<R: RngCore + ?Sized>(
    index: IndexMap,
    classes: Vec<VarClass>,
    hasher: Arc<dyn CodeHasher>,
    rng: &mut R,
) -> Result<EncodingContext, Error> {
    for attempt in 1..=MAX_KEY_ATTEMPTS {
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        let mut ctx = EncodingContext::with_key(index.clone(), classes.clone(), hasher.clone(), key);
        if ctx.collision_free() {
            ctx.attempts = attempt;
            return Ok(ctx);
        }
    }
    Err(Error::Collision(MAX_KEY_ATTEMPTS))
}

pub fn encode_literal(ctx: &EncodingContext, l: Lit) -> FieldElem {
    ctx.code(l)
}

/// Root-form polynomial of `c`, padded to `w + 1` coefficients.
pub fn encode_clause(ctx: &EncodingContext, c: &Clause, w: usize) -> Result<Poly, WidthError> {
    let roots: Vec<FieldElem> = c.lits().iter().map(|l| ctx.code(*l)).collect();
    poly_from_roots(&roots, w)
}

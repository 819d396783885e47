//! The opening statement, the public index map message and the
//! correlation budget both parties derive from them.

use std::collections::{HashMap, HashSet};

use crate::cnf::{Lit, Var};
use crate::encoding::CONST_LIT;
use crate::field::FieldElem;
use crate::zk::rom::{read_cost, MAX_CELLS};

use super::config::PROTOCOL_VERSION;
use super::instance::{Mode, PublicInstance};

/// Upper bound on the padded clause width.
pub const MAX_WIDTH: usize = 1 << 12;
/// Upper bound on secret clauses, assignment size and proof steps.
pub const MAX_COUNT: usize = 1 << 24;

/// Sizes the prover announces before committing. These are exactly the
/// quantities the protocol reveals about the secret side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statement {
    pub version: u8,
    pub mode: Mode,
    pub config: [u8; 32],
    /// `|Φ_sec|`.
    pub n_sec: usize,
    /// Padded clause width.
    pub w: usize,
    /// Number of variables in the secret clauses.
    pub m: usize,
    /// Steps per stored resolvent.
    pub chains: Vec<usize>,
}

fn put_u32(out: &mut Vec<u8>, x: usize) {
    out.extend_from_slice(&(x as u32).to_le_bytes());
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], String> {
        if self.0.len() < n {
            return Err("truncated".into());
        }
        let (a, b) = self.0.split_at(n);
        self.0 = b;
        Ok(a)
    }

    fn u8(&mut self) -> Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<usize, String> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")) as usize)
    }

    fn u32(&mut self) -> Result<usize, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn u128(&mut self) -> Result<u128, String> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().expect("16 bytes")))
    }

    fn done(&self) -> Result<(), String> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(format!("{} trailing bytes", self.0.len()))
        }
    }
}

impl Statement {
    pub fn num_stored(&self) -> usize {
        self.chains.len()
    }

    pub fn num_steps(&self) -> usize {
        self.chains.iter().sum()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![self.version, self.mode.to_byte()];
        out.extend_from_slice(&self.config);
        put_u32(&mut out, self.n_sec);
        put_u32(&mut out, self.w);
        put_u32(&mut out, self.m);
        put_u32(&mut out, self.chains.len());
        for c in &self.chains {
            put_u32(&mut out, *c);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, String> {
        let mut r = Reader(bytes);
        let version = r.u8()?;
        let mode = Mode::from_byte(r.u8()?).ok_or("unknown mode")?;
        let config = r.take(32)?.try_into().expect("32 bytes");
        let n_sec = r.u32()?;
        let w = r.u32()?;
        let m = r.u32()?;
        let k = r.u32()?;
        if k > MAX_COUNT || k * 4 > r.0.len() {
            return Err("chain count exceeds payload".into());
        }
        let chains = (0..k).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
        r.done()?;
        Ok(Self { version, mode, config, n_sec, w, m, chains })
    }

    /// Verifier-side sanity checks against its own view.
    pub fn validate(&self, config: &[u8; 32], compress: bool, public: &PublicInstance) -> Result<(), String> {
        if self.version != PROTOCOL_VERSION {
            return Err(format!("version {} unsupported", self.version));
        }
        if self.mode != public.mode {
            return Err("mode mismatch".into());
        }
        if &self.config != config {
            return Err("configuration digest mismatch".into());
        }
        if self.w == 0 || self.w > MAX_WIDTH {
            return Err(format!("width {} out of range", self.w));
        }
        if self.w < public.phi_pub.max_width() {
            return Err(format!("width {} below public clause width {}", self.w, public.phi_pub.max_width()));
        }
        if self.n_sec > MAX_COUNT || self.m > MAX_COUNT || self.num_steps() > MAX_COUNT {
            return Err("size out of range".into());
        }
        if self.n_sec > 0 && self.m == 0 {
            return Err("secret clauses without variables".into());
        }
        if self.chains.is_empty() || self.chains.contains(&0) {
            return Err("empty refutation or chain".into());
        }
        if !compress && self.chains.iter().any(|c| *c != 1) {
            return Err("chains present while compression is off".into());
        }
        if self.n_sec + public.phi_pub.len() + self.num_stored() > MAX_CELLS {
            return Err("memory exceeds addressable cells".into());
        }
        Ok(())
    }
}

/// Correlations consumed per phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct TapeBudget {
    pub commit: u64,
    pub p1: u64,
    pub p2: u64,
    pub p3: u64,
    pub p4: u64,
}

impl TapeBudget {
    pub fn new(st: &Statement, n_pub: usize, n_private_vars: usize) -> Self {
        let w1 = st.w as u64 + 1;
        let n = st.n_sec + n_pub;
        let mut p2 = st.num_stored() as u64 * w1 + 1;
        for (j, len) in st.chains.iter().enumerate() {
            let len = *len as u64;
            let rc = read_cost(n + j, st.w) as u64;
            p2 = p2
                .saturating_add((len + 1).saturating_mul(rc))
                .saturating_add((len - 1) * w1)
                .saturating_add(len * (1 + 2 * w1));
        }
        Self {
            commit: st.n_sec as u64 * w1,
            p1: n_pub as u64 * w1,
            p2,
            p3: st.n_sec as u64 * st.m.saturating_sub(2) as u64 + 1,
            p4: st.n_sec as u64 * 2 * n_private_vars as u64 + 1,
        }
    }

    pub fn total(&self) -> u64 {
        [self.commit, self.p1, self.p2, self.p3, self.p4].iter().fold(0u64, |a, b| a.saturating_add(*b))
    }
}

/// Public variable indices as agreed in P1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PublicCodes {
    idx: HashMap<Var, u64>,
}

impl PublicCodes {
    pub fn new(idx: HashMap<Var, u64>) -> Self {
        Self { idx }
    }

    pub fn code(&self, l: Lit) -> Option<FieldElem> {
        let p = FieldElem(*self.idx.get(&l.var())? as u128);
        Some(if l.is_neg() { p + CONST_LIT } else { p })
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }
}

/// `(name, index)` pairs, sorted by index.
pub fn encode_index_map(entries: &[(String, u64)]) -> Vec<u8> {
    let mut out = Vec::new();
    put_u32(&mut out, entries.len());
    for (name, idx) in entries {
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(*idx as u128).to_le_bytes());
    }
    out
}

/// Parse and check an index map against the public variable names: every
/// name exactly once, indices in `[1, 2^64)` and pairwise distinct.
pub fn decode_index_map(bytes: &[u8], public: &PublicInstance) -> Result<PublicCodes, String> {
    let mut r = Reader(bytes);
    let n = r.u32()?;
    if n != public.vars.len() {
        return Err(format!("{n} entries for {} public variables", public.vars.len()));
    }
    let by_name: HashMap<&str, Var> = public.vars.iter().map(|(v, s)| (s.as_str(), *v)).collect();
    let mut idx = HashMap::with_capacity(n);
    let mut seen = HashSet::with_capacity(n);
    for _ in 0..n {
        let len = r.u16()?;
        let name = std::str::from_utf8(r.take(len)?).map_err(|_| "name is not utf-8")?.to_string();
        let i = r.u128()?;
        let v = *by_name.get(name.as_str()).ok_or_else(|| format!("unknown variable {name:?}"))?;
        if i == 0 || i >> 64 != 0 {
            return Err(format!("index of {name} out of range"));
        }
        if !seen.insert(i) {
            return Err(format!("index {i} repeated"));
        }
        if idx.insert(v, i as u64).is_some() {
            return Err(format!("variable {name} listed twice"));
        }
    }
    r.done()?;
    Ok(PublicCodes { idx })
}

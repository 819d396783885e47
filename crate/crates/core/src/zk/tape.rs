//! Trusted-dealer VOLE correlations.
//!
//! The dealer samples a global key `Δ` and, per entry, a random value `r`
//! and verifier key `k`. The prover receives `(r, m)` with `m = k + r·Δ`;
//! the verifier receives `Δ` and the keys. Tapes are produced lazily from a
//! seed or loaded from files written by [`write_tapes`].

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::field::FieldElem;

const MAGIC: &[u8; 4] = b"ZKCT";
const VERSION: u8 = 1;
const ROLE_PROVER: u8 = 0;
const ROLE_VERIFIER: u8 = 1;

/// Deterministic correlation stream shared by both halves of a seeded tape.
#[derive(Clone, Debug)]
struct Stream {
    rng: ChaCha20Rng,
    delta: FieldElem,
}

impl Stream {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let delta = FieldElem::random_nonzero(&mut rng);
        Self { rng, delta }
    }

    /// Next `(r, k)`.
    fn next(&mut self) -> (FieldElem, FieldElem) {
        let r = FieldElem::random(&mut self.rng);
        let k = FieldElem::random(&mut self.rng);
        (r, k)
    }
}

#[derive(Clone, Debug)]
enum ProverSource {
    Seeded(Box<Stream>),
    Loaded(Vec<(FieldElem, FieldElem)>),
}

#[derive(Clone, Debug)]
pub struct ProverTape {
    src: ProverSource,
    capacity: u64,
    used: u64,
}

impl ProverTape {
    pub fn seeded(seed: u64, capacity: u64) -> Self {
        Self { src: ProverSource::Seeded(Box::new(Stream::new(seed))), capacity, used: 0 }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.capacity - self.used
    }

    /// Fail early if fewer than `need` entries remain.
    pub fn reserve(&self, need: u64) -> Result<()> {
        if need > self.remaining() {
            return Err(Error::TapeExhausted { need, have: self.remaining() });
        }
        Ok(())
    }

    /// Next `(r, m_r)`.
    pub fn take(&mut self) -> Result<(FieldElem, FieldElem)> {
        self.reserve(1)?;
        let i = self.used as usize;
        self.used += 1;
        Ok(match &mut self.src {
            ProverSource::Seeded(s) => {
                let (r, k) = s.next();
                (r, k + r * s.delta)
            }
            ProverSource::Loaded(v) => v[i],
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (role, body) = read_file(path)?;
        if role != ROLE_PROVER {
            return Err(Error::Transport(format!("{} is not a prover tape", path.display())));
        }
        let v: Vec<_> = body.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        Ok(Self { capacity: v.len() as u64, src: ProverSource::Loaded(v), used: 0 })
    }
}

#[derive(Clone, Debug)]
enum VerifierSource {
    Seeded(Box<Stream>),
    Loaded(Vec<FieldElem>),
}

#[derive(Clone, Debug)]
pub struct VerifierTape {
    src: VerifierSource,
    delta: FieldElem,
    capacity: u64,
    used: u64,
}

impl VerifierTape {
    pub fn seeded(seed: u64, capacity: u64) -> Self {
        let s = Stream::new(seed);
        Self { delta: s.delta, src: VerifierSource::Seeded(Box::new(s)), capacity, used: 0 }
    }

    pub fn delta(&self) -> FieldElem {
        self.delta
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.capacity - self.used
    }

    pub fn reserve(&self, need: u64) -> Result<()> {
        if need > self.remaining() {
            return Err(Error::TapeExhausted { need, have: self.remaining() });
        }
        Ok(())
    }

    /// Next key `k_r`.
    pub fn take(&mut self) -> Result<FieldElem> {
        self.reserve(1)?;
        let i = self.used as usize;
        self.used += 1;
        Ok(match &mut self.src {
            VerifierSource::Seeded(s) => s.next().1,
            VerifierSource::Loaded(v) => v[i],
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (role, body) = read_file(path)?;
        if role != ROLE_VERIFIER {
            return Err(Error::Transport(format!("{} is not a verifier tape", path.display())));
        }
        let (delta, keys) = body
            .split_first()
            .ok_or_else(|| Error::Transport(format!("{}: missing Δ", path.display())))?;
        Ok(Self {
            delta: *delta,
            capacity: keys.len() as u64,
            src: VerifierSource::Loaded(keys.to_vec()),
            used: 0,
        })
    }
}

/// Matching seeded tapes for both roles.
pub fn dealer_gen(seed: u64, count: u64) -> (ProverTape, VerifierTape) {
    (ProverTape::seeded(seed, count), VerifierTape::seeded(seed, count))
}

/// Write `count` correlations to a prover file and a verifier file.
pub fn write_tapes(seed: u64, count: u64, prover: &Path, verifier: &Path) -> Result<()> {
    let mut s = Stream::new(seed);
    let mut pw = BufWriter::new(File::create(prover)?);
    let mut vw = BufWriter::new(File::create(verifier)?);
    write_header(&mut pw, ROLE_PROVER, count * 2)?;
    write_header(&mut vw, ROLE_VERIFIER, count + 1)?;
    vw.write_all(&s.delta.to_le_bytes())?;
    for _ in 0..count {
        let (r, k) = s.next();
        pw.write_all(&r.to_le_bytes())?;
        pw.write_all(&(k + r * s.delta).to_le_bytes())?;
        vw.write_all(&k.to_le_bytes())?;
    }
    pw.flush()?;
    vw.flush()?;
    Ok(())
}

fn write_header(w: &mut impl Write, role: u8, elems: u64) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION, role])?;
    w.write_all(&elems.to_le_bytes())?;
    Ok(())
}

fn read_file(path: &Path) -> Result<(u8, Vec<FieldElem>)> {
    let bad = |m: &str| Error::Transport(format!("{}: {m}", path.display()));
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; 14];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    if head[4] != VERSION {
        return Err(bad("unsupported version"));
    }
    let role = head[5];
    let n = u64::from_le_bytes(head[6..14].try_into().expect("8 bytes"));
    let mut out = Vec::with_capacity(n.min(1 << 24) as usize);
    let mut buf = [0u8; 16];
    for _ in 0..n {
        r.read_exact(&mut buf).map_err(|_| bad("truncated"))?;
        out.push(FieldElem::from_le_bytes(buf));
    }
    Ok((role, out))
}

//! IT-MAC commitments over dealer correlations, with batched degree-2
//! checks.
//!
//! The prover holds `(x, m)` and the verifier holds `k` with
//! `m = k + x·Δ`. Linear combinations are local. A degree-2 constraint
//! `Σ x_j·y_j + z = 0` is checked without revealing anything: the prover
//! accumulates the two low coefficients of `Σ k_x·k_y + k_z·Δ` viewed as a
//! polynomial in `Δ`, the verifier accumulates its value, and one masked
//! pair per phase settles all constraints at once.

use std::ops::{Add, AddAssign, Mul};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{CheckKind, Error, Phase, Result};
use crate::field::{FieldElem, Wide};

use super::channel::{Session, Tag};
use super::tape::{ProverTape, VerifierTape};

/// One party's half of a commitment.
pub trait Share:
    Copy + Send + Sync + std::fmt::Debug + Add<Output = Self> + AddAssign + Mul<FieldElem, Output = Self> + 'static
{
    const ZERO: Self;

    /// The committed value, known only to the prover.
    fn value(&self) -> Option<FieldElem>;

    /// `Σ coeffs[i]·powers[i]`.
    fn eval(coeffs: &[Self], powers: &[FieldElem]) -> Self;

    fn sum(xs: &[Self]) -> Self {
        xs.iter().fold(Self::ZERO, |a, b| a + *b)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PShare {
    pub x: FieldElem,
    pub m: FieldElem,
}

impl Add for PShare {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { x: self.x + o.x, m: self.m + o.m }
    }
}

impl AddAssign for PShare {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Mul<FieldElem> for PShare {
    type Output = Self;
    fn mul(self, c: FieldElem) -> Self {
        Self { x: self.x * c, m: self.m * c }
    }
}

impl Share for PShare {
    const ZERO: Self = PShare { x: FieldElem::ZERO, m: FieldElem::ZERO };

    fn value(&self) -> Option<FieldElem> {
        Some(self.x)
    }

    fn eval(coeffs: &[Self], powers: &[FieldElem]) -> Self {
        let (mut x, mut m) = (Wide::default(), Wide::default());
        for (c, p) in coeffs.iter().zip(powers) {
            x.mac(c.x, *p);
            m.mac(c.m, *p);
        }
        Self { x: x.reduce(), m: m.reduce() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VShare(pub FieldElem);

impl Add for VShare {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(self.0 + o.0)
    }
}

impl AddAssign for VShare {
    fn add_assign(&mut self, o: Self) {
        self.0 += o.0;
    }
}

impl Mul<FieldElem> for VShare {
    type Output = Self;
    fn mul(self, c: FieldElem) -> Self {
        Self(self.0 * c)
    }
}

impl Share for VShare {
    const ZERO: Self = VShare(FieldElem::ZERO);

    fn value(&self) -> Option<FieldElem> {
        None
    }

    fn eval(coeffs: &[Self], powers: &[FieldElem]) -> Self {
        let mut k = Wide::default();
        for (c, p) in coeffs.iter().zip(powers) {
            k.mac(c.0, *p);
        }
        Self(k.reduce())
    }
}

/// The operations both roles run in lockstep. Protocol code is written once
/// against this trait; prover-only inputs are passed as `Option`s that are
/// `None` on the verifier.
pub trait Backend {
    type S: Share;

    fn is_prover(&self) -> bool;
    fn session(&mut self) -> &mut Session;

    fn set_phase(&mut self, p: Phase) {
        self.session().set_phase(p);
    }

    /// Commit `n` values. The prover must supply them; the verifier passes
    /// `None`.
    fn commit(&mut self, vals: Option<&[FieldElem]>, n: usize) -> Result<Vec<Self::S>>;

    /// A commitment to a public constant.
    fn constant(&self, c: FieldElem) -> Self::S;

    /// Open `s` and check it equals the publicly known `expected`.
    fn open_eq(&mut self, s: &[Self::S], expected: &[FieldElem], kind: CheckKind) -> Result<()>;

    /// Verifier-sampled public randomness.
    fn challenge(&mut self, n: usize) -> Result<Vec<FieldElem>>;

    /// Start a new batch of constraints weighted by powers of `chi`.
    fn fold(&mut self, chi: FieldElem);

    /// Add the constraint `Σ terms[j].0 · terms[j].1 + lin = 0`.
    fn quad(&mut self, terms: &[(Self::S, Self::S)], lin: Self::S);

    /// Add the constraint `Σ xs[j]·ys[j] + lin = 0`.
    fn quad_dot(&mut self, xs: &[Self::S], ys: &[Self::S], lin: Self::S);

    /// Settle every constraint added since the last `finish`.
    fn finish(&mut self, kind: CheckKind) -> Result<()>;

    /// Compare transcripts.
    fn checkpoint(&mut self) -> Result<()>;

    fn tape_used(&self) -> u64;
}

pub struct ProverBackend {
    pub sess: Session,
    tape: ProverTape,
    acc0: FieldElem,
    acc1: FieldElem,
    chi: FieldElem,
    weight: FieldElem,
    violations: u64,
    /// Corrupt the next opened tag.
    pub tamper_open: bool,
}

impl ProverBackend {
    pub fn new(sess: Session, tape: ProverTape) -> Self {
        Self {
            sess,
            tape,
            acc0: FieldElem::ZERO,
            acc1: FieldElem::ZERO,
            chi: FieldElem::ONE,
            weight: FieldElem::ONE,
            violations: 0,
            tamper_open: false,
        }
    }

    pub fn tape(&self) -> &ProverTape {
        &self.tape
    }

    /// Constraints added so far that do not hold on the committed values.
    pub fn violations(&self) -> u64 {
        self.violations
    }

    pub fn into_session(self) -> Session {
        self.sess
    }

    fn add_constraint(&mut self, a0: Wide, a1: Wide, val: Wide, lin: PShare) {
        let mut a1 = a1;
        a1.add_elem(lin.m);
        let mut v = val;
        v.add_elem(lin.x);
        if !v.reduce().is_zero() {
            self.violations += 1;
        }
        self.weight *= self.chi;
        self.acc0 += self.weight * a0.reduce();
        self.acc1 += self.weight * a1.reduce();
    }
}

impl Backend for ProverBackend {
    type S = PShare;

    fn is_prover(&self) -> bool {
        true
    }

    fn session(&mut self) -> &mut Session {
        &mut self.sess
    }

    fn commit(&mut self, vals: Option<&[FieldElem]>, n: usize) -> Result<Vec<PShare>> {
        let vals = vals.expect("prover commits known values");
        assert_eq!(vals.len(), n, "commit count");
        self.tape.reserve(n as u64)?;
        let mut shares = Vec::with_capacity(n);
        let mut deltas = Vec::with_capacity(n);
        for x in vals {
            let (r, m) = self.tape.take()?;
            deltas.push(*x + r);
            shares.push(PShare { x: *x, m });
        }
        self.sess.send_elems(Tag::CommitDelta, &deltas)?;
        Ok(shares)
    }

    fn constant(&self, c: FieldElem) -> PShare {
        PShare { x: c, m: FieldElem::ZERO }
    }

    fn open_eq(&mut self, s: &[PShare], _expected: &[FieldElem], _kind: CheckKind) -> Result<()> {
        let mut tags: Vec<FieldElem> = s.iter().map(|v| v.m).collect();
        if self.tamper_open && !tags.is_empty() {
            tags[0] += FieldElem::ONE;
            self.tamper_open = false;
        }
        self.sess.send_elems(Tag::Open, &tags)
    }

    fn challenge(&mut self, n: usize) -> Result<Vec<FieldElem>> {
        self.sess.recv_elems(Tag::Chal, n)
    }

    fn fold(&mut self, chi: FieldElem) {
        self.chi = chi;
        self.weight = FieldElem::ONE;
    }

    fn quad(&mut self, terms: &[(PShare, PShare)], lin: PShare) {
        let (mut a0, mut a1, mut val) = (Wide::default(), Wide::default(), Wide::default());
        for (x, y) in terms {
            a0.mac(x.m, y.m);
            a1.mac(x.x, y.m);
            a1.mac(y.x, x.m);
            val.mac(x.x, y.x);
        }
        self.add_constraint(a0, a1, val, lin);
    }

    fn quad_dot(&mut self, xs: &[PShare], ys: &[PShare], lin: PShare) {
        let (mut a0, mut a1, mut val) = (Wide::default(), Wide::default(), Wide::default());
        for (x, y) in xs.iter().zip(ys) {
            a0.mac(x.m, y.m);
            a1.mac(x.x, y.m);
            a1.mac(y.x, x.m);
            val.mac(x.x, y.x);
        }
        self.add_constraint(a0, a1, val, lin);
    }

    fn finish(&mut self, _kind: CheckKind) -> Result<()> {
        let (r, m) = self.tape.take()?;
        let u = self.acc0 + m;
        let v = self.acc1 + r;
        self.acc0 = FieldElem::ZERO;
        self.acc1 = FieldElem::ZERO;
        self.sess.send_elems(Tag::MulProof, &[u, v])
    }

    fn checkpoint(&mut self) -> Result<()> {
        let d = self.sess.digest();
        self.sess.send(Tag::Checkpoint, d.to_vec())
    }

    fn tape_used(&self) -> u64 {
        self.tape.used()
    }
}

pub struct VerifierBackend {
    pub sess: Session,
    tape: VerifierTape,
    delta: FieldElem,
    rng: ChaCha20Rng,
    acc: FieldElem,
    chi: FieldElem,
    weight: FieldElem,
}

impl VerifierBackend {
    pub fn new(sess: Session, tape: VerifierTape, seed: u64) -> Self {
        let delta = tape.delta();
        Self {
            sess,
            tape,
            delta,
            rng: ChaCha20Rng::seed_from_u64(seed),
            acc: FieldElem::ZERO,
            chi: FieldElem::ONE,
            weight: FieldElem::ONE,
        }
    }

    pub fn tape(&self) -> &VerifierTape {
        &self.tape
    }

    pub fn into_session(self) -> Session {
        self.sess
    }

    fn add_constraint(&mut self, b: Wide, lin: VShare) {
        let b = b.reduce() + lin.0 * self.delta;
        self.weight *= self.chi;
        self.acc += self.weight * b;
    }
}

impl Backend for VerifierBackend {
    type S = VShare;

    fn is_prover(&self) -> bool {
        false
    }

    fn session(&mut self) -> &mut Session {
        &mut self.sess
    }

    fn commit(&mut self, _vals: Option<&[FieldElem]>, n: usize) -> Result<Vec<VShare>> {
        self.tape.reserve(n as u64)?;
        let deltas = self.sess.recv_elems(Tag::CommitDelta, n)?;
        let mut out = Vec::with_capacity(n);
        for d in deltas {
            let k = self.tape.take()?;
            out.push(VShare(k + d * self.delta));
        }
        Ok(out)
    }

    fn constant(&self, c: FieldElem) -> VShare {
        VShare(c * self.delta)
    }

    fn open_eq(&mut self, s: &[VShare], expected: &[FieldElem], kind: CheckKind) -> Result<()> {
        let tags = self.sess.recv_elems(Tag::Open, s.len())?;
        for (i, ((k, x), m)) in s.iter().zip(expected).zip(&tags).enumerate() {
            if *m != k.0 + *x * self.delta {
                return Err(self.sess.abort(kind, format!("opening {i} of {} does not verify", s.len())));
            }
        }
        Ok(())
    }

    fn challenge(&mut self, n: usize) -> Result<Vec<FieldElem>> {
        let v: Vec<FieldElem> = (0..n).map(|_| FieldElem::random(&mut self.rng)).collect();
        self.sess.send_elems(Tag::Chal, &v)?;
        Ok(v)
    }

    fn fold(&mut self, chi: FieldElem) {
        self.chi = chi;
        self.weight = FieldElem::ONE;
    }

    fn quad(&mut self, terms: &[(VShare, VShare)], lin: VShare) {
        let mut b = Wide::default();
        for (x, y) in terms {
            b.mac(x.0, y.0);
        }
        self.add_constraint(b, lin);
    }

    fn quad_dot(&mut self, xs: &[VShare], ys: &[VShare], lin: VShare) {
        let mut b = Wide::default();
        for (x, y) in xs.iter().zip(ys) {
            b.mac(x.0, y.0);
        }
        self.add_constraint(b, lin);
    }

    fn finish(&mut self, kind: CheckKind) -> Result<()> {
        let k = self.tape.take()?;
        let uv = self.sess.recv_elems(Tag::MulProof, 2)?;
        let ok = self.acc + k == uv[0] + uv[1] * self.delta;
        self.acc = FieldElem::ZERO;
        if !ok {
            return Err(self.sess.abort(kind, "batched multiplication check failed"));
        }
        Ok(())
    }

    fn checkpoint(&mut self) -> Result<()> {
        let mine = self.sess.digest();
        let theirs = self.sess.recv(Tag::Checkpoint)?;
        if theirs != mine {
            return Err(self.sess.abort(CheckKind::Checkpoint, "transcripts diverged"));
        }
        Ok(())
    }

    fn tape_used(&self) -> u64 {
        self.tape.used()
    }
}

/// Run a prover script and a verifier script against each other over an
/// in-process channel with seeded tapes.
pub fn run_pair<P, V, A, B>(tape_seed: u64, chal_seed: u64, capacity: u64, prover: P, verifier: V) -> (Result<A>, Result<B>)
where
    P: FnOnce(&mut ProverBackend) -> Result<A> + Send,
    V: FnOnce(&mut VerifierBackend) -> Result<B> + Send,
    A: Send,
    B: Send,
{
    use super::channel::{duplex, Role};
    use super::tape::dealer_gen;
    let (a, b) = duplex();
    let (pt, vt) = dealer_gen(tape_seed, capacity);
    let mut pb = ProverBackend::new(Session::new(Role::Prover, Box::new(a)), pt);
    let mut vb = VerifierBackend::new(Session::new(Role::Verifier, Box::new(b)), vt, chal_seed);
    std::thread::scope(|s| {
        let h = s.spawn(move || {
            let r = prover(&mut pb);
            if let Err(Error::Abort(a)) = &r {
                pb.sess.send_abort(a);
            }
            r
        });
        let r = verifier(&mut vb);
        if let Err(Error::Abort(a)) = &r {
            vb.sess.send_abort(a);
        }
        drop(vb);
        (h.join().expect("prover thread"), r)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn fe(x: u128) -> FieldElem {
        FieldElem(x)
    }

    #[test]
    fn commit_then_open() {
        let (p, v) = run_pair(
            1,
            2,
            10,
            |b| {
                let c = b.commit(Some(&[fe(5)]), 1)?;
                b.open_eq(&c, &[fe(5)], CheckKind::Open)
            },
            |b| {
                let c = b.commit(None, 1)?;
                b.open_eq(&c, &[fe(5)], CheckKind::Open)
            },
        );
        assert!(p.is_ok() && v.is_ok());

        let (_, v) = run_pair(
            1,
            2,
            10,
            |b| {
                let c = b.commit(Some(&[fe(5)]), 1)?;
                b.open_eq(&c, &[fe(6)], CheckKind::Open)
            },
            |b| {
                let c = b.commit(None, 1)?;
                b.open_eq(&c, &[fe(6)], CheckKind::Open)
            },
        );
        assert_eq!(v.unwrap_err().as_abort().unwrap().kind, CheckKind::Open);
    }

    #[test]
    fn tampered_tag_never_verifies() {
        for seed in 0..1000u64 {
            let (_, v) = run_pair(
                seed,
                seed,
                4,
                |b| {
                    let c = b.commit(Some(&[fe(9)]), 1)?;
                    b.tamper_open = true;
                    b.open_eq(&c, &[fe(9)], CheckKind::Open)
                },
                |b| {
                    let c = b.commit(None, 1)?;
                    b.open_eq(&c, &[fe(9)], CheckKind::Open)
                },
            );
            assert!(v.is_err(), "seed {seed}");
        }
    }

    #[test]
    fn linear_combinations_open_correctly() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (x, y, a, a2, c) = (
                FieldElem::random(&mut rng),
                FieldElem::random(&mut rng),
                FieldElem::random(&mut rng),
                FieldElem::random(&mut rng),
                FieldElem::random(&mut rng),
            );
            let want = a * x + a2 * y + c;
            let (p, v) = run_pair(
                7,
                8,
                10,
                |b| {
                    let s = b.commit(Some(&[x, y]), 2)?;
                    let z = s[0] * a + s[1] * a2 + b.constant(c);
                    b.open_eq(&[z, s[0] + s[0]], &[want, FieldElem::ZERO], CheckKind::Open)
                },
                |b| {
                    let s = b.commit(None, 2)?;
                    let z = s[0] * a + s[1] * a2 + b.constant(c);
                    b.open_eq(&[z, s[0] + s[0]], &[want, FieldElem::ZERO], CheckKind::Open)
                },
            );
            assert!(p.is_ok() && v.is_ok());
        }
    }

    fn mul_run(x: FieldElem, y: FieldElem, z: FieldElem, seed: u64) -> Result<()> {
        let (_, v) = run_pair(
            seed,
            seed ^ 0xabc,
            8,
            |b| {
                let s = b.commit(Some(&[x, y, z]), 3)?;
                let chi = b.challenge(1)?[0];
                b.fold(chi);
                b.quad(&[(s[0], s[1])], s[2]);
                b.finish(CheckKind::Mul)
            },
            |b| {
                let s = b.commit(None, 3)?;
                let chi = b.challenge(1)?[0];
                b.fold(chi);
                b.quad(&[(s[0], s[1])], s[2]);
                b.finish(CheckKind::Mul)
            },
        );
        v
    }

    #[test]
    fn honest_products_pass() {
        assert!(mul_run(fe(3), fe(0), fe(0), 1).is_ok());
        assert!(mul_run(fe(3), fe(1), fe(3), 2).is_ok());
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for s in 0..100 {
            let (x, y) = (FieldElem::random(&mut rng), FieldElem::random(&mut rng));
            assert!(mul_run(x, y, x * y, s).is_ok());
        }
    }

    #[test]
    fn wrong_products_always_fail() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for s in 0..10_000u64 {
            let (x, y) = (FieldElem::random(&mut rng), FieldElem::random(&mut rng));
            let z = x * y + FieldElem::random_nonzero(&mut rng);
            let e = mul_run(x, y, z, s).unwrap_err();
            assert_eq!(e.as_abort().unwrap().kind, CheckKind::Mul);
        }
    }

    #[test]
    fn commitment_deltas_are_balanced() {
        // Correction values for a fixed secret must look uniform.
        let (mut pt, _) = super::super::tape::dealer_gen(11, 100_000);
        let mut ones = [0u32; 128];
        let secret = fe(0x1234_5678);
        for _ in 0..100_000 {
            let (r, _) = pt.take().unwrap();
            let d = (secret + r).0;
            for (i, o) in ones.iter_mut().enumerate() {
                *o += (d >> i) as u32 & 1;
            }
        }
        for o in ones {
            // 5 sigma around 50_000
            assert!((o as i64 - 50_000).abs() < 800, "bit count {o}");
        }
    }

    #[test]
    fn batched_constraints_catch_one_bad_term() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        for s in 0..200u64 {
            let n = 20;
            let xs: Vec<FieldElem> = (0..n).map(|_| FieldElem::random(&mut rng)).collect();
            let ys: Vec<FieldElem> = (0..n).map(|_| FieldElem::random(&mut rng)).collect();
            let mut zs: Vec<FieldElem> = xs.iter().zip(&ys).map(|(a, b)| *a * *b).collect();
            let bad = rng.gen_range(0..n);
            zs[bad] += FieldElem::ONE;
            let mut vals = xs.clone();
            vals.extend(&ys);
            vals.extend(&zs);
            let (p, v) = run_pair(
                s,
                s + 1,
                100,
                |b| {
                    let c = b.commit(Some(&vals), 3 * n)?;
                    let chi = b.challenge(1)?[0];
                    b.fold(chi);
                    for i in 0..n {
                        b.quad(&[(c[i], c[n + i])], c[2 * n + i]);
                    }
                    let viol = b.violations();
                    b.finish(CheckKind::Mul).map(|_| viol)
                },
                |b| {
                    let c = b.commit(None, 3 * n)?;
                    let chi = b.challenge(1)?[0];
                    b.fold(chi);
                    for i in 0..n {
                        b.quad(&[(c[i], c[n + i])], c[2 * n + i]);
                    }
                    b.finish(CheckKind::Mul)
                },
            );
            assert_eq!(p.unwrap(), 1);
            assert!(v.is_err());
        }
    }
}

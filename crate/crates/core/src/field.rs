//! Arithmetic in GF(2^128).
//!
//! Elements are 128-bit values whose bit `i` is the coefficient of `x^i`,
//! reduced modulo `x^128 + x^7 + x^2 + x + 1`. Addition is XOR.
//!
//! Multiplication uses PCLMULQDQ when the CPU has it and a constant-time
//! portable carry-less multiply otherwise. Bulk kernels accumulate
//! unreduced 256-bit products ([`Wide`]) and reduce once per sum.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign};

use rand::Rng;

use crate::error::DomainError;

/// Low 128 bits of the reduction polynomial (`x^7 + x^2 + x + 1`).
pub const REDUCTION_TAIL: u128 = 0x87;

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem(pub u128);

impl FieldElem {
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(1);

    pub const fn new(bits: u128) -> Self {
        Self(bits)
    }

    pub const fn bits(self) -> u128 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self(rng.gen())
    }

    pub fn random_nonzero<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: u128 = rng.gen();
            if v != 0 {
                return Self(v);
            }
        }
    }

    pub fn square(self) -> Self {
        self * self
    }

    /// Multiplicative inverse via `a^(2^128 - 2)`.
    pub fn inv(self) -> Result<Self, DomainError> {
        if self.is_zero() {
            return Err(DomainError::ZeroInverse);
        }
        Ok(self.pow(u128::MAX - 1))
    }

    /// `self^e` by square-and-multiply.
    pub fn pow(self, mut e: u128) -> Self {
        let mut base = self;
        let mut acc = FieldElem::ONE;
        while e != 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.square();
            e >>= 1;
        }
        acc
    }

    pub fn to_le_bytes(self) -> [u8; 16] {
        self.0.to_le_bytes()
    }

    pub fn from_le_bytes(b: [u8; 16]) -> Self {
        Self(u128::from_le_bytes(b))
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F({:#x})", self.0)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#034x}", self.0)
    }
}

impl From<u64> for FieldElem {
    fn from(v: u64) -> Self {
        Self(v as u128)
    }
}

impl Add for FieldElem {
    type Output = Self;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Self) -> Self {
        Self(self.0 ^ rhs.0)
    }
}

impl AddAssign for FieldElem {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Self) {
        self.0 ^= rhs.0;
    }
}

impl Mul for FieldElem {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Wide::product(self, rhs).reduce()
    }
}

impl MulAssign for FieldElem {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl std::iter::Sum for FieldElem {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(FieldElem::ZERO, |a, b| a + b)
    }
}

/// An unreduced 255-bit carry-less product. Sums of `Wide` values reduce
/// to the sum of the reduced products, so dot products reduce once.
#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
pub struct Wide {
    pub lo: u128,
    pub hi: u128,
}

impl Wide {
    #[inline]
    pub fn product(a: FieldElem, b: FieldElem) -> Self {
        let (lo, hi) = clmul128(a.0, b.0);
        Wide { lo, hi }
    }

    #[inline]
    pub fn mac(&mut self, a: FieldElem, b: FieldElem) {
        let (lo, hi) = clmul128(a.0, b.0);
        self.lo ^= lo;
        self.hi ^= hi;
    }

    #[inline]
    pub fn add_elem(&mut self, a: FieldElem) {
        self.lo ^= a.0;
    }

    #[inline]
    pub fn reduce(self) -> FieldElem {
        let h = self.hi;
        let folded = h ^ (h << 1) ^ (h << 2) ^ (h << 7);
        let carry = (h >> 127) ^ (h >> 126) ^ (h >> 121);
        let tail = carry ^ (carry << 1) ^ (carry << 2) ^ (carry << 7);
        FieldElem(self.lo ^ folded ^ tail)
    }
}

impl AddAssign for Wide {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.lo ^= rhs.lo;
        self.hi ^= rhs.hi;
    }
}

/// `Σ a_i · b_i` with a single reduction.
pub fn dot(a: &[FieldElem], b: &[FieldElem]) -> FieldElem {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Wide::default();
    for (x, y) in a.iter().zip(b) {
        acc.mac(*x, *y);
    }
    acc.reduce()
}

/// `[1, x, x^2, ..., x^(n-1)]`
pub fn powers(x: FieldElem, n: usize) -> Vec<FieldElem> {
    let mut out = Vec::with_capacity(n);
    let mut cur = FieldElem::ONE;
    for _ in 0..n {
        out.push(cur);
        cur *= x;
    }
    out
}

#[inline]
fn clmul128(a: u128, b: u128) -> (u128, u128) {
    #[cfg(target_arch = "x86_64")]
    {
        if has_clmul() {
            // SAFETY: guarded by runtime feature detection.
            return unsafe { x86::clmul128(a, b) };
        }
    }
    soft::clmul128(a, b)
}

#[cfg(target_arch = "x86_64")]
#[inline]
fn has_clmul() -> bool {
    use std::sync::atomic::{AtomicU8, Ordering};
    static STATE: AtomicU8 = AtomicU8::new(0);
    match STATE.load(Ordering::Relaxed) {
        1 => true,
        2 => false,
        _ => {
            let yes = std::is_x86_feature_detected!("pclmulqdq")
                && std::is_x86_feature_detected!("sse2");
            STATE.store(if yes { 1 } else { 2 }, Ordering::Relaxed);
            yes
        }
    }
}

#[cfg(target_arch = "x86_64")]
mod x86 {
    use core::arch::x86_64::*;

    #[target_feature(enable = "pclmulqdq,sse2")]
    pub unsafe fn clmul128(a: u128, b: u128) -> (u128, u128) {
        let x = _mm_set_epi64x((a >> 64) as i64, a as i64);
        let y = _mm_set_epi64x((b >> 64) as i64, b as i64);
        let lo = _mm_clmulepi64_si128(x, y, 0x00);
        let hi = _mm_clmulepi64_si128(x, y, 0x11);
        let m1 = _mm_clmulepi64_si128(x, y, 0x01);
        let m2 = _mm_clmulepi64_si128(x, y, 0x10);
        let mid = _mm_xor_si128(m1, m2);
        let lo = to_u128(lo);
        let hi = to_u128(hi);
        let mid = to_u128(mid);
        (lo ^ (mid << 64), hi ^ (mid >> 64))
    }

    #[inline(always)]
    unsafe fn to_u128(v: __m128i) -> u128 {
        let mut out = [0u8; 16];
        _mm_storeu_si128(out.as_mut_ptr() as *mut __m128i, v);
        u128::from_le_bytes(out)
    }
}

/// Portable constant-time carry-less multiply (32-bit "holes" method).
pub(crate) mod soft {
    #[inline]
    fn clmul32(x: u32, y: u32) -> u64 {
        let x = x as u64;
        let y = y as u64;
        let x0 = x & 0x1111_1111;
        let x1 = x & 0x2222_2222;
        let x2 = x & 0x4444_4444;
        let x3 = x & 0x8888_8888;
        let y0 = y & 0x1111_1111;
        let y1 = y & 0x2222_2222;
        let y2 = y & 0x4444_4444;
        let y3 = y & 0x8888_8888;
        let z0 = (x0 * y0) ^ (x1 * y3) ^ (x2 * y2) ^ (x3 * y1);
        let z1 = (x0 * y1) ^ (x1 * y0) ^ (x2 * y3) ^ (x3 * y2);
        let z2 = (x0 * y2) ^ (x1 * y1) ^ (x2 * y0) ^ (x3 * y3);
        let z3 = (x0 * y3) ^ (x1 * y2) ^ (x2 * y1) ^ (x3 * y0);
        (z0 & 0x1111_1111_1111_1111)
            | (z1 & 0x2222_2222_2222_2222)
            | (z2 & 0x4444_4444_4444_4444)
            | (z3 & 0x8888_8888_8888_8888)
    }

    #[inline]
    fn clmul64(x: u64, y: u64) -> u128 {
        let (x0, x1) = (x as u32, (x >> 32) as u32);
        let (y0, y1) = (y as u32, (y >> 32) as u32);
        let lo = clmul32(x0, y0) as u128;
        let hi = clmul32(x1, y1) as u128;
        let mid = clmul32(x0 ^ x1, y0 ^ y1) as u128 ^ lo ^ hi;
        lo ^ (mid << 32) ^ (hi << 64)
    }

    pub fn clmul128(a: u128, b: u128) -> (u128, u128) {
        let (a0, a1) = (a as u64, (a >> 64) as u64);
        let (b0, b1) = (b as u64, (b >> 64) as u64);
        let lo = clmul64(a0, b0);
        let hi = clmul64(a1, b1);
        let mid = clmul64(a0 ^ a1, b0 ^ b1) ^ lo ^ hi;
        (lo ^ (mid << 64), hi ^ (mid >> 64))
    }
}

//! Dense univariate polynomials over GF(2^128) with a fixed, explicit length.
//!
//! Coefficient `i` multiplies `x^i`. Trailing zero coefficients are part of
//! the value: two polynomials of different length are different objects even
//! when they agree as functions.

use crate::error::WidthError;
use crate::field::{FieldElem, Wide};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<FieldElem>,
}

impl Poly {
    pub fn from_coeffs(coeffs: Vec<FieldElem>) -> Self {
        Self { coeffs }
    }

    /// The constant `c`, padded to `width + 1` coefficients.
    pub fn constant(c: FieldElem, width: usize) -> Self {
        let mut coeffs = vec![FieldElem::ZERO; width + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<FieldElem> {
        self.coeffs
    }

    /// Declared width, i.e. `len - 1`.
    pub fn width(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: FieldElem) -> FieldElem {
        self.coeffs.iter().rev().fold(FieldElem::ZERO, |acc, c| acc * x + *c)
    }

    /// Evaluation against precomputed powers `[1, x, x^2, ...]`.
    pub fn eval_powers(&self, powers: &[FieldElem]) -> FieldElem {
        let mut acc = Wide::default();
        for (c, p) in self.coeffs.iter().zip(powers) {
            acc.mac(*c, *p);
        }
        acc.reduce()
    }

    /// Convolution. The result has `len(p) + len(q) - 1` coefficients.
    pub fn mul(&self, other: &Poly) -> Poly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly { coeffs: Vec::new() };
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![Wide::default(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j].mac(*a, *b);
            }
        }
        Poly { coeffs: out.into_iter().map(Wide::reduce).collect() }
    }

    /// Extend with zero coefficients up to `width + 1`. Never shrinks.
    pub fn pad_to(&mut self, width: usize) {
        if self.coeffs.len() < width + 1 {
            self.coeffs.resize(width + 1, FieldElem::ZERO);
        }
    }
}

/// `Π (x + r_i)`, zero-padded to `width + 1` coefficients.
pub fn poly_from_roots(roots: &[FieldElem], width: usize) -> Result<Poly, WidthError> {
    if roots.len() > width {
        return Err(WidthError { got: roots.len(), max: width });
    }
    let mut coeffs = vec![FieldElem::ZERO; width + 1];
    coeffs[0] = FieldElem::ONE;
    for (deg, r) in roots.iter().enumerate() {
        // multiply the degree-`deg` prefix by (x + r), high to low
        for i in (0..=deg + 1).rev() {
            let shifted = if i > 0 { coeffs[i - 1] } else { FieldElem::ZERO };
            coeffs[i] = shifted + coeffs[i] * *r;
        }
    }
    Ok(Poly { coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn f(v: u128) -> FieldElem {
        FieldElem(v)
    }

    #[test]
    fn empty_roots_is_one() {
        let p = poly_from_roots(&[], 4).unwrap();
        assert_eq!(p.coeffs(), &[f(1), f(0), f(0), f(0), f(0)]);
    }

    #[test]
    fn single_root() {
        let p = poly_from_roots(&[f(3)], 3).unwrap();
        assert_eq!(p.coeffs(), &[f(3), f(1), f(0), f(0)]);
    }

    #[test]
    fn too_many_roots() {
        assert_eq!(
            poly_from_roots(&[f(1), f(2)], 1),
            Err(WidthError { got: 2, max: 1 })
        );
    }

    #[test]
    fn roots_vanish_and_fresh_points_do_not() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let roots: Vec<_> = (0..6).map(|_| FieldElem::random(&mut rng)).collect();
        let p = poly_from_roots(&roots, 8).unwrap();
        for r in &roots {
            assert_eq!(p.eval(*r), FieldElem::ZERO);
        }
        for _ in 0..10_000 {
            assert_ne!(p.eval(FieldElem::random(&mut rng)), FieldElem::ZERO);
        }
    }

    #[test]
    fn horner_matches_naive_power_sum() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..200 {
            let len = rng.gen_range(1..12);
            let p = Poly::from_coeffs((0..len).map(|_| FieldElem::random(&mut rng)).collect());
            let x = FieldElem::random(&mut rng);
            let naive: FieldElem =
                p.coeffs().iter().enumerate().map(|(i, c)| *c * x.pow(i as u128)).sum();
            assert_eq!(p.eval(x), naive);
            assert_eq!(p.eval_powers(&crate::field::powers(x, len)), naive);
        }
    }

    #[test]
    fn mul_identity_and_root() {
        let a = f(0x1234);
        let b = f(0x99);
        let p = poly_from_roots(&[a], 1).unwrap();
        let q = poly_from_roots(&[b], 1).unwrap();
        assert_eq!(p.mul(&Poly::from_coeffs(vec![FieldElem::ONE])), p);
        assert_eq!(p.mul(&q).eval(a), FieldElem::ZERO);
        assert_eq!(p.mul(&q).width(), 2);
    }

    #[test]
    fn padding_is_retained() {
        let mut p = poly_from_roots(&[f(5)], 1).unwrap();
        p.pad_to(6);
        assert_eq!(p.len(), 7);
        p.pad_to(2);
        assert_eq!(p.len(), 7);
    }

    proptest::proptest! {
        #[test]
        fn mul_is_evaluation_homomorphic(
            a in proptest::collection::vec(proptest::num::u128::ANY, 1..8),
            b in proptest::collection::vec(proptest::num::u128::ANY, 1..8),
            x: u128,
        ) {
            let p = Poly::from_coeffs(a.into_iter().map(FieldElem).collect());
            let q = Poly::from_coeffs(b.into_iter().map(FieldElem).collect());
            let x = FieldElem(x);
            proptest::prop_assert_eq!(p.mul(&q).eval(x), p.eval(x) * q.eval(x));
        }

        #[test]
        fn zero_padding_never_changes_evaluation(
            a in proptest::collection::vec(proptest::num::u128::ANY, 1..8),
            extra in 0usize..8,
            x: u128,
        ) {
            let p = Poly::from_coeffs(a.into_iter().map(FieldElem).collect());
            let mut padded = p.clone();
            padded.pad_to(p.width() + extra);
            proptest::prop_assert_eq!(p.eval(FieldElem(x)), padded.eval(FieldElem(x)));
        }
    }
}

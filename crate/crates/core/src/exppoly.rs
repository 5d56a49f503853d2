//! Exact exponential polynomials `Σ_S c_S · exp(−Σ_{j∈S} 1/j)`.
//!
//! `S` ranges over subsets of `{1, …, 64}` stored as bitmasks (bit `j − 1`
//! for `j`), and every coefficient is an exact rational. Products are only
//! defined between polynomials whose exponent sets never overlap, which is
//! always the case for the per-position factors of a table row.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::Ball;

pub type Mask = u64;

pub fn bit(j: u32) -> Mask {
    assert!((1..=64).contains(&j), "exponent index out of range");
    1u64 << (j - 1)
}

/// `Σ_{j∈S} 1/j`.
pub fn exponent(mask: Mask) -> BigRational {
    let mut q = BigRational::zero();
    let mut m = mask;
    while m != 0 {
        let j = m.trailing_zeros() + 1;
        m &= m - 1;
        q += BigRational::new(BigInt::one(), BigInt::from(j));
    }
    q
}

#[derive(Clone, Default, PartialEq, Eq)]
pub struct ExpPoly {
    terms: BTreeMap<Mask, BigRational>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly::default()
    }

    pub fn one() -> Self {
        ExpPoly::term(BigRational::one(), 0)
    }

    /// `c · exp(−Σ_{j∈S} 1/j)`.
    pub fn term(c: BigRational, mask: Mask) -> Self {
        let mut p = ExpPoly::zero();
        p.add_term(mask, c);
        p
    }

    /// `exp(−1/j)`.
    pub fn exp_neg_inv(j: u32) -> Self {
        ExpPoly::term(BigRational::one(), bit(j))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: Mask) -> BigRational {
        self.terms
            .get(&mask)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Terms in increasing mask order.
    pub fn terms(&self) -> impl Iterator<Item = (Mask, &BigRational)> {
        self.terms.iter().map(|(&m, c)| (m, c))
    }

    pub fn add_term(&mut self, mask: Mask, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(mask).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn scale(&self, c: &BigRational) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (m, x) in self.terms() {
            out.add_term(m, x * c);
        }
        out
    }

    /// The value with every exponential replaced by 1.
    pub fn coefficient_sum(&self) -> BigRational {
        self.terms.values().fold(BigRational::zero(), |a, c| a + c)
    }

    /// `Σ |c_S|`, an upper bound on the magnitude of any partial sum.
    pub fn coefficient_mass(&self) -> BigRational {
        self.terms
            .values()
            .fold(BigRational::zero(), |a, c| a + c.abs())
    }

    /// Encloses the real value at binary precision `prec`.
    pub fn enclose(&self, prec: u32) -> Ball {
        let mut used = 0u64;
        for &m in self.terms.keys() {
            used |= m;
        }
        let mut factors: Vec<Option<Ball>> = vec![None; 64];
        let mut bits = used;
        while bits != 0 {
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            let inv = Ball::from_ratio(&BigInt::from(-1), &BigInt::from(i + 1), prec);
            factors[i as usize] = Some(inv.exp());
        }
        let mut total = Ball::zero(prec);
        for (&mask, c) in &self.terms {
            let mut e = Ball::from_i64(1, prec);
            let mut m = mask;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                e = e.mul(factors[i].as_ref().expect("factor computed"));
            }
            total = total.add(&e.mul_int(c.numer()).div_int(c.denom()));
        }
        total
    }
}

impl Add for &ExpPoly {
    type Output = ExpPoly;

    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.add_term(m, c.clone());
        }
        out
    }
}

impl Sub for &ExpPoly {
    type Output = ExpPoly;

    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        self + &(-rhs)
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;

    fn neg(self) -> ExpPoly {
        self.scale(&-BigRational::one())
    }
}

impl Mul for &ExpPoly {
    type Output = ExpPoly;

    /// Panics if two exponent sets overlap: `e^{−1/j}` never appears squared.
    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (a, x) in self.terms() {
            for (b, y) in rhs.terms() {
                assert_eq!(a & b, 0, "exponent sets overlap: {a:#x} and {b:#x}");
                out.add_term(a | b, x * y);
            }
        }
        out
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            write!(f, "{}", c.abs())?;
            if m != 0 {
                write!(f, "·e^(-{})", exponent(m))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExpPoly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn exponents() {
        assert_eq!(exponent(bit(1) | bit(2) | bit(3) | bit(4)), r(25, 12));
        assert_eq!(exponent(0), r(0, 1));
    }

    #[test]
    fn cancellation_removes_terms() {
        let a = ExpPoly::term(r(1, 2), bit(3));
        let z = &a - &a;
        assert!(z.is_zero());
        assert_eq!(z.len(), 0);
    }

    #[test]
    #[should_panic(expected = "overlap")]
    fn overlapping_product_panics() {
        let _ = &ExpPoly::exp_neg_inv(2) * &ExpPoly::exp_neg_inv(2);
    }

    #[test]
    fn display() {
        let p = &ExpPoly::one() - &ExpPoly::exp_neg_inv(3);
        assert_eq!(p.to_string(), "1 - 1·e^(-1/3)");
    }

    #[test]
    fn enclose_value() {
        // (3/2)e^{-7/4} + (13/6)e^{-25/12} ≈ 0.530442
        let mut p = ExpPoly::term(r(3, 2), bit(1) | bit(2) | bit(4));
        p.add_term(bit(1) | bit(2) | bit(3) | bit(4), r(13, 6));
        let v = p.enclose(128).to_f64();
        assert!((v - 0.530442).abs() < 1e-6, "{v}");
    }

    fn poly(lo: u32) -> impl Strategy<Value = ExpPoly> {
        proptest::collection::vec((0u64..16, -20i64..20, 1i64..9), 0..6).prop_map(move |ts| {
            let mut p = ExpPoly::zero();
            for (m, n, d) in ts {
                p.add_term(m << lo, r(n, d));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn addition_is_associative(a in poly(0), b in poly(0), c in poly(4)) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        }

        #[test]
        fn multiplication_distributes(a in poly(0), b in poly(4), c in poly(4)) {
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }

        #[test]
        fn no_zero_coefficients(a in poly(0), b in poly(4)) {
            let p = &(&a * &b) - &a;
            prop_assert!(p.terms().all(|(_, c)| !c.is_zero()));
        }

        #[test]
        fn coefficient_sum_is_a_ring_map(a in poly(0), b in poly(4)) {
            prop_assert_eq!((&a * &b).coefficient_sum(), a.coefficient_sum() * b.coefficient_sum());
        }
    }
}

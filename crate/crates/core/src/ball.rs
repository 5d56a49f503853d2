//! Fixed-point midpoint-radius ("ball") arithmetic.
//!
//! A [`Ball`] at precision `W` stores integers `mid` and `rad` and denotes
//! the real interval `[(mid − rad)/2^W, (mid + rad)/2^W]`. Every operation
//! returns a ball guaranteed to contain the exact result for every input in
//! the argument balls; rounding and series truncation are folded into the
//! radius. Operands must share the same precision.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Clone, PartialEq, Eq)]
pub struct Ball {
    mid: BigInt,
    rad: BigUint,
    prec: u32,
}

fn ceil_div(a: &BigUint, b: &BigUint) -> BigUint {
    let (q, r) = a.div_rem(b);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

fn ceil_shr(a: &BigUint, bits: u32) -> BigUint {
    let q = a >> bits;
    if &q << bits == *a {
        q
    } else {
        q + 1u32
    }
}

/// `Σ_{i ≥ 0} z^{2i+1}/(2i+1)` for rational `z = a/b ∈ [0, 1/2]`, as a
/// fixed-point value at precision `prec` plus an error bound in ulps.
fn atanh_series(a: &BigInt, b: &BigInt, prec: u32) -> (BigInt, BigUint) {
    debug_assert!(!a.is_negative() && b.is_positive() && a * 2 <= *b);
    let a2 = a * a;
    let b2 = b * b;
    let mut power = (a << prec).div_floor(b);
    let mut sum = BigInt::zero();
    let mut n = 0u64;
    while !power.is_zero() {
        sum += power.div_floor(&BigInt::from(2 * n + 1));
        power = (power * &a2).div_floor(&b2);
        n += 1;
    }
    // each term: ≤ 2 ulp inherited from the power, ≤ 1 ulp from division;
    // the tail past the first vanishing power is below 3 ulp
    (sum, BigUint::from(3 * n + 4))
}

impl Ball {
    pub fn new(mid: BigInt, rad: BigUint, prec: u32) -> Self {
        Ball { mid, rad, prec }
    }

    pub fn zero(prec: u32) -> Self {
        Ball::new(BigInt::zero(), BigUint::zero(), prec)
    }

    pub fn from_int(n: &BigInt, prec: u32) -> Self {
        Ball::new(n << prec, BigUint::zero(), prec)
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        Ball::from_int(&BigInt::from(n), prec)
    }

    /// Encloses `num/den`, `den > 0`.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(den.is_positive(), "denominator must be positive");
        let (q, r) = (num << prec).div_mod_floor(den);
        let rad = if r.is_zero() {
            BigUint::zero()
        } else {
            BigUint::one()
        };
        Ball::new(q, rad, prec)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn mid(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad(&self) -> &BigUint {
        &self.rad
    }

    /// Lower end of the interval, in ulps.
    pub fn lower(&self) -> BigInt {
        &self.mid - BigInt::from(self.rad.clone())
    }

    /// Upper end of the interval, in ulps.
    pub fn upper(&self) -> BigInt {
        &self.mid + BigInt::from(self.rad.clone())
    }

    /// Certified comparison; `None` when the intervals overlap.
    pub fn compare(&self, other: &Ball) -> Option<Ordering> {
        self.same_prec(other);
        if self.lower() > other.upper() {
            Some(Ordering::Greater)
        } else if self.upper() < other.lower() {
            Some(Ordering::Less)
        } else if self.rad.is_zero() && other.rad.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        let shift = self.mid.bits().saturating_sub(60) as u32;
        let top: i64 = (&self.mid >> shift).try_into().unwrap_or(0);
        top as f64 * 2f64.powi(shift as i32 - self.prec as i32)
    }

    fn same_prec(&self, other: &Ball) {
        assert_eq!(self.prec, other.prec, "precision mismatch");
    }

    pub fn add(&self, other: &Ball) -> Ball {
        self.same_prec(other);
        Ball::new(&self.mid + &other.mid, &self.rad + &other.rad, self.prec)
    }

    pub fn sub(&self, other: &Ball) -> Ball {
        self.same_prec(other);
        Ball::new(&self.mid - &other.mid, &self.rad + &other.rad, self.prec)
    }

    pub fn neg(&self) -> Ball {
        Ball::new(-&self.mid, self.rad.clone(), self.prec)
    }

    pub fn mul(&self, other: &Ball) -> Ball {
        self.same_prec(other);
        let (q, r) = (&self.mid * &other.mid).div_mod_floor(&(BigInt::one() << self.prec));
        let spread = self.mid.magnitude() * &other.rad
            + other.mid.magnitude() * &self.rad
            + &self.rad * &other.rad;
        let mut rad = ceil_shr(&spread, self.prec);
        if !r.is_zero() {
            rad += 1u32;
        }
        Ball::new(q, rad, self.prec)
    }

    /// Exact scaling by an integer.
    pub fn mul_int(&self, n: &BigInt) -> Ball {
        Ball::new(&self.mid * n, &self.rad * n.magnitude(), self.prec)
    }

    pub fn div_int(&self, d: &BigInt) -> Ball {
        assert!(!d.is_zero(), "division by zero");
        let (mut num, mut den) = (self.mid.clone(), d.clone());
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let (q, r) = num.div_mod_floor(&den);
        let mut rad = ceil_div(&self.rad, den.magnitude());
        if !r.is_zero() {
            rad += 1u32;
        }
        Ball::new(q, rad, self.prec)
    }

    /// Quotient of two balls; the divisor must exclude zero.
    pub fn div(&self, other: &Ball) -> Ball {
        self.same_prec(other);
        let b = other.mid.magnitude();
        assert!(*b > other.rad, "divisor ball contains zero");
        let (q, r) = (&self.mid << self.prec).div_mod_floor(&other.mid);
        let qa = q.magnitude() + 1u32;
        let num = (&self.rad << self.prec) + &qa * &other.rad;
        let den = b - &other.rad;
        let mut rad = ceil_div(&num, &den);
        if !r.is_zero() {
            rad += 1u32;
        }
        Ball::new(q, rad, self.prec)
    }

    /// `e^x`.
    pub fn exp(&self) -> Ball {
        let w = self.prec;
        // halve until |x| ≤ 1/2
        let mut r = 0u32;
        while self.mid.magnitude() >> r > BigUint::one() << (w - 1) {
            r += 1;
        }
        let (t, rem) = self.mid.div_mod_floor(&(BigInt::one() << r));
        let mut rad_in = ceil_shr(&self.rad, r);
        if !rem.is_zero() {
            rad_in += 1u32;
        }
        assert!(
            rad_in < BigUint::one() << (w - 2),
            "exp argument radius too large for precision {w}"
        );
        let one = BigInt::one() << w;
        let mut term = one.clone();
        let mut sum = BigInt::zero();
        let mut n = 0u64;
        while !term.is_zero() {
            sum += &term;
            n += 1;
            term = term * &t / (&one * BigInt::from(n));
        }
        // e^t < 2 for |t| ≤ 1/2, and e^ρ − 1 ≤ 2ρ for ρ ≤ 1
        let rad = BigUint::from(2 * n + 8) + rad_in * 4u32;
        let mut out = Ball::new(sum, rad, w);
        for _ in 0..r {
            out = out.mul(&out);
        }
        out
    }

    /// `ln 2` at precision `prec`.
    pub fn ln2(prec: u32) -> Ball {
        let (s, e) = atanh_series(&BigInt::one(), &BigInt::from(3), prec);
        Ball::new(s * 2, e * 2u32, prec)
    }

    /// Natural logarithm; the ball must lie in `(0, ∞)`.
    pub fn ln(&self) -> Ball {
        let w = self.prec;
        let lo = self.lower();
        assert!(
            lo.is_positive(),
            "ln of a ball that is not strictly positive"
        );
        let bits = self.mid.bits() as i64;
        let base = BigInt::one() << (bits - 1) as u32;
        let (s, e) = atanh_series(&(&self.mid - &base), &(&self.mid + &base), w);
        let exponent = bits - 1 - w as i64;
        let ln2 = Ball::ln2(w);
        let point = Ball::new(s * 2, e * 2u32, w).add(&ln2.mul_int(&BigInt::from(exponent)));
        // |ln(x ± ρ) − ln x| ≤ ρ / x_lo
        let spread = ceil_div(&(&self.rad << w), lo.magnitude());
        Ball::new(point.mid, point.rad + spread, w)
    }

    /// Square root; the ball must lie in `(0, ∞)`.
    pub fn sqrt(&self) -> Ball {
        let w = self.prec;
        let lo = self.lower();
        assert!(
            lo.is_positive(),
            "sqrt of a ball that is not strictly positive"
        );
        let mid = (self.mid.magnitude() << w).sqrt();
        let lo_root = (lo.magnitude() << w).sqrt();
        assert!(!lo_root.is_zero(), "sqrt argument too close to zero");
        let rad = ceil_div(&(&self.rad << w), &lo_root) + 1u32;
        Ball::new(BigInt::from_biguint(Sign::Plus, mid), rad, w)
    }
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Ball({} ± {} ulp @{})",
            self.to_f64(),
            self.rad,
            self.prec
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 200;

    fn contains(b: &Ball, x: f64, tol: f64) -> bool {
        (b.to_f64() - x).abs() <= tol
    }

    fn ratio(n: i64, d: i64) -> Ball {
        Ball::from_ratio(&BigInt::from(n), &BigInt::from(d), P)
    }

    #[test]
    fn exp_known_values() {
        assert!(contains(
            &Ball::from_i64(1, P).exp(),
            std::f64::consts::E,
            1e-15
        ));
        assert!(contains(&Ball::from_i64(-1, P).exp(), (-1f64).exp(), 1e-16));
        assert!(contains(
            &ratio(-25, 12).exp(),
            (-25f64 / 12.0).exp(),
            1e-16
        ));
        assert!(contains(&Ball::zero(P).exp(), 1.0, 0.0));
        let big = Ball::from_i64(7, P).exp();
        assert!(contains(&big, 7f64.exp(), 1e-10));
        assert!(big.rad() < &(BigUint::one() << 40));
    }

    #[test]
    fn ln_and_sqrt() {
        assert!(contains(&Ball::ln2(P), std::f64::consts::LN_2, 1e-16));
        assert!(contains(&Ball::from_i64(10, P).ln(), 10f64.ln(), 1e-15));
        assert!(contains(&ratio(1, 3).ln(), (1f64 / 3.0).ln(), 1e-15));
        assert!(contains(&Ball::from_i64(2, P).sqrt(), 2f64.sqrt(), 1e-15));
        assert!(contains(&ratio(9, 4).sqrt(), 1.5, 1e-15));
    }

    #[test]
    fn exp_ln_round_trip_encloses() {
        // ln(e^x) must enclose x
        for (n, d) in [(1, 3), (-7, 4), (5, 2), (-1, 1)] {
            let x = ratio(n, d);
            let back = x.exp().ln();
            assert!(back.lower() <= x.upper() && back.upper() >= x.lower());
        }
    }

    #[test]
    fn division() {
        let q = ratio(1, 3).div(&ratio(1, 7));
        assert!(contains(&q, 7.0 / 3.0, 1e-15));
        let exact = Ball::from_i64(6, P).div(&Ball::from_i64(3, P));
        assert_eq!(exact.mid(), &(BigInt::from(2) << P));
    }

    #[test]
    fn compare_is_certified() {
        let a = ratio(1, 3);
        let b = ratio(1, 3).add(&Ball::new(BigInt::from(10), BigUint::zero(), P));
        assert_eq!(b.compare(&a), Some(Ordering::Greater));
        assert_eq!(a.compare(&a.clone()), None);
        assert_eq!(
            Ball::from_i64(2, P).compare(&Ball::from_i64(2, P)),
            Some(Ordering::Equal)
        );
    }

    #[test]
    fn radius_stays_small() {
        // e^{-q} for q = H_30 should still be tight
        let mut q = Ball::zero(P);
        for j in 1..=30 {
            q = q.add(&ratio(1, j));
        }
        let e = q.neg().exp();
        assert!(e.rad() < &(BigUint::one() << 16), "{e:?}");
    }
}

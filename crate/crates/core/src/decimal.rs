//! Decimal output with a fixed number of places.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::ball::Ball;

/// A decimal string with exactly `digits` places after the point and an
/// absolute error below `10^-digits`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct HighPrecisionDecimal {
    digits: u32,
    value: String,
}

impl HighPrecisionDecimal {
    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn as_str(&self) -> &str {
        &self.value
    }

    pub fn to_f64(&self) -> f64 {
        self.value.parse().expect("decimal string")
    }

    /// Correctly rounded (half to even) decimal of an exact rational.
    pub fn from_rational(x: &BigRational, digits: u32) -> Self {
        let scale = BigInt::from(10u32).pow(digits);
        let scaled = round_half_even(&(x.numer() * scale), x.denom());
        HighPrecisionDecimal {
            digits,
            value: format_scaled(&scaled, digits),
        }
    }

    /// Evaluates `enclose` at increasing binary precision until the ball
    /// rounds to a single `digits`-place decimal, starting at `start_bits`.
    pub fn certify<F>(digits: u32, start_bits: u32, mut enclose: F) -> Self
    where
        F: FnMut(u32) -> Ball,
    {
        let floor = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 16;
        let mut bits = start_bits.max(floor);
        let mut last = None;
        for _ in 0..8 {
            let ball = enclose(bits);
            if let Some(d) = round_ball(&ball, digits) {
                return d;
            }
            last = Some(ball);
            bits *= 2;
        }
        // Only an enclosure straddling a rounding tie gets here. The
        // midpoint is then within half an ulp of the tie, so its rounding
        // is still off by less than 10^-digits.
        let ball = last.expect("at least one attempt");
        let scale = BigInt::from(10u32).pow(digits);
        let width = BigInt::from(ball.rad().clone()) * 2 * &scale;
        assert!(
            width < BigInt::from(1u32) << ball.prec(),
            "enclosure too wide to certify {digits} places"
        );
        let den = BigInt::from(1u32) << ball.prec();
        let scaled = round_half_even(&(ball.mid() * scale), &den);
        HighPrecisionDecimal {
            digits,
            value: format_scaled(&scaled, digits),
        }
    }
}

impl fmt::Display for HighPrecisionDecimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.value)
    }
}

/// Rounds `num/den` (`den > 0`) to the nearest integer, ties to even.
pub fn round_half_even(num: &BigInt, den: &BigInt) -> BigInt {
    debug_assert!(den.is_positive());
    let (q, r) = num.div_mod_floor(den);
    let twice = &r * 2;
    if twice > *den || (twice == *den && q.is_odd()) {
        q + 1
    } else {
        q
    }
}

/// Formats `n · 10^-digits` with a leading integer part, e.g. `0.46955773`.
pub fn format_scaled(n: &BigInt, digits: u32) -> String {
    let neg = n.is_negative();
    let mut s = n.magnitude().to_string();
    let width = digits as usize + 1;
    if s.len() < width {
        s = "0".repeat(width - s.len()) + &s;
    }
    if digits > 0 {
        s.insert(s.len() - digits as usize, '.');
    }
    if neg && !n.is_zero() {
        s.insert(0, '-');
    }
    s
}

/// The common rounding of both ends of `ball`, if they agree.
fn round_ball(ball: &Ball, digits: u32) -> Option<HighPrecisionDecimal> {
    let scale = BigInt::from(10u32).pow(digits);
    let den = BigInt::from(1u32) << ball.prec();
    let lo = round_half_even(&(ball.lower() * &scale), &den);
    let hi = round_half_even(&(ball.upper() * &scale), &den);
    (lo == hi).then(|| HighPrecisionDecimal {
        digits,
        value: format_scaled(&lo, digits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_rounding() {
        assert_eq!(
            HighPrecisionDecimal::from_rational(&rat(5, 12), 5).as_str(),
            "0.41667"
        );
        assert_eq!(
            HighPrecisionDecimal::from_rational(&rat(1, 2), 5).as_str(),
            "0.50000"
        );
        assert_eq!(
            HighPrecisionDecimal::from_rational(&rat(2, 3), 5).as_str(),
            "0.66667"
        );
        assert_eq!(
            HighPrecisionDecimal::from_rational(&rat(0, 1), 3).as_str(),
            "0.000"
        );
        assert_eq!(
            HighPrecisionDecimal::from_rational(&rat(-1, 8), 2).as_str(),
            "-0.12"
        );
        assert_eq!(
            HighPrecisionDecimal::from_rational(&rat(3, 8), 2).as_str(),
            "0.38"
        );
        assert_eq!(
            HighPrecisionDecimal::from_rational(&rat(7, 2), 0).as_str(),
            "4"
        );
        assert_eq!(
            HighPrecisionDecimal::from_rational(&rat(5, 2), 0).as_str(),
            "2"
        );
        assert_eq!(
            HighPrecisionDecimal::from_rational(&rat(123, 10), 1).as_str(),
            "12.3"
        );
    }

    #[test]
    fn certify_exact_and_transcendental() {
        let zero = HighPrecisionDecimal::certify(20, 64, Ball::zero);
        assert_eq!(zero.as_str(), "0.00000000000000000000");
        let e = HighPrecisionDecimal::certify(8, 64, |p| Ball::from_i64(-1, p).exp());
        assert_eq!(e.as_str(), "0.36787944");
        let e30 = HighPrecisionDecimal::certify(30, 64, |p| Ball::from_i64(-1, p).exp());
        assert_eq!(e30.as_str(), "0.367879441171442321595523770161");
    }

    #[test]
    fn certify_survives_exact_tie() {
        // exactly 1/8 at 2 places: an exact ball rounds directly
        let d = HighPrecisionDecimal::certify(2, 64, |p| {
            Ball::from_ratio(&BigInt::from(1), &BigInt::from(8), p)
        });
        assert_eq!(d.as_str(), "0.12");
        // a non-exact ball straddling the tie falls back to the midpoint
        let d = HighPrecisionDecimal::certify(2, 64, |p| {
            let b = Ball::from_ratio(&BigInt::from(1), &BigInt::from(8), p);
            Ball::new(b.mid().clone(), BigUint::from(1u32), p)
        });
        assert_eq!(d.as_str(), "0.12");
    }
}

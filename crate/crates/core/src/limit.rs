//! The limiting probability `p(∞,k) = 1 − i(∞,k)` as an exact exponential
//! polynomial, and its certified decimal evaluation.
//!
//! Each table row `r` contributes `x_1(r)·…·x_{k−1}(r)·e^{−1/k}` where
//!
//! ```text
//! x_j(r) = e^{−1/j} / (j^{m_j} m_j!)                        if m_j < ⌊k/j⌋
//! x_j(r) = 1 − e^{−1/j} Σ_{0≤i<⌊k/j⌋} 1/(j^i i!)            if m_j = ⌊k/j⌋
//! ```
//!
//! Summation is exact. All per-position coefficients share the denominator
//! `L_j = j^{M−1}(M−1)!` with `M = ⌊k/j⌋`, so rows are accumulated as big
//! integer numerators over `Π_j L_j` and reduced once at the end.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::ball::Ball;
use crate::decimal::HighPrecisionDecimal;
use crate::error::{invalid, Result};
use crate::exppoly::{bit, ExpPoly, Mask};
use crate::table::{self, upper_bound, Row, TableStats};

fn factorial(n: u32) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |a, i| a * i)
}

/// `1/(j^m m!)`.
fn inverse_weight(j: u32, m: u32) -> BigRational {
    let den = BigUint::from(j).pow(m) * factorial(m);
    BigRational::new(BigInt::one(), den.into())
}

/// `x_j` for a row of the table with parameter `k`.
///
/// Panics unless `1 ≤ j ≤ k` and `m ≤ ⌊k/j⌋`.
pub fn row_factor(k: u32, j: u32, m: u32) -> ExpPoly {
    assert!(j >= 1 && j <= k, "position {j} outside 1..={k}");
    let cap = k / j;
    assert!(m <= cap, "multiplicity {m} exceeds {cap} at position {j}");
    if m < cap {
        ExpPoly::term(inverse_weight(j, m), bit(j))
    } else {
        let partial = (0..cap).fold(BigRational::zero(), |a, i| a + inverse_weight(j, i));
        let mut p = ExpPoly::one();
        p.add_term(bit(j), -partial);
        p
    }
}

/// Exact contribution of one row, including the `e^{−1/k}` factor for the
/// omitted `k`-th position.
pub fn row_contribution(k: u32, row: &Row) -> ExpPoly {
    assert_eq!(row.k(), k, "row built for a different k");
    let mut p = ExpPoly::exp_neg_inv(k);
    for j in 1..k {
        p = &p * &row_factor(k, j, row.get(j));
    }
    p
}

enum Factor {
    Single(BigUint),
    /// `keep` multiplies the term without `e^{−1/j}`, `tail` (negated) the
    /// term with it.
    Capped {
        keep: BigUint,
        tail: BigUint,
    },
}

/// Integer numerators of every `row_factor` over the position denominators.
struct FactorTable {
    k: u32,
    full_mask: Mask,
    denominator: BigUint,
    /// `factors[j-1][m]`
    factors: Vec<Vec<Factor>>,
}

impl FactorTable {
    fn new(k: u32) -> Self {
        let mut denominator = BigUint::one();
        let mut factors = Vec::new();
        for j in 1..k {
            let cap = k / j;
            let l = BigUint::from(j).pow(cap - 1) * factorial(cap - 1);
            let weight = |i: u32| &l / (BigUint::from(j).pow(i) * factorial(i));
            let row: Vec<Factor> = (0..=upper_bound(k, j))
                .map(|m| {
                    if m < cap {
                        Factor::Single(weight(m))
                    } else {
                        Factor::Capped {
                            keep: l.clone(),
                            tail: (0..cap).map(weight).sum(),
                        }
                    }
                })
                .collect();
            denominator *= &l;
            factors.push(row);
        }
        let full_mask = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        FactorTable {
            k,
            full_mask,
            denominator,
            factors,
        }
    }
}

/// Sparse `mask → numerator` accumulator over the table denominator.
type Numerators = HashMap<Mask, BigInt>;

fn accumulate(table: &FactorTable, acc: &mut Numerators, row: &Row) {
    let mut single = BigUint::one();
    let mut capped: Vec<(u32, &BigUint, &BigUint)> = Vec::new();
    for j in 1..table.k {
        match &table.factors[j as usize - 1][row.get(j) as usize] {
            Factor::Single(w) => {
                if !w.is_one() {
                    single *= w;
                }
            }
            Factor::Capped { keep, tail } => capped.push((j, keep, tail)),
        }
    }
    // expand Π (keep − tail·e^{−1/j}) over the capped positions
    let mut terms: Vec<(Mask, BigInt)> = vec![(table.full_mask, BigInt::from(single))];
    for (j, keep, tail) in capped {
        let mut next = Vec::with_capacity(terms.len() * 2);
        for (mask, c) in terms {
            next.push((mask & !bit(j), &c * BigInt::from(keep.clone())));
            next.push((mask, -(c * BigInt::from(tail.clone()))));
        }
        terms = next;
    }
    for (mask, c) in terms {
        *acc.entry(mask).or_insert_with(BigInt::zero) += c;
    }
}

fn into_poly(table: &FactorTable, acc: Numerators) -> ExpPoly {
    let den = BigInt::from(table.denominator.clone());
    let mut poly = ExpPoly::zero();
    for (mask, num) in acc {
        poly.add_term(mask, BigRational::new(num, den.clone()));
    }
    poly
}

/// `p(∞,k)` as an exact exponential polynomial, with the table counters.
///
/// With `parallel` the table is split by `m_1` across the current rayon
/// pool; exact summation makes the result identical to the serial run.
pub fn survival_with_stats(k: u32, parallel: bool) -> Result<(ExpPoly, TableStats)> {
    let table = FactorTable::new_checked(k)?;
    if parallel {
        let (parts, stats) =
            table::fold_rows_par(k, Numerators::new, |acc, row| accumulate(&table, acc, row))?;
        let mut total = Numerators::new();
        for part in parts {
            for (mask, c) in part {
                *total.entry(mask).or_insert_with(BigInt::zero) += c;
            }
        }
        Ok((into_poly(&table, total), stats))
    } else {
        let mut acc = Numerators::new();
        let stats = table::enumerate_rows(k, |row| accumulate(&table, &mut acc, row))?;
        Ok((into_poly(&table, acc), stats))
    }
}

impl FactorTable {
    fn new_checked(k: u32) -> Result<Self> {
        if k == 0 || k > crate::MAX_TABLE_K {
            return Err(invalid(format!(
                "k must be in 1..={}, got {k}",
                crate::MAX_TABLE_K
            )));
        }
        Ok(FactorTable::new(k))
    }
}

/// `p(∞,k)`, the limiting probability that no `k`-set is fixed.
pub fn limiting_survival(k: u32) -> Result<ExpPoly> {
    Ok(survival_with_stats(k, false)?.0)
}

/// Working precision for a `digits`-place evaluation of `p`: the decimal
/// target plus room for the coefficient mass and the number of terms.
fn start_bits(p: &ExpPoly, digits: u32) -> u32 {
    let mass = p.coefficient_mass();
    let mass_bits = (mass.numer().bits() as i64 - mass.denom().bits() as i64).max(0) as u32;
    let term_bits = (p.len().max(1) as f64).log2().ceil() as u32;
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + mass_bits + term_bits + 32
}

/// `p` rounded to `digits` places, every digit certified.
pub fn evaluate(p: &ExpPoly, digits: u32) -> HighPrecisionDecimal {
    HighPrecisionDecimal::certify(digits, start_bits(p, digits), |prec| p.enclose(prec))
}

/// `1 − p`, i.e. `i(∞,k)` when `p = p(∞,k)`.
pub fn complement_enclosure(p: &ExpPoly, prec: u32) -> Ball {
    Ball::from_i64(1, prec).sub(&p.enclose(prec))
}

pub fn fix_probability_from_survival(p: &ExpPoly, digits: u32) -> HighPrecisionDecimal {
    HighPrecisionDecimal::certify(digits, start_bits(p, digits), |prec| {
        complement_enclosure(p, prec)
    })
}

/// `i(∞,k)` to `digits` places.
pub fn limiting_fix_probability(k: u32, digits: u32) -> Result<HighPrecisionDecimal> {
    check_digits(digits)?;
    Ok(fix_probability_from_survival(
        &limiting_survival(k)?,
        digits,
    ))
}

fn check_digits(digits: u32) -> Result<()> {
    if digits == 0 {
        return Err(invalid("digits must be at least 1"));
    }
    Ok(())
}

/// Certified ordering of the values of two exponential polynomials.
/// `None` only if they agree to well beyond 1000 bits.
pub fn compare_values(a: &ExpPoly, b: &ExpPoly) -> Option<Ordering> {
    let mut prec = start_bits(a, 10).max(start_bits(b, 10));
    while prec <= 4096 {
        if let Some(o) = a.enclose(prec).compare(&b.enclose(prec)) {
            return Some(o);
        }
        prec *= 2;
    }
    None
}

/// `δ = 1 − (1 + ln ln 2)/ln 2`.
pub fn delta_enclosure(prec: u32) -> Ball {
    let one = Ball::from_i64(1, prec);
    let ln2 = Ball::ln2(prec);
    one.sub(&one.add(&ln2.ln()).div(&ln2))
}

pub fn efg_delta(digits: u32) -> HighPrecisionDecimal {
    HighPrecisionDecimal::certify(digits, 64, delta_enclosure)
}

/// `i(∞,k) · k^δ · (ln k)^{3/2}` given `p(∞,k)`.
pub fn ratio_from_survival(k: u32, p: &ExpPoly, digits: u32) -> Result<HighPrecisionDecimal> {
    if k < 2 {
        return Err(invalid(format!("the ratio needs k >= 2, got {k}")));
    }
    check_digits(digits)?;
    Ok(HighPrecisionDecimal::certify(
        digits,
        start_bits(p, digits),
        |prec| {
            let i = complement_enclosure(p, prec);
            let ln_k = Ball::from_i64(k as i64, prec).ln();
            let k_delta = delta_enclosure(prec).mul(&ln_k).exp();
            i.mul(&k_delta).mul(&ln_k).mul(&ln_k.sqrt())
        },
    ))
}

/// `i(∞,k) / (k^{−δ} (ln k)^{−3/2})`, `k ≥ 2`.
pub fn efg_ratio(k: u32, digits: u32) -> Result<HighPrecisionDecimal> {
    if k < 2 {
        return Err(invalid(format!("the ratio needs k >= 2, got {k}")));
    }
    ratio_from_survival(k, &limiting_survival(k)?, digits)
}

/// Approximate value, for diagnostics only.
pub fn approx(p: &ExpPoly) -> f64 {
    p.enclose(96).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::exponent;
    use crate::table::collect_rows;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn mask(js: &[u32]) -> Mask {
        js.iter().fold(0, |m, &j| m | bit(j))
    }

    #[test]
    fn factor_branches() {
        let f = row_factor(4, 3, 1);
        assert_eq!(f, &ExpPoly::one() - &ExpPoly::exp_neg_inv(3));
        assert_eq!(row_factor(4, 1, 0), ExpPoly::exp_neg_inv(1));
        assert_eq!(row_factor(4, 2, 1), ExpPoly::term(r(1, 2), bit(2)));
        // the capped branch at j=2: 1 − (1 + 1/2)e^{−1/2}
        let mut capped = ExpPoly::one();
        capped.add_term(bit(2), r(-3, 2));
        assert_eq!(row_factor(4, 2, 2), capped);
    }

    #[test]
    #[should_panic]
    fn factor_out_of_range() {
        row_factor(4, 2, 3);
    }

    #[test]
    fn k4_row_contributions() {
        let row = Row::new(4, vec![0, 1, 1]);
        let mut expect = ExpPoly::term(r(1, 2), mask(&[1, 2, 4]));
        expect.add_term(mask(&[1, 2, 3, 4]), r(-1, 2));
        assert_eq!(row_contribution(4, &row), expect);
        assert_eq!(
            row_contribution(4, &Row::new(4, vec![3, 0, 0])),
            ExpPoly::term(r(1, 6), mask(&[1, 2, 3, 4]))
        );
        assert_eq!(
            row_contribution(1, &Row::new(1, vec![])),
            ExpPoly::exp_neg_inv(1)
        );
    }

    #[test]
    fn k4_closed_form() {
        let p = limiting_survival(4).unwrap();
        let mut expect = ExpPoly::term(r(3, 2), mask(&[1, 2, 4]));
        expect.add_term(mask(&[1, 2, 3, 4]), r(13, 6));
        assert_eq!(p, expect);
        assert_eq!(evaluate(&p, 6).as_str(), "0.530442");
    }

    #[test]
    fn fast_accumulator_matches_symbolic_products() {
        for k in 1..=11 {
            let mut slow = ExpPoly::zero();
            for row in collect_rows(k).unwrap() {
                slow = &slow + &row_contribution(k, &row);
            }
            assert_eq!(limiting_survival(k).unwrap(), slow, "k={k}");
            let (par, _) = survival_with_stats(k, true).unwrap();
            assert_eq!(par, slow);
        }
    }

    #[test]
    fn coefficient_sums_per_row() {
        // exponentials ↦ 1: capped factors become 1 − partial sum,
        // uncapped become their rational weight
        for k in 2..=9 {
            for row in collect_rows(k).unwrap() {
                let mut expect = BigRational::one();
                for j in 1..k {
                    let m = row.get(j);
                    if row.is_capped(j) {
                        let partial =
                            (0..k / j).fold(BigRational::zero(), |a, i| a + inverse_weight(j, i));
                        expect *= BigRational::one() - partial;
                    } else {
                        expect *= inverse_weight(j, m);
                    }
                }
                assert_eq!(row_contribution(k, &row).coefficient_sum(), expect);
            }
        }
    }

    #[test]
    fn exponents_are_subsets_of_1_to_k() {
        let p = limiting_survival(9).unwrap();
        for (m, _) in p.terms() {
            assert_eq!(m & !((1 << 9) - 1), 0);
            assert!(exponent(m) > BigRational::zero());
        }
    }

    #[test]
    fn small_k_values() {
        assert_eq!(
            evaluate(&limiting_survival(1).unwrap(), 8).as_str(),
            "0.36787944"
        );
        assert_eq!(
            evaluate(&limiting_survival(2).unwrap(), 8).as_str(),
            "0.44626032"
        );
        assert_eq!(
            limiting_fix_probability(1, 8).unwrap().as_str(),
            "0.63212056"
        );
        assert_eq!(
            limiting_fix_probability(4, 8).unwrap().as_str(),
            "0.46955773"
        );
        assert_eq!(
            limiting_fix_probability(12, 8).unwrap().as_str(),
            "0.36119415"
        );
        assert!(limiting_fix_probability(0, 8).is_err());
        assert!(limiting_fix_probability(3, 0).is_err());
    }

    #[test]
    fn zero_polynomial() {
        assert_eq!(
            evaluate(&ExpPoly::zero(), 20).as_str(),
            "0.00000000000000000000"
        );
    }

    #[test]
    fn delta_value() {
        assert_eq!(efg_delta(4).as_str(), "0.0861");
    }

    #[test]
    fn ratio_rejects_k1() {
        assert!(efg_ratio(1, 8).is_err());
    }

    #[test]
    fn digits_are_prefix_consistent() {
        let p = limiting_survival(7).unwrap();
        let long = evaluate(&p, 30);
        for d in [5, 8, 12, 20] {
            let short = evaluate(&p, d);
            let reround =
                HighPrecisionDecimal::from_rational(&decimal_to_rational(long.as_str()), d);
            assert_eq!(short, reround, "d={d}");
        }
    }

    fn decimal_to_rational(s: &str) -> BigRational {
        let (int, frac) = s.split_once('.').unwrap();
        let num: BigInt = format!("{int}{frac}").parse().unwrap();
        BigRational::new(num, BigInt::from(10u32).pow(frac.len() as u32))
    }
}

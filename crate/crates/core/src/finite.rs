//! Exact `i(n,k)` by summing over cycle types.
//!
//! A permutation of cycle type `λ` fixes a `k`-set exactly when `λ` has a
//! subpartition of size `k`, and a uniform permutation has type `λ` with
//! probability `1/z_λ`. Working with class sizes `n!/z_λ` keeps every sum an
//! integer; `i(n,k)` is the count divided by `n!`.
//!
//! One pass over the partitions of `n` serves every `k` at once: each
//! partition's reachable subpartition sizes are computed once and its class
//! size is credited to the resulting pattern of `k` values.

use std::collections::{BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::decimal::HighPrecisionDecimal;
use crate::error::{invalid, Result};
use crate::partition::{subpartition_sums, universality_index, universality_of, Multiplicities};

/// `i(n,k)` and `p(n,k)` as exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteResult {
    pub n: u32,
    pub k: u32,
    pub fix_probability: BigRational,
    pub survival: BigRational,
}

fn factorial(n: u32) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |a, i| a * i)
}

struct PartitionWalk<'a, F> {
    ms: Multiplicities,
    sink: &'a mut F,
    count: u64,
}

impl<F: FnMut(&Multiplicities)> PartitionWalk<'_, F> {
    fn go(&mut self, rem: u32, max: u32) {
        if rem == 0 {
            self.count += 1;
            (self.sink)(&self.ms);
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            self.ms.as_mut_vec()[p as usize - 1] += 1;
            self.go(rem - p, p);
            self.ms.as_mut_vec()[p as usize - 1] -= 1;
        }
    }
}

/// Streams every partition of `n` in decreasing lexicographic order of its
/// part list (`[n]` first, `[1, …, 1]` last). Returns the number of
/// partitions. The multiplicity vectors have length `n`.
pub fn partitions_of<F: FnMut(&Multiplicities)>(n: u32, mut sink: F) -> Result<u64> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let mut walk = PartitionWalk {
        ms: Multiplicities::new(vec![0; n as usize]),
        sink: &mut sink,
        count: 0,
    };
    walk.go(n, n);
    Ok(walk.count)
}

/// Bit `k − 1` set when the cycle type fixes a `k`-set, for `k ≤ k_max`.
type Pattern = u128;
type PatternSums = HashMap<Pattern, BigUint>;

/// Walk specialised to `k_max < 128`: reachable sums are a `u128` carried
/// down the recursion, and the class size `n!/z` is divided down as parts
/// are appended (every partial centralizer divides `n!`).
struct CountWalk {
    k_max: u32,
    sums_mask: u128,
    ms: Vec<u32>,
    out: PatternSums,
}

impl CountWalk {
    fn go(&mut self, rem: u32, max: u32, sums: u128, class: &BigUint) {
        if rem == 0 {
            let univ = universality_of(&self.ms);
            let pattern = if univ >= self.k_max as u64 {
                (1u128 << self.k_max) - 1
            } else {
                let reach = (sums >> 1) & ((1u128 << self.k_max) - 1);
                reach | ((1u128 << univ) - 1)
            };
            *self.out.entry(pattern).or_insert_with(BigUint::zero) += class;
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            self.step(rem, p, sums, class);
        }
    }

    fn step(&mut self, rem: u32, p: u32, sums: u128, class: &BigUint) {
        let slot = p as usize - 1;
        self.ms[slot] += 1;
        let c = self.ms[slot];
        let next_sums = if p <= self.k_max {
            sums | ((sums << p) & self.sums_mask)
        } else {
            sums
        };
        let next_class = class / (p as u64 * c as u64);
        self.go(rem - p, p, next_sums, &next_class);
        self.ms[slot] -= 1;
    }
}

/// Permutations of degree `n` fixing at least one `k`-set, for
/// `k = 1..=k_max` (index `k − 1`).
pub fn fix_counts(n: u32, k_max: u32, parallel: bool) -> Result<Vec<BigUint>> {
    if n == 0 || k_max == 0 || k_max > n {
        return Err(invalid(format!(
            "need 1 <= k_max <= n, got n={n}, k_max={k_max}"
        )));
    }
    if k_max >= 127 {
        return Ok(fix_counts_generic(n, k_max));
    }
    let nfact = factorial(n);
    let sums_mask = (1u128 << (k_max + 1)) - 1;
    let subtree = |first: u32| {
        let mut walk = CountWalk {
            k_max,
            sums_mask,
            ms: vec![0; n as usize],
            out: PatternSums::new(),
        };
        walk.step(n, first, 1, &nfact);
        walk.out
    };
    let parts: Vec<PatternSums> = if parallel {
        (1..=n).into_par_iter().map(subtree).collect()
    } else {
        (1..=n).map(subtree).collect()
    };
    let mut counts = vec![BigUint::zero(); k_max as usize];
    for part in parts {
        for (pattern, class) in part {
            for (k, slot) in counts.iter_mut().enumerate() {
                if pattern >> k & 1 == 1 {
                    *slot += &class;
                }
            }
        }
    }
    Ok(counts)
}

fn fix_counts_generic(n: u32, k_max: u32) -> Vec<BigUint> {
    let nfact = factorial(n);
    let mut counts = vec![BigUint::zero(); k_max as usize];
    partitions_of(n, |ms| {
        let class = &nfact / crate::partition::centralizer_size(ms);
        let univ = universality_index(ms);
        let sums = subpartition_sums(ms, k_max as usize);
        for k in 1..=k_max {
            if univ >= k as u64 || sums.contains(k as usize) {
                counts[k as usize - 1] += &class;
            }
        }
    })
    .expect("n validated");
    counts
}

fn ratio(count: &BigUint, nfact: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(count.clone()), BigInt::from(nfact.clone()))
}

/// Exact `i(n,k)` and `p(n,k)`, `1 ≤ k ≤ n`.
pub fn finite_fix_probability(n: u32, k: u32) -> Result<FiniteResult> {
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    let counts = fix_counts(n, k, false)?;
    let fix_probability = ratio(&counts[k as usize - 1], &factorial(n));
    let survival = BigRational::one() - &fix_probability;
    Ok(FiniteResult {
        n,
        k,
        fix_probability,
        survival,
    })
}

/// One row of the finite table: `i(n,k)` for `k = 1..=min(⌊n/2⌋, k_max)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteRow {
    pub n: u32,
    pub values: Vec<BigRational>,
}

impl FiniteRow {
    pub fn fix_decimals(&self, digits: u32) -> Vec<HighPrecisionDecimal> {
        self.values
            .iter()
            .map(|v| HighPrecisionDecimal::from_rational(v, digits))
            .collect()
    }

    pub fn survival_decimals(&self, digits: u32) -> Vec<HighPrecisionDecimal> {
        self.values
            .iter()
            .map(|v| HighPrecisionDecimal::from_rational(&(BigRational::one() - v), digits))
            .collect()
    }
}

/// `i(n,k)` for `2 ≤ n ≤ n_max` and `1 ≤ k ≤ min(⌊n/2⌋, k_max)`.
pub fn finite_table(n_max: u32, k_max: u32, parallel: bool) -> Result<Vec<FiniteRow>> {
    if n_max < 2 || k_max == 0 {
        return Err(invalid("need n_max >= 2 and k_max >= 1"));
    }
    (2..=n_max)
        .map(|n| {
            let top = (n / 2).min(k_max);
            let counts = fix_counts(n, top, parallel)?;
            let nfact = factorial(n);
            Ok(FiniteRow {
                n,
                values: counts.iter().map(|c| ratio(c, &nfact)).collect(),
            })
        })
        .collect()
}

/// Pairs `(n, k)` with `n ≤ n_max`, both `k` and `k + 1` in the tabulated
/// range (`2(k+1) ≤ n`), and `i(n,k) < i(n,k+1)`. Compared exactly.
pub fn exceptions(n_max: u32, parallel: bool) -> Result<BTreeSet<(u32, u32)>> {
    if n_max < 4 {
        return Err(invalid(format!("n_max must be at least 4, got {n_max}")));
    }
    let mut out = BTreeSet::new();
    for n in 4..=n_max {
        let counts = fix_counts(n, n / 2, parallel)?;
        for k in 1..n / 2 {
            if counts[k as usize - 1] < counts[k as usize] {
                out.insert((n, k));
            }
        }
    }
    Ok(out)
}

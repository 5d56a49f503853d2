//! Partitions in multiplicity form and the `k`-free tests.
//!
//! A partition `(1^{m_1}, 2^{m_2}, …, ℓ^{m_ℓ})` is stored as the dense vector
//! `(m_1, …, m_ℓ)`. A partition is `k`-free when no sub-multiset of its parts
//! sums to `k`. Deciding this goes through three stages, cheapest first:
//!
//! 1. the prefix-sum universality criterion (`≥ k` means every size up to `k`
//!    is reachable, so the partition is not `k`-free);
//! 2. divisibility pruning (all parts share a divisor that does not divide
//!    `k`, so `k` is unreachable);
//! 3. an exact bounded-knapsack bit-vector over `{0, …, k}`.

use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigUint;
use num_traits::One;

/// Cycle-count multiplicities: position `j` (1-based) holds the number of
/// parts of size `j`. Trailing zeros are inert.
#[derive(Clone, Default)]
pub struct Multiplicities(Vec<u32>);

impl Multiplicities {
    pub fn new(ms: Vec<u32>) -> Self {
        Multiplicities(ms)
    }

    /// Builds the multiplicity vector of a list of positive part sizes.
    pub fn from_parts(parts: &[u32]) -> Self {
        let max = parts.iter().copied().max().unwrap_or(0) as usize;
        let mut ms = vec![0u32; max];
        for &p in parts {
            assert!(p > 0, "part sizes must be positive");
            ms[p as usize - 1] += 1;
        }
        Multiplicities(ms)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub(crate) fn as_mut_vec(&mut self) -> &mut Vec<u32> {
        &mut self.0
    }

    /// Stored length `ℓ`, including any trailing zeros.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `m_j` for 1-based `j`; zero beyond the stored length.
    pub fn get(&self, j: usize) -> u32 {
        if j == 0 {
            return 0;
        }
        self.0.get(j - 1).copied().unwrap_or(0)
    }

    /// `Σ j·m_j`.
    pub fn size(&self) -> u64 {
        self.iter().map(|(j, m)| j as u64 * m as u64).sum()
    }

    /// Iterates `(j, m_j)` pairs, `j` starting at 1.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().enumerate().map(|(i, &m)| (i + 1, m))
    }

    /// Part sizes in decreasing order.
    pub fn parts(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (j, m) in self.iter().collect::<Vec<_>>().into_iter().rev() {
            out.extend(std::iter::repeat_n(j as u32, m as usize));
        }
        out
    }

    fn trimmed(&self) -> &[u32] {
        let end = self.0.iter().rposition(|&m| m != 0).map_or(0, |p| p + 1);
        &self.0[..end]
    }
}

impl PartialEq for Multiplicities {
    fn eq(&self, other: &Self) -> bool {
        self.trimmed() == other.trimmed()
    }
}

impl Eq for Multiplicities {}

impl Hash for Multiplicities {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.trimmed().hash(state);
    }
}

impl fmt::Debug for Multiplicities {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multiplicities{:?}", self.0)
    }
}

impl From<Vec<u32>> for Multiplicities {
    fn from(v: Vec<u32>) -> Self {
        Multiplicities(v)
    }
}

/// Largest `s` such that `Σ_{j ≤ min(u, ℓ)} j·m_j ≥ u` for every `u ≤ s`.
///
/// When the prefix condition holds all the way to `ℓ` the result is the
/// total size of the partition. Every size up to the returned value is the
/// size of some subpartition.
pub fn universality_index(ms: &Multiplicities) -> u64 {
    universality_of(ms.as_slice())
}

pub(crate) fn universality_of(ms: &[u32]) -> u64 {
    let mut prefix = 0u64;
    for (i, &m) in ms.iter().enumerate() {
        let j = i + 1;
        let next = prefix + j as u64 * m as u64;
        if next < j as u64 {
            return prefix;
        }
        prefix = next;
    }
    prefix
}

/// Sufficient test for `k`-freeness: some `d ∈ {2, …, ⌊k/2⌋}` with `d ∤ k`
/// divides every part size that occurs in `ms`.
pub fn divisibility_free(k: u32, ms: &Multiplicities) -> bool {
    (2..=k / 2).any(|d| {
        !k.is_multiple_of(d)
            && ms
                .iter()
                .all(|(j, m)| m == 0 || (j as u32).is_multiple_of(d))
    })
}

/// A bit-vector over `{0, …, cap}`.
#[derive(Clone, PartialEq, Eq)]
pub struct SumSet {
    cap: usize,
    words: Vec<u64>,
}

impl SumSet {
    /// The set `{0}`.
    pub fn zero(cap: usize) -> Self {
        let mut words = vec![0u64; cap / 64 + 1];
        words[0] = 1;
        SumSet { cap, words }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn contains(&self, s: usize) -> bool {
        s <= self.cap && self.words[s / 64] >> (s % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.cap).filter(move |&s| self.contains(s))
    }

    /// True when every size in `{0, …, t}` is present.
    pub fn covers_prefix(&self, t: usize) -> bool {
        (0..=t).all(|s| self.contains(s))
    }

    /// Adds up to `count` parts of size `part`: `self ← ⋃_{a ≤ count} (self + a·part)`.
    pub fn add_parts(&mut self, part: usize, count: u32) {
        if part == 0 || part > self.cap {
            return;
        }
        let reps = (count as usize).min(self.cap / part);
        for _ in 0..reps {
            let before = self.words.clone();
            self.or_shifted(&before, part);
            if self.words == before {
                break;
            }
        }
    }

    fn or_shifted(&mut self, src: &[u64], shift: usize) {
        let (ws, bs) = (shift / 64, shift % 64);
        for i in (ws..self.words.len()).rev() {
            let mut v = src[i - ws] << bs;
            if bs != 0 && i > ws {
                v |= src[i - ws - 1] >> (64 - bs);
            }
            self.words[i] |= v;
        }
        self.mask_tail();
    }

    fn mask_tail(&mut self) {
        let used = self.cap % 64 + 1;
        if used < 64 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << used) - 1;
        }
    }
}

impl fmt::Debug for SumSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// All subpartition sizes of `ms` that do not exceed `cap`.
pub fn subpartition_sums(ms: &Multiplicities, cap: usize) -> SumSet {
    let mut set = SumSet::zero(cap);
    for (j, m) in ms.iter() {
        if m > 0 {
            set.add_parts(j, m);
        }
    }
    set
}

/// Which stage of the `k`-free test settled the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Universality index reached `k`: not `k`-free.
    Universal,
    /// Some `d ∤ k` divides every part size: `k`-free.
    Divisible,
    /// Decided by the exact bit-vector; the flag is `k`-freeness.
    Searched(bool),
}

impl Verdict {
    pub fn is_k_free(self) -> bool {
        match self {
            Verdict::Universal => false,
            Verdict::Divisible => true,
            Verdict::Searched(free) => free,
        }
    }
}

/// Runs the three-stage test and reports which stage decided.
pub fn classify(k: u32, ms: &Multiplicities) -> Verdict {
    if universality_index(ms) >= k as u64 {
        Verdict::Universal
    } else if divisibility_free(k, ms) {
        Verdict::Divisible
    } else {
        Verdict::Searched(!subpartition_sums(ms, k as usize).contains(k as usize))
    }
}

/// True when no subpartition of `ms` has size `k`.
pub fn is_k_free(k: u32, ms: &Multiplicities) -> bool {
    classify(k, ms).is_k_free()
}

/// `Π_j j^{m_j} · m_j!`, the order of the centralizer of a permutation with
/// cycle type `ms`.
pub fn centralizer_size(ms: &Multiplicities) -> BigUint {
    let mut z = BigUint::one();
    for (j, m) in ms.iter() {
        for c in 1..=m as u64 {
            z *= j as u64 * c;
        }
    }
    z
}

/// Incremental form of [`classify`] for a partial row built position by
/// position, `k ≤ 64`. Each push is O(1) apart from the bounded knapsack.
#[derive(Debug, Clone, Copy)]
pub struct PrefixState {
    k: u32,
    len: u32,
    prefix: u64,
    /// Universality index once the prefix condition has failed.
    broken: Option<u64>,
    /// Bit `d` set while `d` is still a candidate divisor.
    divisors: u64,
    /// Reachable subpartition sizes, bit `s` for size `s ≤ k`.
    sums: u128,
}

impl PrefixState {
    pub fn new(k: u32) -> Self {
        assert!((1..=crate::MAX_TABLE_K).contains(&k), "k out of range");
        let mut divisors = 0u64;
        for d in 2..=k / 2 {
            if !k.is_multiple_of(d) {
                divisors |= 1 << d;
            }
        }
        PrefixState {
            k,
            len: 0,
            prefix: 0,
            broken: None,
            divisors,
            sums: 1,
        }
    }

    /// Appends `m` parts of size `len + 1`.
    pub fn push(&self, m: u32) -> Self {
        let j = self.len + 1;
        let mut next = *self;
        next.len = j;
        let total = self.prefix + j as u64 * m as u64;
        if next.broken.is_none() && total < j as u64 {
            next.broken = Some(self.prefix);
        }
        next.prefix = total;
        if m > 0 {
            let mut keep = 0u64;
            let mut bits = next.divisors;
            while bits != 0 {
                let d = bits.trailing_zeros();
                bits &= bits - 1;
                if j.is_multiple_of(d) {
                    keep |= 1 << d;
                }
            }
            next.divisors = keep;
            let mask = (1u128 << (self.k + 1)) - 1;
            let reps = m.min(self.k / j);
            for _ in 0..reps {
                next.sums |= (next.sums << j) & mask;
            }
        }
        next
    }

    pub fn universality_index(&self) -> u64 {
        self.broken.unwrap_or(self.prefix)
    }

    pub fn verdict(&self) -> Verdict {
        if self.universality_index() >= self.k as u64 {
            Verdict::Universal
        } else if self.divisors != 0 {
            Verdict::Divisible
        } else {
            Verdict::Searched(self.sums >> self.k & 1 == 0)
        }
    }
}

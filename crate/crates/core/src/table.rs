//! The derangements table: every `k`-free row `(m_1, …, m_{k−1})` with
//! `0 ≤ m_j < k/j`, in lexicographic order from greatest to least.
//!
//! The `k`-th position is always zero (a `k`-cycle is itself a fixed
//! `k`-set) and is not stored. Enumeration is a depth-first search: at each
//! position the largest admissible `m` keeping the partial row `k`-free is
//! found by testing candidates downward, after which every smaller value is
//! also `k`-free and is visited without further tests.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::partition::{Multiplicities, PrefixState, Verdict};
use crate::MAX_TABLE_K;

/// One full row of the table for parameter `k`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Row {
    k: u32,
    ms: Multiplicities,
}

impl Row {
    pub fn new(k: u32, ms: Vec<u32>) -> Self {
        assert_eq!(ms.len() + 1, k as usize, "a row has k-1 positions");
        Row {
            k,
            ms: Multiplicities::new(ms),
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn multiplicities(&self) -> &Multiplicities {
        &self.ms
    }

    pub fn as_slice(&self) -> &[u32] {
        self.ms.as_slice()
    }

    /// `m_j` for `1 ≤ j ≤ k`; `m_k` is always zero.
    pub fn get(&self, j: u32) -> u32 {
        self.ms.get(j as usize)
    }

    /// Position `j` carries the maximal multiplicity `⌊k/j⌋`, so the row
    /// stands for every partition with at least that many `j`-parts.
    pub fn is_capped(&self, j: u32) -> bool {
        self.get(j) == self.k / j
    }

    /// Comma-separated multiplicities, as written by `--emit-rows`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (i, m) in self.as_slice().iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&m.to_string());
        }
        s
    }
}

/// Counters for one run of the enumeration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TableStats {
    pub rows_emitted: u64,
    /// Candidate partial rows tested while searching for the maximal `m`.
    pub partials_considered: u64,
    pub pruned_universal: u64,
    pub pruned_divisibility: u64,
    pub full_tests: u64,
}

impl TableStats {
    pub fn merge(&mut self, other: &TableStats) {
        self.rows_emitted += other.rows_emitted;
        self.partials_considered += other.partials_considered;
        self.pruned_universal += other.pruned_universal;
        self.pruned_divisibility += other.pruned_divisibility;
        self.full_tests += other.full_tests;
    }

    fn record(&mut self, verdict: Verdict) {
        self.partials_considered += 1;
        match verdict {
            Verdict::Universal => self.pruned_universal += 1,
            Verdict::Divisible => self.pruned_divisibility += 1,
            Verdict::Searched(_) => self.full_tests += 1,
        }
    }
}

/// Largest `m` with `m < k/j`.
pub fn upper_bound(k: u32, j: u32) -> u32 {
    (k - 1) / j
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 || k > MAX_TABLE_K {
        return Err(invalid(format!("k must be in 1..={MAX_TABLE_K}, got {k}")));
    }
    Ok(())
}

struct Search<'a, F> {
    k: u32,
    row: Row,
    stats: TableStats,
    sink: &'a mut F,
}

impl<F: FnMut(&Row)> Search<'_, F> {
    fn descend(&mut self, j: u32, state: PrefixState) {
        if j == self.k {
            self.stats.rows_emitted += 1;
            (self.sink)(&self.row);
            return;
        }
        let mut top = upper_bound(self.k, j);
        loop {
            let verdict = state.push(top).verdict();
            self.stats.record(verdict);
            if verdict.is_k_free() {
                break;
            }
            // m = 0 keeps a k-free prefix k-free, so this cannot underflow
            assert!(top > 0, "no k-free extension at position {j}");
            top -= 1;
        }
        for m in (0..=top).rev() {
            self.row.ms.as_mut_vec()[j as usize - 1] = m;
            self.descend(j + 1, state.push(m));
        }
        self.row.ms.as_mut_vec()[j as usize - 1] = 0;
    }

    /// The subtree of rows whose first entry is `m1`.
    fn run_from(&mut self, m1: u32) {
        let state = PrefixState::new(self.k);
        if self.k == 1 {
            self.descend(1, state);
            return;
        }
        self.row.ms.as_mut_vec()[0] = m1;
        self.descend(2, state.push(m1));
    }
}

fn search_subtree<F: FnMut(&Row)>(k: u32, m1: u32, sink: &mut F) -> TableStats {
    let mut search = Search {
        k,
        row: Row::new(k, vec![0; k as usize - 1]),
        stats: TableStats::default(),
        sink,
    };
    search.run_from(m1);
    search.stats
}

/// First-entry values in emission order. `k = 1` has a single (empty) row.
fn first_entries(k: u32) -> Vec<u32> {
    if k == 1 {
        vec![0]
    } else {
        (0..k).rev().collect()
    }
}

/// Streams every `k`-free row to `sink`, greatest first.
pub fn enumerate_rows<F: FnMut(&Row)>(k: u32, mut sink: F) -> Result<TableStats> {
    check_k(k)?;
    let mut stats = TableStats::default();
    for m1 in first_entries(k) {
        stats.merge(&search_subtree(k, m1, &mut sink));
    }
    Ok(stats)
}

/// Parallel enumeration split by the value of `m_1`.
///
/// Each subtree folds its rows into a fresh accumulator from `init`. The
/// accumulators are returned in emission order (decreasing `m_1`), so
/// concatenating or merging them left to right reproduces the serial run.
pub fn fold_rows_par<A, I, F>(k: u32, init: I, fold: F) -> Result<(Vec<A>, TableStats)>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &Row) + Sync,
{
    check_k(k)?;
    let parts: Vec<(A, TableStats)> = first_entries(k)
        .into_par_iter()
        .map(|m1| {
            let mut acc = init();
            let stats = search_subtree(k, m1, &mut |row: &Row| fold(&mut acc, row));
            (acc, stats)
        })
        .collect();
    let mut stats = TableStats::default();
    let mut accs = Vec::with_capacity(parts.len());
    for (acc, s) in parts {
        stats.merge(&s);
        accs.push(acc);
    }
    Ok((accs, stats))
}

/// Number of rows in the table for `k`.
pub fn rows_count(k: u32) -> Result<u64> {
    Ok(enumerate_rows(k, |_| {})?.rows_emitted)
}

/// Collects the whole table. Only sensible for small `k`.
pub fn collect_rows(k: u32) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    enumerate_rows(k, |r| rows.push(r.clone()))?;
    Ok(rows)
}

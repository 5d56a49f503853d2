//! Exact computation of the probability that a uniformly random permutation
//! fixes some `k`-subset of its domain.
//!
//! Two quantities are computed:
//!
//! * `i(∞,k)`, the limit as the degree grows, obtained by enumerating the
//!   `k`-free rows of the derangements table ([`table`]) and summing their
//!   exact exponential-polynomial contributions ([`limit`]);
//! * `i(n,k)` for finite `n`, obtained by summing `1/z_λ` over all cycle
//!   types `λ` of `n` that contain a subpartition of size `k` ([`finite`]).
//!
//! All accumulation is exact (big integers and rationals). Transcendental
//! values are evaluated once, at the output boundary, with certified
//! midpoint-radius arithmetic ([`ball`]) so every printed digit is correct.

pub mod ball;
pub mod cli;
pub mod decimal;
pub mod error;
pub mod exppoly;
pub mod finite;
pub mod limit;
pub mod mc;
pub mod partition;
pub mod table;

pub use decimal::HighPrecisionDecimal;
pub use error::{Error, Result};
pub use exppoly::ExpPoly;
pub use finite::{exceptions, finite_fix_probability, finite_table, partitions_of, FiniteResult};
pub use limit::{
    efg_delta, efg_ratio, evaluate, limiting_fix_probability, limiting_survival, row_contribution,
    row_factor,
};
pub use mc::{sample_finite_fix, sample_limit_survival, Estimate};
pub use partition::{
    centralizer_size, divisibility_free, is_k_free, subpartition_sums, universality_index,
    Multiplicities, SumSet,
};
pub use table::{enumerate_rows, rows_count, Row, TableStats};

/// Largest `k` accepted by the table algorithm. Exponent sets are stored as
/// `u64` bitmasks over `{1..k}`.
pub const MAX_TABLE_K: u32 = 64;

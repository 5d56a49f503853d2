//! Monte-Carlo cross-checks for both engines.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`. Samples
//! are drawn in fixed chunks of [`CHUNK`]; chunk `c` uses ChaCha stream `c`
//! of that seed, so the result depends only on `(seed, samples)` and not on
//! the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::partition::{subpartition_sums, Multiplicities};

pub const CHUNK: u64 = 1 << 16;

/// Poisson counts are capped here; at means ≤ 1 the cap is never reached.
const POISSON_CAP: u32 = 64;

/// A binomial proportion with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub hits: u64,
    pub samples: u64,
    pub estimate: f64,
    pub std_error: f64,
}

impl Estimate {
    fn new(hits: u64, samples: u64) -> Self {
        let p = hits as f64 / samples as f64;
        Estimate {
            hits,
            samples,
            estimate: p,
            std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        }
    }

    /// Distance from `target` in units of the standard error.
    pub fn sigmas_from(&self, target: f64) -> f64 {
        let d = (self.estimate - target).abs();
        if self.std_error == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.std_error
        }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        self.sigmas_from(target) <= sigmas
    }
}

/// Independent Poisson counts `X_1, …, X_k` with `E[X_j] = 1/j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonSample {
    pub counts: Multiplicities,
    /// `(seed, chunk, index within chunk)`.
    pub provenance: (u64, u64, u64),
}

fn poisson<R: Rng>(rng: &mut R, mean: f64) -> u32 {
    let u: f64 = rng.gen();
    let mut x = 0u32;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        x += 1;
        p *= mean / x as f64;
        cdf += p;
        assert!(x < POISSON_CAP, "Poisson draw reached the cap");
        if p == 0.0 {
            break;
        }
    }
    x
}

impl PoissonSample {
    pub fn draw<R: Rng>(k: u32, rng: &mut R, provenance: (u64, u64, u64)) -> Self {
        let counts = (1..=k).map(|j| poisson(rng, 1.0 / j as f64)).collect();
        PoissonSample {
            counts: Multiplicities::new(counts),
            provenance,
        }
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `hit` once per sample over deterministic chunks and counts successes.
fn count_hits<F>(samples: u64, seed: u64, hit: F) -> u64
where
    F: Fn(&mut ChaCha8Rng, u64, u64) -> bool + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len).filter(|&i| hit(&mut rng, c, i)).count() as u64
        })
        .sum()
}

/// Fraction of Poisson partitions with no subpartition of size `k`; this
/// estimates `p(∞,k)`.
pub fn sample_limit_survival(k: u32, samples: u64, seed: u64) -> Result<Estimate> {
    if k == 0 || samples == 0 {
        return Err(invalid("need k >= 1 and at least one sample"));
    }
    let hits = count_hits(samples, seed, |rng, c, i| {
        let s = PoissonSample::draw(k, rng, (seed, c, i));
        !subpartition_sums(&s.counts, k as usize).contains(k as usize)
    });
    Ok(Estimate::new(hits, samples))
}

/// Cycle type of a uniform permutation of degree `n`, built one element at
/// a time: the cycle being traced closes with probability `1/remaining`.
pub fn random_cycle_type<R: Rng>(n: u32, rng: &mut R) -> Multiplicities {
    let mut ms = vec![0u32; n as usize];
    let mut len = 0usize;
    for placed in 0..n {
        len += 1;
        let remaining = n - placed;
        if rng.gen_range(0..remaining) == 0 {
            ms[len - 1] += 1;
            len = 0;
        }
    }
    debug_assert_eq!(len, 0);
    Multiplicities::new(ms)
}

/// Fraction of uniform permutations of degree `n` fixing some `k`-set.
pub fn sample_finite_fix(n: u32, k: u32, samples: u64, seed: u64) -> Result<Estimate> {
    if k == 0 || k > n || samples == 0 {
        return Err(invalid("need 1 <= k <= n and at least one sample"));
    }
    let hits = count_hits(samples, seed, |rng, _, _| {
        let ms = random_cycle_type(n, rng);
        subpartition_sums(&ms, k as usize).contains(k as usize)
    });
    Ok(Estimate::new(hits, samples))
}

/// Empirical mean and standard error of the number of `j`-cycles,
/// `j = 1..=n`, over uniform permutations of degree `n`.
pub fn cycle_count_means(n: u32, samples: u64, seed: u64) -> Result<Vec<(f64, f64)>> {
    if n == 0 || samples == 0 {
        return Err(invalid("need n >= 1 and at least one sample"));
    }
    let chunks = samples.div_ceil(CHUNK);
    let zero = || (vec![0u64; n as usize], vec![0u64; n as usize]);
    let (sum, sq) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let (mut s, mut q) = zero();
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let ms = random_cycle_type(n, &mut rng);
                for (j, m) in ms.iter() {
                    s[j - 1] += m as u64;
                    q[j - 1] += m as u64 * m as u64;
                }
            }
            (s, q)
        })
        .reduce(zero, |(mut a, mut b), (c, d)| {
            for i in 0..a.len() {
                a[i] += c[i];
                b[i] += d[i];
            }
            (a, b)
        });
    let s = samples as f64;
    Ok(sum
        .iter()
        .zip(&sq)
        .map(|(&a, &b)| {
            let mean = a as f64 / s;
            let var = (b as f64 / s - mean * mean).max(0.0);
            (mean, (var / s).sqrt())
        })
        .collect())
}

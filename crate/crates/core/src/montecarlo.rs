//! Monte Carlo estimate of the collision probability.
//!
//! Randomness comes from ChaCha8 (a counter-based stream cipher). A run with
//! seed `s` is cut into fixed blocks of [`BLOCK_SIZE`] trials; block `b`
//! draws from the ChaCha8 stream keyed by `s` with stream id `b`. Blocks are
//! shared out to rayon workers and merged by summing counts, so the result
//! depends only on `(n, trials, sampler, seed)` and never on the number of
//! threads.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Trials per independent random stream.
pub const BLOCK_SIZE: u64 = 1 << 16;

/// Largest `n` for which [`SamplerKind::default_for`] picks the direct
/// permutation sampler.
pub const DIRECT_SAMPLER_LIMIT: u64 = 10_000;

/// Root seed of a simulation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Generator for block `index` of a run.
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// How a cycle count is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Shuffle `0..n` (Fisher–Yates) and count cycles by traversal.
    PermutationDirect,
    /// `1 + Σ_{j=2}^{n} Bernoulli(1/j)`, the Feller coupling. `O(n)` time
    /// and `O(1)` memory.
    BernoulliSum,
}

impl SamplerKind {
    pub fn default_for(n: u64) -> Self {
        if n > DIRECT_SAMPLER_LIMIT {
            SamplerKind::BernoulliSum
        } else {
            SamplerKind::PermutationDirect
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerKind::PermutationDirect => "permutation",
            SamplerKind::BernoulliSum => "bernoulli",
        })
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "permutation" | "permutation_direct" => Ok(SamplerKind::PermutationDirect),
            "bernoulli" | "bernoulli_sum" => Ok(SamplerKind::BernoulliSum),
            other => Err(Error::config(format!("unknown sampler {other:?}"))),
        }
    }
}

/// Reusable scratch space for drawing cycle counts.
#[derive(Debug, Clone)]
pub struct CycleSampler {
    kind: SamplerKind,
    n: u64,
    perm: Vec<u32>,
    seen: Vec<bool>,
}

impl CycleSampler {
    pub fn new(kind: SamplerKind, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        if kind == SamplerKind::PermutationDirect && n > u32::MAX as u64 {
            return Err(Error::domain(format!(
                "permutation sampler supports n <= {}, got {n}",
                u32::MAX
            )));
        }
        let len = if kind == SamplerKind::PermutationDirect { n as usize } else { 0 };
        Ok(Self {
            kind,
            n,
            perm: Vec::with_capacity(len),
            seen: Vec::with_capacity(len),
        })
    }

    /// One cycle count in `1..=n`.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        match self.kind {
            SamplerKind::PermutationDirect => {
                self.perm.clear();
                self.perm.extend(0..self.n as u32);
                self.perm.shuffle(rng);
                count_cycles(&self.perm, &mut self.seen)
            }
            SamplerKind::BernoulliSum => {
                1 + (2..=self.n).filter(|&j| rng.random_range(0..j) == 0).count() as u64
            }
        }
    }
}

pub(crate) fn count_cycles(perm: &[u32], seen: &mut Vec<bool>) -> u64 {
    seen.clear();
    seen.resize(perm.len(), false);
    let mut cycles = 0;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i] as usize;
        }
    }
    cycles
}

/// One cycle count of a uniform permutation of `n` letters.
pub fn sample_cycle_count<R: Rng + ?Sized>(kind: SamplerKind, n: u64, rng: &mut R) -> Result<u64> {
    Ok(CycleSampler::new(kind, n)?.sample(rng))
}

/// Collision-probability estimate from `samples` independent pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub n: u64,
    pub samples: u64,
    pub collisions: u64,
    pub p_hat: f64,
    pub std_err: f64,
}

impl McEstimate {
    fn from_counts(n: u64, samples: u64, collisions: u64) -> Self {
        let p_hat = collisions as f64 / samples as f64;
        let std_err = (p_hat * (1.0 - p_hat) / samples as f64).sqrt();
        Self {
            n,
            samples,
            collisions,
            p_hat,
            std_err,
        }
    }
}

/// Splits `total` trials into `(block index, block length)` pairs.
fn blocks(total: u64) -> impl ParallelIterator<Item = (u64, u64)> {
    let count = total.div_ceil(BLOCK_SIZE);
    (0..count)
        .into_par_iter()
        .map(move |b| (b, BLOCK_SIZE.min(total - b * BLOCK_SIZE)))
}

/// Draws `pairs` ordered pairs of independent cycle counts and counts the
/// equal ones.
pub fn estimate_collision(n: u64, pairs: u64, kind: SamplerKind, seed: Seed) -> Result<McEstimate> {
    if pairs == 0 {
        return Err(Error::domain("pairs must be at least 1"));
    }
    CycleSampler::new(kind, n)?;
    let collisions = blocks(pairs)
        .map(|(block, len)| {
            let mut rng = seed.stream(block);
            let mut sampler = CycleSampler::new(kind, n).expect("validated above");
            (0..len)
                .filter(|_| sampler.sample(&mut rng) == sampler.sample(&mut rng))
                .count() as u64
        })
        .sum();
    Ok(McEstimate::from_counts(n, pairs, collisions))
}

/// Histogram of `draws` cycle counts; entry `k - 1` counts `k` cycles.
pub fn cycle_histogram(n: u64, draws: u64, kind: SamplerKind, seed: Seed) -> Result<Vec<u64>> {
    CycleSampler::new(kind, n)?;
    let len = usize::try_from(n).map_err(|_| Error::domain("n too large for a histogram"))?;
    Ok(blocks(draws)
        .map(|(block, count)| {
            let mut rng = seed.stream(block);
            let mut sampler = CycleSampler::new(kind, n).expect("validated above");
            let mut hist = vec![0u64; len];
            for _ in 0..count {
                hist[sampler.sample(&mut rng) as usize - 1] += 1;
            }
            hist
        })
        .reduce(
            || vec![0u64; len],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        ))
}

/// Pearson goodness-of-fit result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of `observed` counts against `probs`.
///
/// Adjacent bins are pooled left to right until each pooled bin expects at
/// least five counts; a short remainder joins the last pooled bin.
pub fn chi_square_test(observed: &[u64], probs: &[f64]) -> Result<ChiSquareOutcome> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::domain("observed and expected bins must match and be non-empty"));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::domain("no observations"));
    }
    let total = total as f64;

    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut obs_acc, mut exp_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        obs_acc += o as f64;
        exp_acc += p * total;
        if exp_acc >= 5.0 {
            groups.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if obs_acc > 0.0 || exp_acc > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += obs_acc;
                last.1 += exp_acc;
            }
            None => groups.push((obs_acc, exp_acc)),
        }
    }

    let statistic: f64 = groups
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e) * (o - e) / e } else { 0.0 })
        .sum();
    let dof = groups.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .map_err(|e| Error::domain(e.to_string()))?
            .sf(statistic)
    };
    Ok(ChiSquareOutcome {
        statistic,
        degrees_of_freedom: dof,
        p_value,
    })
}

//! Seeded, chunked Monte Carlo plumbing.
//!
//! Work is split into fixed-size chunks; chunk `c` draws from the ChaCha8
//! stream `c` of the run seed. Chunk results are merged in chunk order, so an
//! estimate depends only on `(seed, n_samples)` and never on how many rayon
//! workers evaluated the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Samples per chunk. Part of the reproducibility contract: changing it
/// changes every estimate.
pub const CHUNK_SIZE: u64 = 8192;

pub type Stream = ChaCha8Rng;

/// Independent stream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Monte Carlo estimate of a mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Whether `value` lies within `sigmas` standard errors of the mean.
    pub fn within(&self, value: f64, sigmas: f64) -> bool {
        (self.mean - value).abs() <= sigmas * self.stderr
    }
}

/// Streaming mean/variance (Welford), mergeable with Chan's update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.n as f64 * w;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self, seed: u64) -> McEstimate {
        McEstimate { mean: self.mean, stderr: self.stderr(), n_samples: self.n, seed }
    }
}

/// Runs `f(stream, chunk_len)` over the chunks of `n_samples` in parallel and
/// folds the results left to right with `merge`.
pub fn run_chunked<A, F, M>(n_samples: u64, seed: u64, f: F, merge: M) -> Option<A>
where
    A: Send,
    F: Fn(&mut Stream, u64) -> A + Sync,
    M: Fn(&mut A, A),
{
    let n_chunks = n_samples.div_ceil(CHUNK_SIZE);
    let parts: Vec<A> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_SIZE.min(n_samples - c * CHUNK_SIZE);
            let mut rng = substream(seed, c);
            f(&mut rng, len)
        })
        .collect();
    let mut it = parts.into_iter();
    let mut acc = it.next()?;
    for part in it {
        merge(&mut acc, part);
    }
    Some(acc)
}

/// Vector of `Moments`, merged elementwise.
pub(crate) fn merge_all(acc: &mut [Moments], other: Vec<Moments>) {
    for (a, b) in acc.iter_mut().zip(other.iter()) {
        a.merge(b);
    }
}

//! Monte-Carlo oracle over circularly-symmetric complex Gaussian channels.
//!
//! Samples are generated in fixed chunks of [`CHUNK`] draws. Chunk `c` uses a
//! ChaCha8 generator seeded with the user seed and switched to stream `c`, so
//! the sample sequence depends only on `(seed, sample index)` and not on how
//! chunks are spread over threads. Hits are reduced as integer counts.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::ChannelStatistics;
use crate::error::{Error, Result};
use crate::numerics::{BlockCholesky, CMatrix, CVector};

pub const CHUNK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub hits: u64,
}

impl McEstimate {
    pub fn from_counts(hits: u64, samples: u64, seed: u64) -> Self {
        let p = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
        Self {
            probability: p,
            std_error: if samples == 0 { 0.0 } else { (p * (1.0 - p) / samples as f64).sqrt() },
            samples,
            seed,
            hits,
        }
    }

    /// True if `value` lies within `k` standard errors of the estimate.
    /// A zero standard error (all hits or none) is widened to one binomial count.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        let se = self.std_error.max(1.0 / self.samples.max(1) as f64);
        (self.probability - value).abs() <= k * se
    }
}

/// Draws `h = mu + L w` with `w` iid standard complex normal.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    mean: CVector,
    lower: CMatrix,
}

impl ChannelSampler {
    pub fn new(stats: &ChannelStatistics) -> Result<Self> {
        let chol = BlockCholesky::new(&stats.per_rrh_covariances)?;
        Ok(Self {
            mean: stats.stacked_mean.clone(),
            lower: chol.dense_lower(),
        })
    }

    /// Degenerate sampler (`Sigma -> 0`) returning the mean.
    pub fn deterministic(mean: CVector) -> Self {
        let n = mean.len();
        Self {
            mean,
            lower: CMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, w: &mut CVector, out: &mut CVector) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for z in w.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z = Complex64::new(re * s, im * s);
        }
        out.copy_from(&self.mean);
        out.gemv(Complex64::new(1.0, 0.0), &self.lower, w, Complex64::new(1.0, 0.0));
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        let mut w = CVector::zeros(self.dim());
        let mut out = CVector::zeros(self.dim());
        self.sample_into(rng, &mut w, &mut out);
        out
    }
}

/// One draw from `CN(mu, Sigma)`.
pub fn sample_channel<R: Rng + ?Sized>(stats: &ChannelStatistics, rng: &mut R) -> Result<CVector> {
    Ok(ChannelSampler::new(stats)?.sample(rng))
}

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Count hits of `n_events` events on shared samples. `event` fills one flag per event.
pub fn count_events<F>(sampler: &ChannelSampler, samples: u64, seed: u64, n_events: usize, event: F) -> Vec<u64>
where
    F: Fn(&CVector, &mut [bool]) + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut w = CVector::zeros(sampler.dim());
            let mut h = CVector::zeros(sampler.dim());
            let mut flags = vec![false; n_events];
            let mut counts = vec![0u64; n_events];
            for _ in 0..n {
                sampler.sample_into(&mut rng, &mut w, &mut h);
                flags.iter_mut().for_each(|f| *f = false);
                event(&h, &mut flags);
                for (cnt, &f) in counts.iter_mut().zip(&flags) {
                    *cnt += f as u64;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; n_events],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

pub fn estimate_probability<F>(event: F, stats: &ChannelStatistics, samples: u64, seed: u64) -> Result<McEstimate>
where
    F: Fn(&CVector) -> bool + Sync,
{
    let sampler = ChannelSampler::new(stats)?;
    Ok(estimate_with_sampler(&sampler, samples, seed, event))
}

pub fn estimate_with_sampler<F>(sampler: &ChannelSampler, samples: u64, seed: u64, event: F) -> McEstimate
where
    F: Fn(&CVector) -> bool + Sync,
{
    let hits = count_events(sampler, samples, seed, 1, |h, f| f[0] = event(h))[0];
    McEstimate::from_counts(hits, samples, seed)
}

/// Several events estimated on the same draws.
pub fn estimate_many<F>(
    stats: &ChannelStatistics,
    samples: u64,
    seed: u64,
    n_events: usize,
    event: F,
) -> Result<Vec<McEstimate>>
where
    F: Fn(&CVector, &mut [bool]) + Sync,
{
    if samples == 0 {
        return Err(Error::Domain("sample count must be >= 1".into()));
    }
    let sampler = ChannelSampler::new(stats)?;
    Ok(count_events(&sampler, samples, seed, n_events, event)
        .into_iter()
        .map(|h| McEstimate::from_counts(h, samples, seed))
        .collect())
}

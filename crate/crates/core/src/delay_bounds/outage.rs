//! SNR outage and service-outage probabilities of the legitimate link.

use serde::{Deserialize, Serialize};

use crate::authenticator::AuthenticatorState;
use crate::channel::ChannelStatistics;
use crate::error::{Error, Result};
use crate::monte_carlo::{estimate_many, McEstimate};
use crate::numerics::{hermitian_eigendecomposition, noncentral_chi2_cdf, CMatrix, CVector};

/// Which combined SNR is compared against `2^R - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrMode {
    /// `||h||^2 / (N_RRH N0)` over all arrays.
    Centralized,
    /// `||h_j||^2 / N0` of array `j`.
    PerArray(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrOutageMethod {
    MonteCarlo { samples: u64, seed: u64 },
    /// Noncentral chi-square; needs white covariance with one common power.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutageMode {
    CentralizedBound,
    /// Returns `p_FA` when the rate-threshold condition holds as printed.
    CentralizedExactIfValid,
    LocalBound,
}

fn snr_threshold(rate: f64) -> f64 {
    rate.exp2() - 1.0
}

fn check(rate: f64, noise_n0: f64) -> Result<()> {
    if !(noise_n0 > 0.0) || !noise_n0.is_finite() {
        return Err(Error::Domain(format!("noise floor must be > 0, got {noise_n0}")));
    }
    if !(rate >= 0.0) {
        return Err(Error::Domain(format!("rate must be >= 0, got {rate}")));
    }
    Ok(())
}

/// Common per-entry variance if every selected block is `sigma^2 I` with one `sigma^2`.
fn white_variance(blocks: &[&CMatrix]) -> Option<f64> {
    let v = blocks.first()?[(0, 0)].re;
    for b in blocks {
        for ((i, j), z) in b.iter().enumerate().map(|(k, z)| ((k % b.nrows(), k / b.nrows()), z)) {
            let want = if i == j { v } else { 0.0 };
            if (z.re - want).abs() > 1e-12 * v || z.im.abs() > 1e-12 * v {
                return None;
            }
        }
    }
    Some(v)
}

fn selection(stats: &ChannelStatistics, mode: SnrMode) -> Result<(Vec<usize>, f64)> {
    let na = stats.per_rrh_means.len();
    match mode {
        SnrMode::Centralized => Ok(((0..na).collect(), na as f64)),
        SnrMode::PerArray(j) if j < na => Ok((vec![j], 1.0)),
        SnrMode::PerArray(j) => Err(Error::Domain(format!("array index {j} out of range ({na} arrays)"))),
    }
}

/// Probability that the MRC SNR falls below `2^R - 1`.
pub fn snr_outage(
    stats: &ChannelStatistics,
    rate: f64,
    noise_n0: f64,
    mode: SnrMode,
    method: SnrOutageMethod,
) -> Result<f64> {
    check(rate, noise_n0)?;
    let (arrays, scale) = selection(stats, mode)?;
    let level = snr_threshold(rate) * scale * noise_n0;
    if level <= 0.0 {
        return Ok(0.0);
    }
    if level.is_infinite() {
        return Ok(1.0);
    }
    match method {
        SnrOutageMethod::ClosedForm => {
            let blocks: Vec<&CMatrix> = arrays.iter().map(|&j| &stats.per_rrh_covariances[j]).collect();
            let var = white_variance(&blocks)
                .ok_or_else(|| Error::Precondition("closed form needs sigma^2 I blocks with one common power".into()))?;
            let n: usize = blocks.iter().map(|b| b.nrows()).sum();
            let energy: f64 = arrays.iter().map(|&j| stats.per_rrh_means[j].norm_squared()).sum();
            noncentral_chi2_cdf(2.0 * level / var, 2 * n as u32, 2.0 * energy / var)
        }
        SnrOutageMethod::MonteCarlo { samples, seed } => {
            let ranges = block_ranges(stats);
            let est = estimate_many(stats, samples, seed, 1, |h, f| {
                f[0] = selected_energy(h, &ranges, &arrays) < level;
            })?;
            Ok(est[0].probability)
        }
    }
}

fn block_ranges(stats: &ChannelStatistics) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    stats
        .block_sizes()
        .into_iter()
        .map(|n| {
            let r = start..start + n;
            start += n;
            r
        })
        .collect()
}

fn selected_energy(h: &CVector, ranges: &[std::ops::Range<usize>], arrays: &[usize]) -> f64 {
    arrays
        .iter()
        .map(|&j| h.rows(ranges[j].start, ranges[j].len()).norm_squared())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServiceOutage {
    pub mode: OutageMode,
    pub p_x: f64,
    pub p_fa: f64,
    /// Centralized: one entry. Local: one per array.
    pub p_out: Vec<f64>,
    /// Exact-case value used without checking its validity condition.
    pub as_printed: bool,
    /// Whether the rate-threshold condition held (exact mode only).
    pub exact_condition: Option<bool>,
}

/// Service-outage probability `p_X` of the legitimate link.
pub fn service_outage(
    auth: &AuthenticatorState,
    rate: f64,
    noise_n0: f64,
    mode: OutageMode,
    method: SnrOutageMethod,
) -> Result<ServiceOutage> {
    check(rate, noise_n0)?;
    let stats = auth.legit_stats();
    let p_fa = auth.false_alarm_rate();
    let central = |exact_condition| -> Result<ServiceOutage> {
        let p = snr_outage(stats, rate, noise_n0, SnrMode::Centralized, method)?;
        Ok(ServiceOutage {
            mode,
            p_x: (p_fa + p).min(1.0),
            p_fa,
            p_out: vec![p],
            as_printed: false,
            exact_condition,
        })
    };
    match mode {
        OutageMode::CentralizedBound => central(None),
        OutageMode::LocalBound => {
            let p_out = (0..stats.per_rrh_means.len())
                .map(|j| snr_outage(stats, rate, noise_n0, SnrMode::PerArray(j), method))
                .collect::<Result<Vec<_>>>()?;
            let prod: f64 = p_out.iter().product();
            Ok(ServiceOutage {
                mode,
                p_x: (p_fa + prod).min(1.0),
                p_fa,
                p_out,
                as_printed: false,
                exact_condition: None,
            })
        }
        OutageMode::CentralizedExactIfValid => {
            let eig = hermitian_eigendecomposition(&stats.stacked_covariance)?;
            let lambda_min_inv = 1.0 / eig.eigenvalues[0];
            let rhs = (auth.threshold() / (2.0 * lambda_min_inv)).sqrt() - stats.stacked_mean.norm();
            if snr_threshold(rate).sqrt() < rhs {
                Ok(ServiceOutage {
                    mode,
                    p_x: p_fa,
                    p_fa,
                    p_out: Vec::new(),
                    as_printed: true,
                    exact_condition: Some(true),
                })
            } else {
                central(Some(false))
            }
        }
    }
}

/// Sampled probability of `{rejected} or {SNR outage}` for Alice's channel.
/// `local` requires every array to fail decoding for an outage.
pub fn mc_service_outage(
    auth: &AuthenticatorState,
    rate: f64,
    noise_n0: f64,
    local: bool,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check(rate, noise_n0)?;
    let stats = auth.legit_stats();
    let ranges = block_ranges(stats);
    let na = ranges.len();
    let level = snr_threshold(rate) * noise_n0;
    let all: Vec<usize> = (0..na).collect();
    let est = estimate_many(stats, samples, seed, 1, |h, f| {
        let rejected = !auth.accepts(h).unwrap_or(false);
        let outage = if local {
            (0..na).all(|j| selected_energy(h, &ranges, &[j]) < level)
        } else {
            selected_energy(h, &ranges, &all) < level * na as f64
        };
        f[0] = rejected || outage;
    })?;
    Ok(est.into_iter().next().expect("one event"))
}

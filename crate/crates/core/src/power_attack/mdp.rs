//! Missed-detection probabilities under power manipulation.

use num_complex::Complex64;
use serde::Serialize;

use crate::authenticator::AuthenticatorState;
use crate::channel::ChannelStatistics;
use crate::error::{Error, Result};
use crate::monte_carlo::{count_events, ChannelSampler, McEstimate};
use crate::numerics::{relative_frobenius, CVector};

use super::dncf::dncf_cdf;
use super::quadform::{build_fixed_strategy_form, build_indefinite_form, tail_probability, TailMethod};
use super::strategy::{d_min_from_parts, PowerStrategy};

/// Fraction `alpha` with `Sigma_E = alpha Sigma_A`, if the covariances are proportional.
pub fn covariance_ratio(auth: &AuthenticatorState, eve: &ChannelStatistics) -> Option<f64> {
    let sa = &auth.legit_stats().stacked_covariance;
    let se = &eve.stacked_covariance;
    if sa.shape() != se.shape() {
        return None;
    }
    let alpha = se.trace().re / sa.trace().re;
    let scaled = sa * Complex64::new(alpha, 0.0);
    (relative_frobenius(se, &scaled) <= 1e-9).then_some(alpha)
}

/// Worst-case MDP under the optimal power manipulation attack.
///
/// A single RRH uses the closed form; otherwise the tail of the reduced
/// indefinite form is approximated with `method`.
pub fn mdp_optimal_pma(auth: &AuthenticatorState, eve: &ChannelStatistics) -> Result<f64> {
    mdp_optimal_pma_with(auth, eve, TailMethod::default())
}

pub fn mdp_optimal_pma_with(auth: &AuthenticatorState, eve: &ChannelStatistics, method: TailMethod) -> Result<f64> {
    if auth.threshold() >= 2.0 * auth.mahalanobis_energy() {
        return Ok(1.0);
    }
    if eve.per_rrh_means.len() == 1 && covariance_ratio(auth, eve).is_some() {
        return mdp_single_array_closed_form(auth, eve);
    }
    mdp_optimal_pma_saddlepoint(auth, eve, method)
}

/// The saddle-point path only, regardless of the number of RRHs.
pub fn mdp_optimal_pma_saddlepoint(auth: &AuthenticatorState, eve: &ChannelStatistics, method: TailMethod) -> Result<f64> {
    if auth.threshold() >= 2.0 * auth.mahalanobis_energy() {
        return Ok(1.0);
    }
    let form = build_indefinite_form(auth, eve)?;
    tail_probability(&form, method)
}

/// Closed form for one RRH with `Sigma_E = alpha Sigma_A`.
pub fn mdp_single_array_closed_form(auth: &AuthenticatorState, eve: &ChannelStatistics) -> Result<f64> {
    if eve.per_rrh_means.len() != 1 || auth.legit_stats().per_rrh_means.len() != 1 {
        return Err(Error::Precondition("closed form needs exactly one RRH".into()));
    }
    let alpha = covariance_ratio(auth, eve)
        .ok_or_else(|| Error::Precondition("Eve's covariance is not a multiple of Alice's".into()))?;
    let m = auth.mahalanobis_energy();
    let t = auth.threshold();
    if t >= 2.0 * m {
        return Ok(1.0);
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    let n = auth.dim();
    if n == 1 {
        // Any scalar channel can be rotated onto mu_A exactly.
        return Ok(1.0);
    }
    let mu_e = &eve.stacked_mean;
    let cross = auth.cross_term(mu_e)?.norm_sqr();
    let energy = auth.inv_energy(mu_e)?;
    let nu1 = 2.0 * cross / (alpha * m);
    let nu2 = (2.0 / alpha) * (energy - cross / m);
    let x = ((n - 1) as f64 * (2.0 * m / t - 1.0)).max(0.0);
    Ok((1.0 - dncf_cdf(x, nu1, nu2, 2, 2 * (n as u32 - 1))?).clamp(0.0, 1.0))
}

/// MDP when Eve applies a fixed scaling (e.g. none, or the statistical strategy).
pub fn mdp_fixed_strategy(auth: &AuthenticatorState, eve: &ChannelStatistics, strategy: PowerStrategy) -> Result<f64> {
    mdp_fixed_strategy_with(auth, eve, strategy, TailMethod::default())
}

pub fn mdp_fixed_strategy_with(
    auth: &AuthenticatorState,
    eve: &ChannelStatistics,
    strategy: PowerStrategy,
    method: TailMethod,
) -> Result<f64> {
    let form = build_fixed_strategy_form(auth, eve, strategy)?;
    tail_probability(&form, method)
}

/// Whitened evaluation of the optimal-attack statistics for one channel draw.
struct Whitened<'a> {
    auth: &'a AuthenticatorState,
}

impl Whitened<'_> {
    /// `(|mu_A^dagger Sigma_A^{-1} h|^2, h^dagger Sigma_A^{-1} h)`
    fn parts(&self, h: &CVector) -> (f64, f64) {
        let z = self.auth.whitener() * h;
        (self.auth.whitened_mean().dotc(&z).norm_sqr(), z.norm_squared())
    }
}

/// Sampling oracle for `{d_min(h_E) < T}` at each threshold, on shared draws.
pub fn mc_mdp_optimal_pma(
    auth: &AuthenticatorState,
    eve: &ChannelStatistics,
    thresholds: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    let sampler = ChannelSampler::new(eve)?;
    let w = Whitened { auth };
    let m = auth.mahalanobis_energy();
    let counts = count_events(&sampler, samples, seed, thresholds.len(), |h, flags| {
        let (cross, energy) = w.parts(h);
        let dm = d_min_from_parts(m, cross, energy);
        for (f, &t) in flags.iter_mut().zip(thresholds) {
            *f = dm < t;
        }
    });
    Ok(counts.into_iter().map(|c| McEstimate::from_counts(c, samples, seed)).collect())
}

/// Sampling oracle for `{d(eta e^{j psi} h_E) < T}` for several strategies on shared draws.
pub fn mc_mdp_fixed_strategies(
    auth: &AuthenticatorState,
    eve: &ChannelStatistics,
    strategies: &[PowerStrategy],
    samples: u64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    let sampler = ChannelSampler::new(eve)?;
    let mean_w = auth.whitened_mean();
    let t = auth.threshold();
    let factors: Vec<Complex64> = strategies.iter().map(|s| s.factor()).collect();
    let counts = count_events(&sampler, samples, seed, strategies.len(), |h, flags| {
        let z = auth.whitener() * h;
        for (f, a) in flags.iter_mut().zip(&factors) {
            let d: f64 = z.iter().zip(mean_w.iter()).map(|(zi, mi)| (zi * a - mi).norm_sqr()).sum();
            *f = 2.0 * d < t;
        }
    });
    Ok(counts.into_iter().map(|c| McEstimate::from_counts(c, samples, seed)).collect())
}

/// How a point MDP was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MdpSource {
    ClosedForm,
    Saddlepoint,
    MonteCarloFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MdpValue {
    pub value: f64,
    pub source: MdpSource,
}

/// Optimal-attack MDP with sampling fallback when the saddle point fails.
pub fn mdp_optimal_pma_robust(
    auth: &AuthenticatorState,
    eve: &ChannelStatistics,
    method: TailMethod,
    fallback_samples: u64,
    seed: u64,
) -> Result<MdpValue> {
    let closed = eve.per_rrh_means.len() == 1 && covariance_ratio(auth, eve).is_some();
    match mdp_optimal_pma_with(auth, eve, method) {
        Ok(v) => Ok(MdpValue {
            value: v,
            source: if closed { MdpSource::ClosedForm } else { MdpSource::Saddlepoint },
        }),
        Err(Error::NoSignChange { .. }) | Err(Error::NoConvergence(_)) | Err(Error::NonFinite(_)) => {
            let est = mc_mdp_optimal_pma(auth, eve, &[auth.threshold()], fallback_samples, seed)?;
            Ok(MdpValue {
                value: est[0].probability,
                source: MdpSource::MonteCarloFallback,
            })
        }
        Err(e) => Err(e),
    }
}

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::authenticator::AuthenticatorState;
use crate::channel::ChannelStatistics;
use crate::error::{Error, Result};
use crate::numerics::CVector;

/// Complex scaling `eta * exp(j psi)` applied by the attacker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerStrategy {
    pub amplitude: f64,
    pub phase: f64,
}

impl PowerStrategy {
    pub fn new(amplitude: f64, phase: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() || !phase.is_finite() {
            return Err(Error::Domain(format!(
                "strategy needs finite eta >= 0 and finite psi, got ({amplitude}, {phase})"
            )));
        }
        Ok(Self {
            amplitude,
            phase: wrap_phase(phase),
        })
    }

    /// No manipulation: `eta = 1`, `psi = 0`.
    pub fn none() -> Self {
        Self {
            amplitude: 1.0,
            phase: 0.0,
        }
    }

    pub fn factor(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// Map an angle to `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

fn strategy_from_cross(a: Complex64, energy: f64) -> PowerStrategy {
    let phase = if a.norm() == 0.0 { 0.0 } else { wrap_phase(-a.arg()) };
    PowerStrategy {
        amplitude: a.norm() / energy,
        phase,
    }
}

/// The `(eta, psi)` minimizing `d(eta e^{j psi} h_E)`, with the minimum value.
pub fn optimal_power_strategy(auth: &AuthenticatorState, h_e: &CVector) -> Result<(PowerStrategy, f64)> {
    let energy = auth.inv_energy(h_e)?;
    if !(energy > 0.0) {
        return Err(Error::Domain("attacker channel is the zero vector".into()));
    }
    let a = auth.cross_term(h_e)?;
    Ok((strategy_from_cross(a, energy), d_min_from_parts(auth.mahalanobis_energy(), a.norm_sqr(), energy)))
}

pub(crate) fn d_min_from_parts(m: f64, cross_sq: f64, energy: f64) -> f64 {
    (2.0 * m * (1.0 - cross_sq / (m * energy))).clamp(0.0, 2.0 * m)
}

/// Smallest discriminant reachable from `h_e` by complex scaling.
pub fn d_min(auth: &AuthenticatorState, h_e: &CVector) -> Result<f64> {
    Ok(optimal_power_strategy(auth, h_e)?.1)
}

/// The optimal strategy evaluated at Eve's mean channel.
pub fn statistical_power_strategy(auth: &AuthenticatorState, eve_stats: &ChannelStatistics) -> Result<PowerStrategy> {
    let mu = &eve_stats.stacked_mean;
    let energy = auth.inv_energy(mu)?;
    if !(energy > 0.0) {
        return Err(Error::Domain("Eve's mean channel is zero".into()));
    }
    Ok(strategy_from_cross(auth.cross_term(mu)?, energy))
}

//! Rice-fading phased-array channel statistics.
//!
//! Each RRH sees `h ~ CN(mu, Sigma)` with a line-of-sight mean along the array
//! steering vector and a scattered part with covariance `P/(K+1) Lambda`.
//! Fading is independent across RRHs, so the stacked covariance is block diagonal.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector};
use crate::scenario::{CorrelationModel, Point, RrhConfig, Scenario, TransmitterConfig, SPEED_OF_LIGHT};

pub fn wavelength(carrier_frequency_hz: f64) -> Result<f64> {
    if !(carrier_frequency_hz > 0.0) || !carrier_frequency_hz.is_finite() {
        return Err(Error::Domain(format!(
            "carrier frequency must be > 0, got {carrier_frequency_hz}"
        )));
    }
    Ok(SPEED_OF_LIGHT / carrier_frequency_hz)
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Projection of the unit direction RRH -> point onto the array axis.
pub fn angular_sine(rrh: &RrhConfig, point: Point) -> Result<f64> {
    let dx = point[0] - rrh.position[0];
    let dy = point[1] - rrh.position[1];
    let d = dx.hypot(dy);
    if d == 0.0 {
        return Err(Error::CoincidentPosition(format!(
            "point ({}, {}) coincides with RRH '{}'",
            point[0], point[1], rrh.id
        )));
    }
    Ok(((dx * rrh.array_axis[0] + dy * rrh.array_axis[1]) / d).clamp(-1.0, 1.0))
}

/// Per-antenna received power `(lambda / (4 pi d))^beta * P_tx`.
pub fn path_gain_power(lambda: f64, d: f64, beta: f64, tx_power: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::CoincidentPosition(format!("distance must be > 0, got {d}")));
    }
    Ok((lambda / (4.0 * PI * d)).powf(beta) * tx_power)
}

pub fn received_power(scenario: &Scenario, tx: &TransmitterConfig, rrh: &RrhConfig) -> Result<f64> {
    let d = distance(tx.position, rrh.position);
    if d == 0.0 {
        return Err(Error::CoincidentPosition(format!(
            "transmitter coincides with RRH '{}'",
            rrh.id
        )));
    }
    path_gain_power(scenario.wavelength(), d, scenario.path_loss_exponent, tx.tx_power)
}

pub fn correlation_matrix(model: CorrelationModel, n: usize) -> Result<CMatrix> {
    match model {
        CorrelationModel::Identity => Ok(CMatrix::identity(n, n)),
        CorrelationModel::Exponential { rho } => {
            if !(rho.abs() < 1.0) {
                return Err(Error::Domain(format!("|rho| must be < 1, got {rho}")));
            }
            Ok(CMatrix::from_fn(n, n, |k, l| {
                Complex64::new(rho.powi((k as i32 - l as i32).abs()), 0.0)
            }))
        }
    }
}

/// Steering vector `e(Omega)_n = exp(-j 2 pi Delta_r n Omega)`.
pub fn steering_vector(omega: f64, spacing: f64, n: usize) -> CVector {
    CVector::from_fn(n, |k, _| Complex64::from_polar(1.0, -2.0 * PI * spacing * k as f64 * omega))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrhGeometry {
    pub distance: f64,
    pub angular_sine: f64,
    pub received_power: f64,
}

#[derive(Debug, Clone)]
pub struct ChannelStatistics {
    pub per_rrh_means: Vec<CVector>,
    pub per_rrh_covariances: Vec<CMatrix>,
    pub stacked_mean: CVector,
    pub stacked_covariance: CMatrix,
    pub per_rrh_geometry: Vec<RrhGeometry>,
}

impl ChannelStatistics {
    /// Assemble from per-RRH blocks.
    pub fn from_blocks(means: Vec<CVector>, covariances: Vec<CMatrix>, geometry: Vec<RrhGeometry>) -> Result<Self> {
        if means.len() != covariances.len() {
            return Err(Error::DimensionMismatch {
                expected: means.len(),
                actual: covariances.len(),
            });
        }
        for (m, c) in means.iter().zip(&covariances) {
            if c.nrows() != m.len() || c.ncols() != m.len() {
                return Err(Error::DimensionMismatch {
                    expected: m.len(),
                    actual: c.nrows(),
                });
            }
        }
        let total: usize = means.iter().map(|m| m.len()).sum();
        let mut stacked_mean = CVector::zeros(total);
        let mut stacked_covariance = CMatrix::zeros(total, total);
        let mut off = 0;
        for (m, c) in means.iter().zip(&covariances) {
            let n = m.len();
            stacked_mean.rows_mut(off, n).copy_from(m);
            stacked_covariance.view_mut((off, off), (n, n)).copy_from(c);
            off += n;
        }
        Ok(Self {
            per_rrh_means: means,
            per_rrh_covariances: covariances,
            stacked_mean,
            stacked_covariance,
            per_rrh_geometry: geometry,
        })
    }

    pub fn dim(&self) -> usize {
        self.stacked_mean.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.per_rrh_means.iter().map(|m| m.len()).collect()
    }

    /// Statistics with the mean scaled by `a` and covariance by `|a|^2`.
    pub fn scaled(&self, a: Complex64) -> Self {
        let s = a.norm_sqr();
        let means = self.per_rrh_means.iter().map(|m| m * a).collect();
        let covs = self.per_rrh_covariances.iter().map(|c| c * Complex64::new(s, 0.0)).collect();
        Self::from_blocks(means, covs, self.per_rrh_geometry.clone()).expect("shapes unchanged")
    }
}

/// Mean and covariance of the channel from `tx` to every RRH of `scenario`.
pub fn channel_statistics(scenario: &Scenario, tx: &TransmitterConfig) -> Result<ChannelStatistics> {
    channel_statistics_at(scenario, tx.position, tx.tx_power)
}

pub fn channel_statistics_at(scenario: &Scenario, position: Point, tx_power: f64) -> Result<ChannelStatistics> {
    let lambda = wavelength(scenario.carrier_frequency_hz)?;
    let k = scenario.rice_factor;
    let mut means = Vec::with_capacity(scenario.rrhs.len());
    let mut covs = Vec::with_capacity(scenario.rrhs.len());
    let mut geometry = Vec::with_capacity(scenario.rrhs.len());
    for rrh in &scenario.rrhs {
        let d = distance(position, rrh.position);
        let omega = angular_sine(rrh, position)?;
        let p = path_gain_power(lambda, d, scenario.path_loss_exponent, tx_power)?;
        let n = rrh.num_antennas;
        let phase = Complex64::from_polar((p * k / (k + 1.0)).sqrt(), -2.0 * PI * d / lambda);
        means.push(steering_vector(omega, scenario.antenna_spacing, n) * phase);
        let lam = correlation_matrix(scenario.correlation, n)?;
        covs.push(lam * Complex64::new(p / (k + 1.0), 0.0));
        geometry.push(RrhGeometry {
            distance: d,
            angular_sine: omega,
            received_power: p,
        });
    }
    ChannelStatistics::from_blocks(means, covs, geometry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Region;
    use proptest::prelude::*;

    fn scene(rrhs: Vec<RrhConfig>) -> Scenario {
        Scenario::with_defaults(
            rrhs,
            TransmitterConfig::at([5.0, 7.0]),
            Region {
                min: [0.0, 0.0],
                max: [20.0, 20.0],
            },
        )
    }

    #[test]
    fn wavelength_values() {
        assert!((wavelength(SPEED_OF_LIGHT).unwrap() - 1.0).abs() < 1e-15);
        let l = wavelength(2.4e9).unwrap();
        assert!((l - 0.1249).abs() < 1e-4);
        assert!((wavelength(1.2e9).unwrap() - 2.0 * l).abs() < 1e-15);
        assert!(wavelength(0.0).is_err());
    }

    #[test]
    fn angular_sine_cases() {
        let r = RrhConfig::new("r", [0.0, 0.0], 4, 0.0);
        assert!(angular_sine(&r, [0.0, 5.0]).unwrap().abs() < 1e-15);
        assert!((angular_sine(&r, [3.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        let a = 30f64.to_radians();
        let p = [a.sin() * 4.0, a.cos() * 4.0];
        assert!((angular_sine(&r, p).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(angular_sine(&r, [0.0, 0.0]), Err(Error::CoincidentPosition(_))));
    }

    #[test]
    fn received_power_cases() {
        let l = wavelength(2.4e9).unwrap();
        assert!((path_gain_power(l, l / (4.0 * PI), 3.3, 2.0).unwrap() - 2.0).abs() < 1e-14);
        let p1 = path_gain_power(l, 5.0, 2.0, 1.0).unwrap();
        let p2 = path_gain_power(l, 10.0, 2.0, 1.0).unwrap();
        assert!((p1 / p2 - 4.0).abs() < 1e-12);
        // Direct evaluation at 10 m, 2.4 GHz.
        assert!((p2 - 9.881e-7).abs() < 1e-9, "{p2}");
    }

    #[test]
    fn correlation_cases() {
        assert_eq!(correlation_matrix(CorrelationModel::Identity, 4).unwrap(), CMatrix::identity(4, 4));
        assert_eq!(
            correlation_matrix(CorrelationModel::Exponential { rho: 0.0 }, 3).unwrap(),
            CMatrix::identity(3, 3)
        );
        let m = correlation_matrix(CorrelationModel::Exponential { rho: 0.5 }, 3).unwrap();
        let want = [[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[(i, j)], Complex64::new(want[i][j], 0.0));
            }
        }
        assert!(correlation_matrix(CorrelationModel::Exponential { rho: 1.0 }, 3).is_err());
    }

    #[test]
    fn stacked_structure() {
        let s = scene(vec![
            RrhConfig::new("a", [0.0, 0.0], 3, 0.0),
            RrhConfig::new("b", [20.0, 0.0], 2, 90.0),
        ]);
        let st = channel_statistics(&s, &s.alice).unwrap();
        assert_eq!(st.dim(), 5);
        for i in 0..3 {
            for j in 3..5 {
                assert_eq!(st.stacked_covariance[(i, j)], Complex64::new(0.0, 0.0));
                assert_eq!(st.stacked_covariance[(j, i)], Complex64::new(0.0, 0.0));
            }
        }
        let k = s.rice_factor;
        for (j, g) in st.per_rrh_geometry.iter().enumerate() {
            let n = s.rrhs[j].num_antennas as f64;
            let mu = &st.per_rrh_means[j];
            let rel = (mu.norm_squared() - g.received_power * n * k / (k + 1.0)).abs() / mu.norm_squared();
            assert!(rel < 1e-12);
            let tr = st.per_rrh_covariances[j].trace().re;
            assert!((tr - g.received_power * n / (k + 1.0)).abs() / tr < 1e-12);
            let mag = (g.received_power * k / (k + 1.0)).sqrt();
            for z in mu.iter() {
                assert!((z.norm() - mag).abs() / mag < 1e-12);
            }
        }
    }

    #[test]
    fn large_rice_factor_limit() {
        let mut s = scene(vec![RrhConfig::new("a", [0.0, 0.0], 4, 0.0)]);
        s.rice_factor = 1e12;
        let st = channel_statistics(&s, &s.alice).unwrap();
        let p = st.per_rrh_geometry[0].received_power;
        assert!(st.stacked_covariance.norm() < 1e-10 * p);
        assert!((st.stacked_mean.norm_squared() - 4.0 * p).abs() / (4.0 * p) < 1e-10);
    }

    #[test]
    fn exponential_trace_and_identity_exact() {
        let mut s = scene(vec![RrhConfig::new("a", [0.0, 0.0], 4, 30.0)]);
        let st = channel_statistics(&s, &s.alice).unwrap();
        let p = st.per_rrh_geometry[0].received_power;
        let want = CMatrix::identity(4, 4) * Complex64::new(p / (s.rice_factor + 1.0), 0.0);
        assert_eq!(st.per_rrh_covariances[0], want);
        s.correlation = CorrelationModel::Exponential { rho: -0.6 };
        let st = channel_statistics(&s, &s.alice).unwrap();
        let tr = st.per_rrh_covariances[0].trace().re;
        assert!((tr - 4.0 * p / (s.rice_factor + 1.0)).abs() / tr < 1e-12);
    }

    proptest! {
        #[test]
        fn first_entry_phase(x in -30.0f64..30.0, y in 1.0f64..30.0) {
            let s = scene(vec![RrhConfig::new("a", [0.0, 0.0], 4, 17.0)]);
            let st = channel_statistics_at(&s, [x, y], 1.0).unwrap();
            let d = distance([x, y], [0.0, 0.0]);
            let want = -2.0 * PI * d / s.wavelength();
            let got = st.stacked_mean[0].arg();
            let diff = (got - want).rem_euclid(2.0 * PI);
            prop_assert!(diff.min(2.0 * PI - diff) < 1e-8);
        }

        #[test]
        fn translation_invariance(dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
            let rrhs = vec![RrhConfig::new("a", [0.0, 0.0], 3, 10.0), RrhConfig::new("b", [12.0, 3.0], 2, 95.0)];
            let s = scene(rrhs.clone());
            let mut moved = s.clone();
            for r in moved.rrhs.iter_mut() {
                r.position = [r.position[0] + dx, r.position[1] + dy];
            }
            let p = [5.0, 7.0];
            let a = channel_statistics_at(&s, p, 1.0).unwrap();
            let b = channel_statistics_at(&moved, [p[0] + dx, p[1] + dy], 1.0).unwrap();
            let scale = a.stacked_mean.norm();
            prop_assert!((&a.stacked_mean - &b.stacked_mean).norm() <= 1e-12 * scale);
            prop_assert!((&a.stacked_covariance - &b.stacked_covariance).norm() <= 1e-12 * a.stacked_covariance.norm());
        }
    }
}

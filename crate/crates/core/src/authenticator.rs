//! GLRT authentication against Alice's channel statistics.
//!
//! A received channel `h` is accepted when
//! `d(h) = 2 (h - mu_A)^dagger Sigma_A^{-1} (h - mu_A) < T`. Under the
//! legitimate hypothesis `d(h)` is chi-square with `2 * total antennas`
//! degrees of freedom, which fixes `T` for a target false-alarm rate.

use crate::channel::ChannelStatistics;
use crate::error::{Error, Result};
use crate::numerics::{chi2_sf, chi2_upper_quantile, BlockCholesky, CMatrix, CVector};

#[derive(Debug, Clone)]
pub struct AuthenticatorState {
    legit_stats: ChannelStatistics,
    chol: BlockCholesky,
    /// Dense block-diagonal `L_A^{-1}`.
    whitener: CMatrix,
    threshold: f64,
    mahalanobis_energy: f64,
    total_dof: u32,
    /// `Sigma_A^{-1} mu_A`
    weighted_mean: CVector,
    /// `L_A^{-1} mu_A`
    whitened_mean: CVector,
}

impl AuthenticatorState {
    pub fn with_threshold(legit_stats: ChannelStatistics, threshold: f64) -> Result<Self> {
        if !(threshold >= 0.0) || !threshold.is_finite() {
            return Err(Error::Domain(format!("threshold must be finite and >= 0, got {threshold}")));
        }
        let chol = BlockCholesky::new(&legit_stats.per_rrh_covariances)?;
        let n = chol.dim();
        let l = chol.dense_lower();
        let whitener = l
            .solve_lower_triangular(&CMatrix::identity(n, n))
            .ok_or(Error::NotPositiveDefinite)?;
        let weighted_mean = chol.solve(&legit_stats.stacked_mean)?;
        let whitened_mean = chol.solve_lower(&legit_stats.stacked_mean)?;
        let m = whitened_mean.norm_squared();
        if !(m > 0.0) {
            return Err(Error::Domain("legitimate mean has zero energy".into()));
        }
        Ok(Self {
            total_dof: 2 * n as u32,
            legit_stats,
            chol,
            whitener,
            threshold,
            mahalanobis_energy: m,
            weighted_mean,
            whitened_mean,
        })
    }

    /// Calibrate `T` so the false-alarm rate equals `p_fa`.
    pub fn for_false_alarm(legit_stats: ChannelStatistics, p_fa: f64) -> Result<Self> {
        let dof = 2 * legit_stats.dim() as u32;
        let t = threshold_for_dof(p_fa, dof)?;
        Self::with_threshold(legit_stats, t)
    }

    /// Same statistics, different threshold.
    pub fn rethresholded(&self, threshold: f64) -> Result<Self> {
        if !(threshold >= 0.0) || !threshold.is_finite() {
            return Err(Error::Domain(format!("threshold must be finite and >= 0, got {threshold}")));
        }
        let mut s = self.clone();
        s.threshold = threshold;
        Ok(s)
    }

    pub fn legit_stats(&self) -> &ChannelStatistics {
        &self.legit_stats
    }

    pub fn cholesky(&self) -> &BlockCholesky {
        &self.chol
    }

    pub fn whitener(&self) -> &CMatrix {
        &self.whitener
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `M = mu_A^dagger Sigma_A^{-1} mu_A`
    pub fn mahalanobis_energy(&self) -> f64 {
        self.mahalanobis_energy
    }

    pub fn total_dof(&self) -> u32 {
        self.total_dof
    }

    pub fn dim(&self) -> usize {
        self.chol.dim()
    }

    pub fn weighted_mean(&self) -> &CVector {
        &self.weighted_mean
    }

    pub fn whitened_mean(&self) -> &CVector {
        &self.whitened_mean
    }

    fn check_dim(&self, h: &CVector) -> Result<()> {
        if h.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: h.len(),
            });
        }
        Ok(())
    }

    /// `d(h) = 2 (h - mu_A)^dagger Sigma_A^{-1} (h - mu_A)`, summed over RRH blocks.
    pub fn discriminant(&self, h: &CVector) -> Result<f64> {
        Ok(self.block_discriminants(h)?.iter().sum())
    }

    /// The per-RRH soft decisions `d^(j)`.
    pub fn block_discriminants(&self, h: &CVector) -> Result<Vec<f64>> {
        self.check_dim(h)?;
        let diff = h - &self.legit_stats.stacked_mean;
        Ok(self.chol.block_quad_forms(&diff)?.into_iter().map(|q| 2.0 * q).collect())
    }

    pub fn accepts(&self, h: &CVector) -> Result<bool> {
        Ok(self.discriminant(h)? < self.threshold)
    }

    pub fn threshold_for_pfa(&self, p_fa: f64) -> Result<f64> {
        threshold_for_dof(p_fa, self.total_dof)
    }

    pub fn pfa_of_threshold(&self, t: f64) -> f64 {
        pfa_for_dof(t, self.total_dof)
    }

    pub fn false_alarm_rate(&self) -> f64 {
        self.pfa_of_threshold(self.threshold)
    }

    /// `mu_A^dagger Sigma_A^{-1} h`
    pub fn cross_term(&self, h: &CVector) -> Result<num_complex::Complex64> {
        self.check_dim(h)?;
        Ok(self.weighted_mean.dotc(h))
    }

    /// `h^dagger Sigma_A^{-1} h`
    pub fn inv_energy(&self, h: &CVector) -> Result<f64> {
        Ok(self.chol.block_quad_forms(h)?.iter().sum())
    }

    /// Objective `|mu_A^dagger Sigma_A^{-1} h|^2 / (h^dagger Sigma_A^{-1} h)`.
    pub fn f_obj(&self, h: &CVector) -> Result<f64> {
        let e = self.inv_energy(h)?;
        if !(e > 0.0) {
            return Err(Error::Domain("objective is undefined for the zero vector".into()));
        }
        Ok(self.cross_term(h)?.norm_sqr() / e)
    }
}

pub fn threshold_for_dof(p_fa: f64, dof: u32) -> Result<f64> {
    chi2_upper_quantile(p_fa, dof)
}

pub fn pfa_for_dof(t: f64, dof: u32) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    chi2_sf(t, dof).expect("dof >= 1 and t > 0")
}

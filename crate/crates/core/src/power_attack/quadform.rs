//! Gaussian quadratic forms `Q = sum_i d_i |w_i + c_i|^2`, `w ~ CN(0, I)`, and
//! saddle-point approximations of their tail `P(Q > level)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::authenticator::AuthenticatorState;
use crate::channel::ChannelStatistics;
use crate::error::{Error, Result};
use crate::numerics::{bracketed_root_find, hermitian_eigendecomposition, normal_pdf, normal_sf, BlockCholesky, CMatrix, CVector};

use super::strategy::PowerStrategy;

/// Diagonalized form: the event of interest is `sum_i d_i |w_i + c_i|^2 > level`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndefiniteForm {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub offset: Vec<Complex64>,
    /// `t = 1 - T / (2M)` for the optimal attack; `NaN` for fixed strategies.
    pub threshold_param: f64,
    pub level: f64,
}

impl IndefiniteForm {
    pub fn positive_count(&self) -> usize {
        self.eigenvalues.iter().filter(|&&d| d > 0.0).count()
    }

    pub fn negative_count(&self) -> usize {
        self.eigenvalues.iter().filter(|&&d| d < 0.0).count()
    }

    /// Evaluate `Q(w) - level` for one standard normal draw.
    pub fn evaluate(&self, w: &[Complex64]) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.offset)
            .zip(w)
            .map(|((d, c), w)| d * (w + c).norm_sqr())
            .sum::<f64>()
            - self.level
    }
}

/// How the tail of an indefinite form is approximated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    /// Lugannani-Rice saddle-point formula on the cumulant generating function.
    #[default]
    LugannaniRice,
    /// First-order contour saddle point `e^{s(z0)} / sqrt(2 pi s''(z0))`.
    Contour,
}

fn lower_factor(stats: &ChannelStatistics) -> Result<(BlockCholesky, CMatrix)> {
    let chol = BlockCholesky::new(&stats.per_rrh_covariances)?;
    let l = chol.dense_lower();
    Ok((chol, l))
}

fn check_dims(auth: &AuthenticatorState, eve: &ChannelStatistics) -> Result<()> {
    if eve.dim() != auth.dim() {
        return Err(Error::DimensionMismatch {
            expected: auth.dim(),
            actual: eve.dim(),
        });
    }
    Ok(())
}

fn diagonalize(a: &CMatrix, b: &CVector, threshold_param: f64, level: f64) -> Result<IndefiniteForm> {
    let eig = hermitian_eigendecomposition(a)?;
    let c = eig.eigenvectors.adjoint() * b;
    Ok(IndefiniteForm {
        eigenvalues: eig.eigenvalues,
        offset: c.iter().copied().collect(),
        threshold_param,
        level,
    })
}

/// Reduce `{F_obj(h_E) > t M}` for `h_E ~ CN(mu_E, Sigma_E)` to a diagonal form.
pub fn build_indefinite_form(auth: &AuthenticatorState, eve: &ChannelStatistics) -> Result<IndefiniteForm> {
    check_dims(auth, eve)?;
    let m = auth.mahalanobis_energy();
    let t = 1.0 - auth.threshold() / (2.0 * m);
    if !(t > 0.0) {
        return Err(Error::Precondition(format!(
            "threshold {} is not below 2M = {}",
            auth.threshold(),
            2.0 * m
        )));
    }
    let (chol_e, l_e) = lower_factor(eve)?;
    // A = L_E^dagger (p p^dagger / M - t Sigma_A^{-1}) L_E with Sigma_A^{-1} = W^dagger W.
    let v = l_e.adjoint() * auth.weighted_mean();
    let b = auth.whitener() * &l_e;
    let a = (&v * v.adjoint()) * Complex64::new(1.0 / m, 0.0) - (b.adjoint() * &b) * Complex64::new(t, 0.0);
    let offset = chol_e.solve_lower(&eve.stacked_mean)?;
    diagonalize(&a, &offset, t, 0.0)
}

/// Reduce `{d(eta e^{j psi} h_E) < T}` to `{sum_i d_i |w_i + c_i|^2 > -T/2}` with all `d_i < 0`.
pub fn build_fixed_strategy_form(
    auth: &AuthenticatorState,
    eve: &ChannelStatistics,
    strategy: PowerStrategy,
) -> Result<IndefiniteForm> {
    check_dims(auth, eve)?;
    if !(strategy.amplitude > 0.0) {
        return Err(Error::Domain("fixed strategy needs eta > 0".into()));
    }
    let (chol_e, l_e) = lower_factor(eve)?;
    let eta = strategy.amplitude;
    let shift = &eve.stacked_mean * strategy.factor() - &auth.legit_stats().stacked_mean;
    // x = eta e^{j psi} L_E (w + b) with b = (eta L_E)^{-1} (shift), up to the unit phase absorbed in w.
    let rot = Complex64::from_polar(1.0, -strategy.phase);
    let b = chol_e.solve_lower(&(&shift * rot))? / Complex64::new(eta, 0.0);
    let g = auth.whitener() * &l_e * Complex64::new(eta, 0.0);
    let a = -(g.adjoint() * &g);
    diagonalize(&a, &b, f64::NAN, -auth.threshold() / 2.0)
}

/// Approximate `P(Q > level)` with the default method.
pub fn saddlepoint_tail_probability(form: &IndefiniteForm) -> Result<f64> {
    tail_probability(form, TailMethod::default())
}

pub fn tail_probability(form: &IndefiniteForm, method: TailMethod) -> Result<f64> {
    let a: Vec<f64> = form.offset.iter().map(|c| c.norm_sqr()).collect();
    upper_tail(&form.eigenvalues, &a, form.level, method)
}

/// `P(sum_i d_i |w_i + c_i|^2 > x)` given `a_i = |c_i|^2`.
pub fn upper_tail(d: &[f64], a: &[f64], x: f64, method: TailMethod) -> Result<f64> {
    if d.len() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: d.len(),
            actual: a.len(),
        });
    }
    if d.iter().chain(a).any(|v| !v.is_finite()) || !x.is_finite() {
        return Err(Error::NonFinite("quadratic form parameters".into()));
    }
    let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(if x < 0.0 { 1.0 } else { 0.0 });
    }
    // Scale-free coordinates; negligible eigenvalues carry no mass.
    let (dn, an): (Vec<f64>, Vec<f64>) = d
        .iter()
        .zip(a)
        .filter(|(di, _)| di.abs() > 1e-13 * scale)
        .map(|(di, ai)| (di / scale, *ai))
        .unzip();
    let xn = x / scale;
    let any_pos = dn.iter().any(|&v| v > 0.0);
    let any_neg = dn.iter().any(|&v| v < 0.0);
    if !any_neg && xn <= 0.0 {
        return Ok(1.0);
    }
    if !any_pos && xn >= 0.0 {
        return Ok(0.0);
    }
    let p = match method {
        TailMethod::LugannaniRice => lugannani_rice_upper(&dn, &an, xn)?,
        TailMethod::Contour => {
            let neg: Vec<f64> = dn.iter().map(|v| -v).collect();
            contour_lower(&neg, &an, -xn)?
        }
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Walk from `start` toward `bound` (or outward when infinite) until `pred` holds.
fn search_side<F: Fn(f64) -> bool>(bound: f64, dir: f64, pred: F) -> Result<f64> {
    if bound.is_finite() {
        let mut delta = 0.5;
        for _ in 0..1100 {
            let th = bound * (1.0 - delta);
            if pred(th) {
                return Ok(th);
            }
            delta *= 0.5;
        }
    } else {
        let mut th = dir;
        for _ in 0..1100 {
            if pred(th) {
                return Ok(th);
            }
            th *= 2.0;
        }
    }
    Err(Error::NoSignChange {
        lo: if dir < 0.0 { bound } else { 0.0 },
        hi: if dir < 0.0 { 0.0 } else { bound },
    })
}

/// Cumulant generating function of `Q - x` and its first three derivatives.
fn cgf(d: &[f64], a: &[f64], x: f64, th: f64) -> [f64; 4] {
    let mut k = -th * x;
    let mut k1 = -x;
    let mut k2 = 0.0;
    let mut k3 = 0.0;
    for (&di, &ai) in d.iter().zip(a) {
        let q = 1.0 - th * di;
        let r = di / q;
        k += th * r * ai - (-th * di).ln_1p();
        k1 += r * ai / q + r;
        k2 += 2.0 * r * r * ai / q + r * r;
        k3 += 6.0 * r * r * r * ai / q + 2.0 * r * r * r;
    }
    [k, k1, k2, k3]
}

fn lugannani_rice_upper(d: &[f64], a: &[f64], x: f64) -> Result<f64> {
    // The CGF is finite for 1/min(d<0) < theta < 1/max(d>0).
    let hi = d.iter().filter(|&&v| v > 0.0).map(|v| 1.0 / v).fold(f64::INFINITY, f64::min);
    let lo = d.iter().filter(|&&v| v < 0.0).map(|v| 1.0 / v).fold(f64::NEG_INFINITY, f64::max);
    let k1 = |th: f64| cgf(d, a, x, th)[1];
    let k1_0 = k1(0.0);
    let theta = if k1_0 == 0.0 {
        0.0
    } else if k1_0 > 0.0 {
        let l = search_side(lo, -1.0, |th| k1(th) < 0.0)?;
        bracketed_root_find(k1, l, 0.0, 1e-14)?
    } else {
        let r = search_side(hi, 1.0, |th| k1(th) > 0.0)?;
        bracketed_root_find(k1, 0.0, r, 1e-14)?
    };
    let [k, _, k2, _] = cgf(d, a, x, theta);
    let w = theta.signum() * (-2.0 * k).max(0.0).sqrt();
    let u = theta * k2.sqrt();
    if w.abs() < 1e-5 || u.abs() < 1e-5 {
        // Continuity limit at the mean.
        let [_, _, c2, c3] = cgf(d, a, x, 0.0);
        return Ok(0.5 - c3 / (6.0 * (2.0 * PI).sqrt() * c2.powf(1.5)));
    }
    Ok(normal_sf(w) + normal_pdf(w) * (1.0 / u - 1.0 / w))
}

/// First-order contour saddle point for `P(sum_i d_i |w_i + c_i|^2 < x)`.
///
/// `s(z) = -sum |c|^2 z d / (1 + z d) - ln z - sum ln(1 + z d) + z x`
/// on `0 < z < min over d<0 of -1/d`.
pub fn contour_lower(d: &[f64], a: &[f64], x: f64) -> Result<f64> {
    let zmax = d.iter().filter(|&&v| v < 0.0).map(|v| -1.0 / v).fold(f64::INFINITY, f64::min);
    let derivs = |z: f64| {
        let mut s = -z.ln() + z * x;
        let mut s1 = -1.0 / z + x;
        let mut s2 = 1.0 / (z * z);
        for (&di, &ai) in d.iter().zip(a) {
            let q = 1.0 + z * di;
            s += -ai * z * di / q - (z * di).ln_1p();
            s1 += -ai * di / (q * q) - di / q;
            s2 += 2.0 * ai * di * di / (q * q * q) + di * di / (q * q);
        }
        [s, s1, s2]
    };
    let s1 = |z: f64| derivs(z)[1];
    let left = {
        let mut z = if zmax.is_finite() { zmax * 1e-3 } else { 1e-3 };
        let mut n = 0;
        while s1(z) >= 0.0 {
            z *= 0.5;
            n += 1;
            if n > 1100 {
                return Err(Error::NoSignChange { lo: 0.0, hi: zmax });
            }
        }
        z
    };
    let right = if zmax.is_finite() {
        search_side(zmax, 1.0, |z| z > left && s1(z) > 0.0)?
    } else {
        search_side(f64::INFINITY, left.max(1.0), |z| s1(z) > 0.0)?
    };
    let z0 = bracketed_root_find(s1, left, right, 1e-14)?;
    let [s, _, s2] = derivs(z0);
    Ok(s.exp() / (2.0 * PI * s2).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monte_carlo::chunk_rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn mc_upper(d: &[f64], c: &[Complex64], x: f64, n: usize, seed: u64) -> f64 {
        let mut rng = chunk_rng(seed, 0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut hits = 0usize;
        for _ in 0..n {
            let mut q = 0.0;
            for (di, ci) in d.iter().zip(c) {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                q += di * (Complex64::new(re * s, im * s) + ci).norm_sqr();
            }
            hits += (q > x) as usize;
        }
        hits as f64 / n as f64
    }

    #[test]
    fn degenerate_signs() {
        for m in [TailMethod::LugannaniRice, TailMethod::Contour] {
            assert_eq!(upper_tail(&[1.0, 2.0], &[0.3, 0.0], 0.0, m).unwrap(), 1.0);
            assert_eq!(upper_tail(&[-1.0, -2.0], &[0.3, 0.0], 0.0, m).unwrap(), 0.0);
        }
    }

    #[test]
    fn symmetric_difference_is_half() {
        let p = upper_tail(&[1.0, -1.0], &[0.0, 0.0], 0.0, TailMethod::LugannaniRice).unwrap();
        assert!((p - 0.5).abs() < 0.05, "{p}");
        // Oracle for the exact tie.
        let mc = mc_upper(&[1.0, -1.0], &[Complex64::new(0.0, 0.0); 2], 0.0, 200_000, 1);
        assert!((mc - 0.5).abs() < 0.005);
    }

    #[test]
    fn contour_symmetric_value_is_frozen() {
        // s(z) = -ln z - ln(1 - z^2) gives z0 = 1/sqrt(3) and e^s / sqrt(2 pi s'') = 0.3455...
        let p = upper_tail(&[1.0, -1.0], &[0.0, 0.0], 0.0, TailMethod::Contour).unwrap();
        let z0: f64 = 1.0 / 3f64.sqrt();
        let s = -z0.ln() - (1.0 - z0 * z0).ln();
        let s2 = 1.0 / (z0 * z0) + 1.0 / (1.0 - z0).powi(2) + 1.0 / (1.0 + z0).powi(2);
        let want = s.exp() / (2.0 * PI * s2).sqrt();
        assert!((p - want).abs() < 1e-10, "{p} vs {want}");
    }

    #[test]
    fn single_positive_exponential_exact() {
        // Q = |w|^2 is Exp(1): P(Q > 2) = e^{-2}. LR is exact up to its own error, check 5%.
        let p = upper_tail(&[1.0], &[0.0], 2.0, TailMethod::LugannaniRice).unwrap();
        assert!((p / (-2.0f64).exp() - 1.0).abs() < 0.05, "{p}");
    }

    #[test]
    fn lugannani_rice_tracks_sampling() {
        let cases: Vec<(Vec<f64>, Vec<Complex64>, f64)> = vec![
            (vec![1.0, -0.3, -0.3], vec![Complex64::new(1.0, 0.5), Complex64::new(0.2, 0.0), Complex64::new(0.0, -0.4)], 0.0),
            (vec![0.8, -0.5, -0.2, -0.1], vec![Complex64::new(0.3, 0.0); 4], 0.0),
            (vec![-1.0, -0.5], vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.5)], -2.0),
        ];
        for (i, (d, c, x)) in cases.iter().enumerate() {
            let a: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
            let sp = upper_tail(d, &a, *x, TailMethod::LugannaniRice).unwrap();
            let mc = mc_upper(d, c, *x, 400_000, 10 + i as u64);
            assert!((sp - mc).abs() <= 0.1 * mc + 3e-3, "case {i}: {sp} vs {mc}");
        }
    }

    #[test]
    fn contour_stationary_point_is_unique() {
        // Dense evaluation of s' on a two-eigenvalue form shows a single sign change.
        let d = [1.0, -0.5];
        let a = [0.4, 0.1];
        let zmax = 1.0;
        let s1 = |z: f64| -> f64 {
            let mut v = -1.0 / z;
            for (&di, &ai) in d.iter().zip(&a) {
                let q = 1.0 + z * (-di);
                v += -ai * (-di) / (q * q) - (-di) / q;
            }
            v
        };
        let mut changes = 0;
        let mut prev = s1(1e-6);
        for i in 1..100_000 {
            let z = zmax * i as f64 / 100_000.0;
            let cur = s1(z);
            if (cur > 0.0) != (prev > 0.0) {
                changes += 1;
            }
            prev = cur;
        }
        assert_eq!(changes, 1);
        assert!(upper_tail(&d, &a, 0.0, TailMethod::Contour).is_ok());
    }
}

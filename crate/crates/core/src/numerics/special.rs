//! Chi-square, incomplete beta and normal-tail helpers.
//!
//! The incomplete gamma/beta kernels come from `statrs`; this module pins
//! the domain checks and the inversion used for threshold calibration.

use statrs::function::{beta, erf, gamma};

use crate::error::{Error, Result};
use crate::numerics::roots::bracketed_root_find;

fn check_dof(dof: u32) -> Result<()> {
    if dof == 0 {
        return Err(Error::Domain("chi-square degrees of freedom must be >= 1".into()));
    }
    Ok(())
}

/// CDF of the central chi-square distribution with `dof` degrees of freedom.
pub fn chi2_cdf(x: f64, dof: u32) -> Result<f64> {
    check_dof(dof)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("chi-square argument must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    gamma::checked_gamma_lr(dof as f64 / 2.0, x / 2.0).map_err(|e| Error::Domain(e.to_string()))
}

/// Survival function `1 - chi2_cdf(x, dof)`, evaluated without cancellation.
pub fn chi2_sf(x: f64, dof: u32) -> Result<f64> {
    check_dof(dof)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("chi-square argument must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    gamma::checked_gamma_ur(dof as f64 / 2.0, x / 2.0).map_err(|e| Error::Domain(e.to_string()))
}

/// Inverse of [`chi2_cdf`].
pub fn chi2_quantile(p: f64, dof: u32) -> Result<f64> {
    check_dof(dof)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile probability must lie in (0,1), got {p}")));
    }
    // Work with whichever tail is smaller so the log residual keeps relative precision.
    if p <= 0.5 {
        invert_chi2(dof, |x| Ok(safe_ln(chi2_cdf(x, dof)?) - p.ln()))
    } else {
        let q = 1.0 - p;
        invert_chi2(dof, |x| Ok(q.ln() - safe_ln(chi2_sf(x, dof)?)))
    }
}

/// Inverse of [`chi2_sf`]; accurate for tiny upper-tail probabilities.
pub fn chi2_upper_quantile(q: f64, dof: u32) -> Result<f64> {
    check_dof(dof)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("tail probability must lie in (0,1), got {q}")));
    }
    if q <= 0.5 {
        invert_chi2(dof, |x| Ok(q.ln() - safe_ln(chi2_sf(x, dof)?)))
    } else {
        let p = 1.0 - q;
        invert_chi2(dof, |x| Ok(safe_ln(chi2_cdf(x, dof)?) - p.ln()))
    }
}

fn safe_ln(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        -1e6
    }
}

/// Root of an increasing residual, solved in `ln x`.
fn invert_chi2<F>(dof: u32, residual: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut hi = (dof as f64).max(2.0);
    while residual(hi)? < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoConvergence(0));
        }
    }
    let lo_ln = -1400.0_f64;
    let hi_ln = hi.ln();
    // Residual errors are surfaced by evaluating once more after the search.
    let y = bracketed_root_find(|y| residual(y.exp()).unwrap_or(f64::NAN), lo_ln, hi_ln, 1e-14)?;
    let x = y.exp();
    residual(x)?;
    Ok(x)
}

/// Regularized incomplete beta function `I_q(a, b)`.
pub fn regularized_incomplete_beta(q: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("incomplete beta argument must lie in [0,1], got {q}")));
    }
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("incomplete beta shapes must be positive, got a={a}, b={b}")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    if q == 1.0 {
        return Ok(1.0);
    }
    beta::checked_beta_reg(a, b, q)
        .map(|v| v.clamp(0.0, 1.0))
        .map_err(|e| Error::Domain(e.to_string()))
}

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

/// Upper tail of the standard normal distribution.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erf::erfc(x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// CDF of the noncentral chi-square distribution (`dof` degrees of freedom,
/// noncentrality `lambda`), as a Poisson mixture of central chi-square CDFs.
pub fn noncentral_chi2_cdf(x: f64, dof: u32, lambda: f64) -> Result<f64> {
    check_dof(dof)?;
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!("noncentrality must be finite and >= 0, got {lambda}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if lambda == 0.0 {
        return chi2_cdf(x, dof);
    }
    let half = lambda / 2.0;
    // Sum outward from the Poisson mode so the weights never underflow early.
    let mode = half.floor() as u64;
    let log_w = |j: u64| -half + j as f64 * half.ln() - ln_gamma(j as f64 + 1.0);
    let term = |j: u64| -> Result<f64> {
        let k = dof as f64 / 2.0 + j as f64;
        let cdf = gamma::checked_gamma_lr(k, x / 2.0).map_err(|e| Error::Domain(e.to_string()))?;
        Ok(log_w(j).exp() * cdf)
    };
    let mut total = 0.0;
    let mut mass = 0.0;
    let mut j = mode;
    loop {
        let w = log_w(j).exp();
        total += term(j)?;
        mass += w;
        if j == 0 || (w < 1e-18 && j + 10 < mode) {
            break;
        }
        j -= 1;
    }
    let mut j = mode + 1;
    while mass < 1.0 - 1e-15 && j < mode + 100_000 {
        let w = log_w(j).exp();
        total += term(j)?;
        mass += w;
        if w < 1e-18 && j > mode + 10 {
            break;
        }
        j += 1;
    }
    Ok(total.clamp(0.0, 1.0))
}

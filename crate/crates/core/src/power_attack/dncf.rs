//! Doubly noncentral F distribution.

use crate::error::Result;
use crate::numerics::regularized_incomplete_beta;
use crate::numerics::special::ln_gamma;

const POISSON_TAIL: f64 = 1e-12;

/// Poisson(`mean`) indices and weights covering at least `1 - POISSON_TAIL` of the mass.
fn poisson_support(mean: f64) -> Vec<(u64, f64)> {
    if mean <= 0.0 {
        return vec![(0, 1.0)];
    }
    let log_w = |j: u64| -mean + j as f64 * mean.ln() - ln_gamma(j as f64 + 1.0);
    let mode = mean.floor() as u64;
    let mut out = vec![(mode, log_w(mode).exp())];
    let mut mass = out[0].1;
    let (mut lo, mut hi) = (mode, mode);
    while mass < 1.0 - POISSON_TAIL {
        let wl = if lo > 0 { log_w(lo - 1).exp() } else { 0.0 };
        let wh = log_w(hi + 1).exp();
        if wl == 0.0 && wh == 0.0 {
            break;
        }
        if wl >= wh {
            lo -= 1;
            out.push((lo, wl));
            mass += wl;
        } else {
            hi += 1;
            out.push((hi, wh));
            mass += wh;
        }
    }
    out.sort_by_key(|&(j, _)| j);
    out
}

/// CDF of `(X1/k1) / (X2/k2)` with `X1 ~ chi2_{k1}(nu1)`, `X2 ~ chi2_{k2}(nu2)`.
pub fn dncf_cdf(x: f64, nu1: f64, nu2: f64, k1: u32, k2: u32) -> Result<f64> {
    if k1 == 0 || k2 == 0 || k1 % 2 != 0 || k2 % 2 != 0 {
        return Err(crate::Error::Domain(format!(
            "degrees of freedom must be positive even integers, got ({k1}, {k2})"
        )));
    }
    if !(x > 0.0) {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let nu1 = nu1.max(0.0);
    let nu2 = nu2.max(0.0);
    let (k1f, k2f) = (k1 as f64, k2 as f64);
    let q = k1f * x / (k2f + k1f * x);
    let rs = poisson_support(nu1 / 2.0);
    let ss = poisson_support(nu2 / 2.0);
    let mut total = 0.0;
    for &(r, wr) in &rs {
        let mut inner = 0.0;
        for &(s, ws) in &ss {
            inner += ws * regularized_incomplete_beta(q, k1f / 2.0 + r as f64, k2f / 2.0 + s as f64)?;
        }
        total += wr * inner;
    }
    Ok(total.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monte_carlo::chunk_rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn nonpositive_argument() {
        assert_eq!(dncf_cdf(0.0, 1.0, 1.0, 2, 2).unwrap(), 0.0);
        assert_eq!(dncf_cdf(-3.0, 1.0, 1.0, 2, 2).unwrap(), 0.0);
    }

    #[test]
    fn central_f22_median_is_one() {
        assert!((dncf_cdf(1.0, 0.0, 0.0, 2, 2).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn central_matches_incomplete_beta() {
        for &(k1, k2) in &[(2u32, 2u32), (2, 6), (4, 14), (8, 2)] {
            for &x in &[0.1, 0.7, 1.0, 2.5, 10.0] {
                let q = k1 as f64 * x / (k2 as f64 + k1 as f64 * x);
                let want = regularized_incomplete_beta(q, k1 as f64 / 2.0, k2 as f64 / 2.0).unwrap();
                assert!((dncf_cdf(x, 0.0, 0.0, k1, k2).unwrap() - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn monotone_in_x() {
        let mut prev = 0.0;
        for i in 1..200 {
            let x = i as f64 * 0.05;
            let v = dncf_cdf(x, 3.0, 1.5, 2, 6).unwrap();
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn matches_sampled_ratio() {
        // nu1 = 2, nu2 = 0, k1 = 2, k2 = 4, x = 1.5
        let n = 1_000_000;
        let mut rng = chunk_rng(77, 0);
        let mut hits = 0u64;
        for _ in 0..n {
            let mut g = || -> f64 { rng.sample(StandardNormal) };
            let x1 = (g() + 2f64.sqrt()).powi(2) + g().powi(2);
            let x2: f64 = (0..4).map(|_| g().powi(2)).sum();
            hits += ((x1 / 2.0) / (x2 / 4.0) <= 1.5) as u64;
        }
        let p = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let v = dncf_cdf(1.5, 2.0, 0.0, 2, 4).unwrap();
        assert!((v - p).abs() < 3.0 * se, "{v} vs {p} ± {se}");
    }

    #[test]
    fn poisson_support_mass() {
        for &m in &[0.0, 0.3, 5.0, 120.0] {
            let s: f64 = poisson_support(m).iter().map(|p| p.1).sum();
            assert!((s - 1.0).abs() < 1e-11, "{m}: {s}");
        }
    }
}

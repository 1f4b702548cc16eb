//! Strong line-of-sight objective and small-scale phase metric as functions of
//! Eve's position.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::authenticator::AuthenticatorState;
use crate::channel::{angular_sine, correlation_matrix, distance, steering_vector};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector, CholeskyFactor};
use crate::scenario::{Point, RrhConfig, Scenario};

/// `|mu_A^dagger Sigma_A^{-1} h|^2 / (h^dagger Sigma_A^{-1} h)`, scale invariant in `h`.
pub fn f_obj(auth: &AuthenticatorState, h: &CVector) -> Result<f64> {
    auth.f_obj(h)
}

/// `S = e(a)^dagger Lambda^{-1} e(b)` and the real amplitude `g` with
/// `S = exp(j pi (N-1) Delta_r (a - b)) g`.
pub fn angular_inner_product(lambda_inv: &CMatrix, omega_a: f64, omega_b: f64, spacing: f64) -> Result<(Complex64, f64)> {
    let n = lambda_inv.nrows();
    let ea = steering_vector(omega_a, spacing, n);
    let eb = steering_vector(omega_b, spacing, n);
    let s = ea.dotc(&(lambda_inv * eb));
    let g = real_amplitude(s, n, spacing, omega_a - omega_b, lambda_inv)?;
    Ok((s, g))
}

fn real_amplitude(s: Complex64, n: usize, spacing: f64, d_omega: f64, lambda_inv: &CMatrix) -> Result<f64> {
    let rot = Complex64::from_polar(1.0, -PI * (n as f64 - 1.0) * spacing * d_omega) * s;
    let floor = 1e-12 * lambda_inv.iter().map(|z| z.norm()).sum::<f64>();
    if rot.im.abs() > 1e-9 * s.norm() + floor {
        return Err(Error::UnsupportedCorrelation {
            residual: rot.im.abs() / s.norm().max(f64::MIN_POSITIVE),
        });
    }
    Ok(rot.re)
}

/// Per-RRH quantities tied to Alice.
#[derive(Debug, Clone)]
pub struct ArrayModel {
    pub rrh: RrhConfig,
    pub n: usize,
    pub lambda_inv: CMatrix,
    pub identity: bool,
    pub d_alice: f64,
    pub omega_alice: f64,
    /// `Lambda^{-1} e(Omega_A)`
    v_alice: CVector,
}

/// Per-RRH terms for one Eve position.
#[derive(Debug, Clone, Copy)]
pub struct EveTerm {
    pub distance: f64,
    pub omega: f64,
    /// `e(Omega_E)^dagger Lambda^{-1} e(Omega_A)`
    pub s_ea: Complex64,
    pub s_ee: f64,
    pub g: f64,
}

/// Everything needed to score Eve positions without rebuilding channel statistics.
#[derive(Debug, Clone)]
pub struct AttackGeometry {
    pub wavelength: f64,
    pub path_loss_exponent: f64,
    pub rice_factor: f64,
    pub spacing: f64,
    pub arrays: Vec<ArrayModel>,
}

impl AttackGeometry {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let spacing = scenario.antenna_spacing;
        let mut arrays = Vec::with_capacity(scenario.rrhs.len());
        for rrh in &scenario.rrhs {
            let n = rrh.num_antennas;
            let lam = correlation_matrix(scenario.correlation, n)?;
            let identity = lam == CMatrix::identity(n, n);
            let lambda_inv = if identity {
                lam
            } else {
                CholeskyFactor::new(&lam)?.inverse()
            };
            let omega_alice = angular_sine(rrh, scenario.alice.position)?;
            let v_alice = &lambda_inv * steering_vector(omega_alice, spacing, n);
            arrays.push(ArrayModel {
                rrh: rrh.clone(),
                n,
                lambda_inv,
                identity,
                d_alice: distance(rrh.position, scenario.alice.position),
                omega_alice,
                v_alice,
            });
        }
        Ok(Self {
            wavelength: scenario.wavelength(),
            path_loss_exponent: scenario.path_loss_exponent,
            rice_factor: scenario.rice_factor,
            spacing,
            arrays,
        })
    }

    /// `g_j` as a function of Eve's angular sine, with Alice's fixed.
    pub fn g(&self, j: usize, omega: f64) -> f64 {
        let a = &self.arrays[j];
        let s = self.s_ea(j, omega);
        let rot = Complex64::from_polar(1.0, -PI * (a.n as f64 - 1.0) * self.spacing * (omega - a.omega_alice));
        (rot * s).re
    }

    fn s_ea(&self, j: usize, omega: f64) -> Complex64 {
        // sum_k conj(e_k(omega)) v_k with conj(e_k) = exp(+j 2 pi Delta_r k omega), by recurrence.
        let a = &self.arrays[j];
        let step = Complex64::from_polar(1.0, 2.0 * PI * self.spacing * omega);
        let mut ph = Complex64::new(1.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for v in a.v_alice.iter() {
            s += ph * v;
            ph *= step;
        }
        s
    }

    fn s_ee(&self, j: usize, omega: f64) -> f64 {
        let a = &self.arrays[j];
        if a.identity {
            return a.n as f64;
        }
        let e = steering_vector(omega, self.spacing, a.n);
        e.dotc(&(&a.lambda_inv * &e)).re
    }

    pub fn eve_term(&self, j: usize, p: Point) -> Result<EveTerm> {
        let a = &self.arrays[j];
        let omega = angular_sine(&a.rrh, p)?;
        let s_ea = self.s_ea(j, omega);
        let rot = Complex64::from_polar(1.0, -PI * (a.n as f64 - 1.0) * self.spacing * (omega - a.omega_alice));
        Ok(EveTerm {
            distance: distance(a.rrh.position, p),
            omega,
            s_ea,
            s_ee: self.s_ee(j, omega),
            g: (rot * s_ea).re,
        })
    }

    /// Strong-LoS objective `f_obj(mu_E)` through per-array inner products.
    pub fn expanded_f_obj(&self, p: Point) -> Result<f64> {
        let beta = self.path_loss_exponent;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..self.arrays.len() {
            let t = self.eve_term(j, p)?;
            let r = self.arrays[j].d_alice / t.distance;
            let dphi = 2.0 * PI * (t.distance - self.arrays[j].d_alice) / self.wavelength;
            num += Complex64::from_polar(r.powf(beta / 2.0), dphi) * t.s_ea;
            den += r.powf(beta) * t.s_ee;
        }
        Ok(self.rice_factor * num.norm_sqr() / den)
    }

    /// `phi_0^(j)`, the carrier phase of RRH `j`'s contribution.
    pub fn small_scale_phase(&self, j: usize, t: &EveTerm) -> f64 {
        let a = &self.arrays[j];
        let dphi = 2.0 * PI * (t.distance - a.d_alice) / self.wavelength;
        let sign = if t.g < 0.0 { -1.0 } else { 1.0 };
        dphi + PI * (a.n as f64 - 1.0) * self.spacing * (t.omega - a.omega_alice) + (PI / 2.0) * (sign - 1.0)
    }

    /// `|sum_j exp(j phi_0^(j))|`, in `[0, N_RRH]`.
    pub fn f_small_scale(&self, p: Point) -> Result<f64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.arrays.len() {
            let t = self.eve_term(j, p)?;
            acc += Complex64::from_polar(1.0, self.small_scale_phase(j, &t));
        }
        Ok(acc.norm())
    }

    /// Both scores at once.
    pub fn scores(&self, p: Point) -> Result<(f64, f64, Vec<EveTerm>)> {
        let beta = self.path_loss_exponent;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut terms = Vec::with_capacity(self.arrays.len());
        for j in 0..self.arrays.len() {
            let t = self.eve_term(j, p)?;
            let a = &self.arrays[j];
            let r = a.d_alice / t.distance;
            let dphi = 2.0 * PI * (t.distance - a.d_alice) / self.wavelength;
            num += Complex64::from_polar(r.powf(beta / 2.0), dphi) * t.s_ea;
            den += r.powf(beta) * t.s_ee;
            acc += Complex64::from_polar(1.0, self.small_scale_phase(j, &t));
            terms.push(t);
        }
        Ok((self.rice_factor * num.norm_sqr() / den, acc.norm(), terms))
    }
}

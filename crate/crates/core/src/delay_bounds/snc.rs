//! Mellin transforms and the kernel delay bound.

use serde::Serialize;

use crate::error::{Error, Result};

const GRID_POINTS: usize = 400;
const GRID_LO: f64 = 1e-3;
const GRID_HI: f64 = 1e2;

/// Frame service of `rate * resources` bits, lost with probability `outage_probability`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ServiceModel {
    pub rate: f64,
    pub resources: u32,
    pub outage_probability: f64,
}

impl ServiceModel {
    pub fn new(rate: f64, resources: u32, outage_probability: f64) -> Result<Self> {
        if !(rate > 0.0) || resources == 0 || !(0.0..=1.0).contains(&outage_probability) {
            return Err(Error::Domain(format!(
                "service needs rate > 0, resources >= 1, outage in [0, 1]; got ({rate}, {resources}, {outage_probability})"
            )));
        }
        Ok(Self {
            rate,
            resources,
            outage_probability,
        })
    }

    /// Bits served in a successful frame.
    pub fn frame_bits(&self) -> f64 {
        self.rate * self.resources as f64
    }
}

/// Constant arrivals per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArrivalModel {
    pub bits_per_frame: f64,
}

impl ArrivalModel {
    pub fn new(bits_per_frame: f64) -> Result<Self> {
        if !(bits_per_frame >= 0.0) || !bits_per_frame.is_finite() {
            return Err(Error::Domain(format!("arrivals must be >= 0, got {bits_per_frame}")));
        }
        Ok(Self { bits_per_frame })
    }
}

pub fn mellin_arrival(arrival: &ArrivalModel, s: f64) -> f64 {
    (arrival.bits_per_frame * (s - 1.0)).exp()
}

pub fn mellin_service(service: &ServiceModel, s: f64) -> f64 {
    let p = service.outage_probability;
    (service.frame_bits() * (s - 1.0)).exp() * (1.0 - p) + p
}

fn ln_mellin_service(service: &ServiceModel, s: f64) -> f64 {
    let p = service.outage_probability;
    let a = if p < 1.0 {
        (1.0 - p).ln() + service.frame_bits() * (s - 1.0)
    } else {
        f64::NEG_INFINITY
    };
    let b = p.ln();
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayBound {
    /// Bound clamped to `[0, 1]`.
    pub bound: f64,
    pub raw: f64,
    pub s_opt: f64,
}

/// Log of the kernel bound at `s`, or `None` outside the stability region.
fn ln_kernel(arrival: &ArrivalModel, service: &ServiceModel, w: u32, s: f64) -> Option<f64> {
    let ls = ln_mellin_service(service, 1.0 - s);
    let stab = arrival.bits_per_frame * s + ls;
    if !(stab < 0.0) {
        return None;
    }
    Some(w as f64 * ls - (-(stab.exp_m1())).ln())
}

/// `min_s M_S(1-s)^w / (1 - M_A(1+s) M_S(1-s))` over stable `s > 0`.
pub fn delay_violation_bound(arrival: &ArrivalModel, service: &ServiceModel, deadline_w: u32) -> Result<DelayBound> {
    if deadline_w == 0 {
        return Err(Error::Domain("deadline must be at least one frame".into()));
    }
    let ratio = (GRID_HI / GRID_LO).powf(1.0 / (GRID_POINTS - 1) as f64);
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| GRID_LO * ratio.powi(i as i32)).collect();
    let f = |s: f64| ln_kernel(arrival, service, deadline_w, s).unwrap_or(f64::INFINITY);
    let (best, _) = grid
        .iter()
        .enumerate()
        .map(|(i, &s)| (i, f(s)))
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::Unstable)?;

    // Golden-section refinement on the neighbouring grid cells, in log s.
    let lo = grid[best.saturating_sub(1)].ln();
    let hi = grid[(best + 1).min(GRID_POINTS - 1)].ln();
    let g = |x: f64| f(x.exp());
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    for _ in 0..100 {
        if b - a < 1e-12 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    let candidates = [grid[best], (0.5 * (a + b)).exp()];
    let s_opt = candidates
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .expect("two candidates");
    let raw = f(s_opt).exp();
    Ok(DelayBound {
        bound: raw.clamp(0.0, 1.0),
        raw,
        s_opt,
    })
}

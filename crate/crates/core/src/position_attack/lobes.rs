//! Main-lobe and first-sidelobe bands of each array's angular response
//! around Alice's direction.
//!
//! Bands are stored as angular-sine intervals. An angular sine `Omega`
//! corresponds to the two angles `asin(Omega)` and `pi - asin(Omega)` relative
//! to the array axis, so membership tests on `Omega` cover both mirror angles.

use serde::Serialize;

use super::objective::AttackGeometry;
use crate::error::{Error, Result};
use crate::numerics::bracketed_root_find;
use crate::scenario::SearchConfig;

const SCAN_OVERSAMPLING: f64 = 64.0;
const MAX_OFFSET: f64 = 2.0;

/// Closed interval of angular sines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OmegaInterval {
    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.lo && omega <= self.hi
    }

    fn clipped(lo: f64, hi: f64) -> Option<Self> {
        let (lo, hi) = (lo.max(-1.0), hi.min(1.0));
        (lo <= hi).then_some(Self { lo, hi })
    }

    /// The two angle intervals (radians, w.r.t. the array axis) mapped to this band.
    pub fn angle_intervals(&self) -> [(f64, f64); 2] {
        let (a, b) = (self.lo.asin(), self.hi.asin());
        let pi = std::f64::consts::PI;
        [(a, b), (pi - b, pi - a)]
    }
}

/// Lobe bands for one RRH.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrayLobes {
    pub omega_alice: f64,
    pub main: OmegaInterval,
    /// Up to two bands, one on each side of the main lobe.
    pub first_sidelobes: Vec<OmegaInterval>,
    /// Sidelobe peak offsets `Omega - Omega_A` that were found.
    pub sidelobe_centers: Vec<f64>,
}

impl ArrayLobes {
    pub fn in_main(&self, omega: f64) -> bool {
        self.main.contains(omega)
    }

    pub fn in_first_sidelobe(&self, omega: f64) -> bool {
        self.first_sidelobes.iter().any(|b| b.contains(omega))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LobeSets {
    pub arrays: Vec<ArrayLobes>,
}

struct Side {
    main_edge: f64,
    sidelobe: Option<(f64, f64, f64)>,
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Walks outward from the main-lobe peak in direction `sign`.
fn scan_side(amp: &dyn Fn(f64) -> f64, peak: f64, g0: f64, step: f64, sign: f64) -> Result<Side> {
    let at = |x: f64| amp(sign * x);
    let level = peak / g0;
    let steps = (MAX_OFFSET / step).ceil() as usize;
    let xs = |i: usize| i as f64 * step;

    let mut i = 1;
    while i <= steps && at(xs(i)) >= level {
        i += 1;
    }
    if i > steps {
        return Ok(Side {
            main_edge: MAX_OFFSET,
            sidelobe: None,
        });
    }
    let main_edge = bracketed_root_find(|x| at(x) - level, xs(i - 1), xs(i), 1e-13)?;

    // Successive local minima of |g| beyond the edge bound the first sidelobe.
    let mut minima = Vec::new();
    let mut prev = at(xs(i - 1));
    let mut cur = at(xs(i));
    while i < steps && minima.len() < 2 {
        let next = at(xs(i + 1));
        if cur <= prev && cur < next {
            let neg = |x: f64| -at(x);
            minima.push(golden_max(&neg, xs(i - 1), xs(i + 1)));
        }
        prev = cur;
        cur = next;
        i += 1;
    }
    if minima.len() < 2 {
        return Ok(Side {
            main_edge,
            sidelobe: None,
        });
    }
    let (z1, z2) = (minima[0], minima[1]);
    let center = golden_max(&at, z1, z2);
    let top = at(center);
    let edge = top / g0;
    let lo = if at(z1) >= edge {
        z1
    } else {
        bracketed_root_find(|x| at(x) - edge, z1, center, 1e-13)?
    };
    let hi = if at(z2) >= edge {
        z2
    } else {
        bracketed_root_find(|x| at(x) - edge, center, z2, 1e-13)?
    };
    Ok(Side {
        main_edge,
        sidelobe: Some((lo, center, hi)),
    })
}

/// Lobe bands for every RRH. Offsets are measured in angular sine from Alice's.
pub fn lobe_sets(geometry: &AttackGeometry, config: &SearchConfig) -> Result<LobeSets> {
    if !(config.g0 > 1.0) {
        return Err(Error::Domain(format!("g0 must be > 1, got {}", config.g0)));
    }
    let mut arrays = Vec::with_capacity(geometry.arrays.len());
    for (j, a) in geometry.arrays.iter().enumerate() {
        let oa = a.omega_alice;
        if a.n == 1 {
            arrays.push(ArrayLobes {
                omega_alice: oa,
                main: OmegaInterval { lo: -1.0, hi: 1.0 },
                first_sidelobes: Vec::new(),
                sidelobe_centers: Vec::new(),
            });
            continue;
        }
        let amp = |d: f64| geometry.g(j, oa + d).abs();
        let peak = amp(0.0);
        let step = 1.0 / (geometry.spacing * a.n as f64 * SCAN_OVERSAMPLING);
        let right = scan_side(&amp, peak, config.g0, step, 1.0)?;
        let left = scan_side(&amp, peak, config.g0, step, -1.0)?;
        let main = OmegaInterval::clipped(oa - left.main_edge, oa + right.main_edge)
            .expect("main lobe contains Alice's angular sine");
        let mut first_sidelobes = Vec::new();
        let mut sidelobe_centers = Vec::new();
        if let Some((lo, c, hi)) = right.sidelobe {
            sidelobe_centers.push(c);
            first_sidelobes.extend(OmegaInterval::clipped(oa + lo, oa + hi));
        }
        if let Some((lo, c, hi)) = left.sidelobe {
            sidelobe_centers.push(-c);
            first_sidelobes.extend(OmegaInterval::clipped(oa - hi, oa - lo));
        }
        arrays.push(ArrayLobes {
            omega_alice: oa,
            main,
            first_sidelobes,
            sidelobe_centers,
        });
    }
    Ok(LobeSets { arrays })
}

impl LobeSets {
    /// Lobe tag of a point with per-RRH angular sines `omegas`, if it belongs to
    /// the search set.
    pub fn classify(&self, omegas: &[f64], include_sidelobes: bool) -> Option<String> {
        if let Some(j) = self.arrays.iter().zip(omegas).position(|(l, &o)| l.in_main(o)) {
            return Some(format!("main({j})"));
        }
        if !include_sidelobes {
            return None;
        }
        let side: Vec<usize> = self
            .arrays
            .iter()
            .zip(omegas)
            .enumerate()
            .filter(|(_, (l, &o))| l.in_first_sidelobe(o))
            .map(|(j, _)| j)
            .collect();
        (side.len() >= 2).then(|| format!("side1({})∩side1({})", side[0], side[1]))
    }
}

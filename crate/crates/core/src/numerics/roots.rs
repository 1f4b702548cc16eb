use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 200;

/// Brent's method on a sign-changing bracket.
///
/// Returns `z` with `|f(z)| <= tol` or a final bracket narrower than
/// `tol * max(1, |z|)`. The result always lies inside `[lo, hi]`.
pub fn bracketed_root_find<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    bracketed_root_find_with_cap(f, lo, hi, tol, DEFAULT_MAX_ITER)
}

pub fn bracketed_root_find_with_cap<F>(f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() || !fb.is_finite() || fa * fb > 0.0 {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let width_tol = 0.5 * tol * b.abs().max(1.0);
        let m = 0.5 * (c - b);
        if fb.abs() <= tol || m.abs() <= width_tol {
            return Ok(b);
        }
        if e.abs() >= width_tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (width_tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > width_tol {
            d
        } else {
            width_tol.copysign(m)
        };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NonFinite("root function returned a non-finite value".into()));
        }
    }
    Err(Error::NoConvergence(max_iter))
}

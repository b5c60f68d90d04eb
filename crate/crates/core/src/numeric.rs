//! Small scalar routines shared by the engine and the optimizer.

use crate::error::{Result, ZenoError};
use crate::spin::Complex;

/// `ln(1 + z)` accurate for small `|z|`.
pub fn ln_1p(z: Complex) -> Complex {
    // |1 + z|^2 = 1 + (2 re + |z|^2)
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    Complex::new(re, im)
}

/// `exp(z) - 1` accurate for small `|z|`.
pub fn exp_m1(z: Complex) -> Complex {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    // cos y - 1 = -2 sin^2(y/2)
    let cos_m1 = -2.0 * half * half;
    let re = z.re.exp_m1() * c + cos_m1;
    let im = z.re.exp() * s;
    Complex::new(re, im)
}

/// `ln|cos u|` without the cancellation of `cos(u).ln()` near zero.
pub fn ln_abs_cos(u: f64) -> f64 {
    let (s, c) = u.sin_cos();
    if c.abs() < 0.5 {
        c.abs().ln()
    } else {
        0.5 * (-s * s).ln_1p()
    }
}

/// Bisection on `[lo, hi]` to absolute tolerance `tol` in the abscissa.
///
/// The bracket must show a sign change; an exact zero at either end is returned as is.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut g_lo = f(lo);
    let g_hi = f(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if !(g_lo.signum() != g_hi.signum()) || g_lo.is_nan() || g_hi.is_nan() {
        return Err(ZenoError::NoSignChange { lo, hi, g_lo, g_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = f(mid);
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Stops when the bracket width falls below `rel_tol * |x|`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..500 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

//! Bracketed root finding (Brent's method) with optional bracket expansion.

use crate::error::{Error, Result};

pub const DEFAULT_ROOT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_EXPANSIONS: usize = 20;
const MAX_ITERATIONS: usize = 200;

/// Finds a root of `g` inside `[lo, hi]`; `g(lo)` and `g(hi)` must not share a sign.
///
/// Mixes inverse quadratic interpolation, secant and bisection steps and
/// never evaluates outside the bracket. Returns once the bracket around the
/// root is narrower than `tol`.
pub fn find_root<G>(g: G, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) || !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "root bracket must be finite with positive tolerance (lo {lo}, hi {hi}, tol {tol})"
        )));
    }
    let g_lo = g(lo);
    let g_hi = g(hi);
    brent(&g, lo, hi, g_lo, g_hi, tol)
}

/// Like [`find_root`], but widens the bracket about its center by doubling
/// until a sign change appears, at most `max_expansions` times.
pub fn find_root_expanding<G>(
    g: G,
    lo: f64,
    hi: f64,
    tol: f64,
    max_expansions: usize,
) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::invalid(format!(
            "initial bracket [{lo}, {hi}] is not a finite interval"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let mut ga = g(a);
    let mut gb = g(b);
    let mut attempts = 0;
    while ga.signum() == gb.signum() && ga != 0.0 && gb != 0.0 {
        if attempts == max_expansions || ga.is_nan() || gb.is_nan() {
            return Err(Error::BracketExpansion {
                attempts,
                lo: a,
                hi: b,
                context: None,
            });
        }
        let center = 0.5 * (a + b);
        let half = b - a;
        // double the width about the center
        a = center - half;
        b = center + half;
        ga = g(a);
        gb = g(b);
        attempts += 1;
    }
    brent(&g, a, b, ga, gb, tol)
}

fn brent<G>(g: &G, lo: f64, hi: f64, g_lo: f64, g_hi: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if g_lo.is_nan() || g_hi.is_nan() || (g_lo * g_hi > 0.0) {
        return Err(Error::InvalidBracket { lo, hi, g_lo, g_hi });
    }
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }

    let (mut a, mut b, mut c) = (lo, hi, hi);
    let (mut fa, mut fb, mut fc) = (g_lo, g_hi, g_hi);
    let mut d = b - a;
    let mut e = d;

    for _ in 0..MAX_ITERATIONS {
        if (fb > 0.0) == (fc > 0.0) {
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
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = g(b);
        if fb.is_nan() {
            return Err(Error::invalid(format!("root function returned NaN at {b}")));
        }
    }
    Err(Error::RootNoConvergence {
        iterations: MAX_ITERATIONS,
        lo: b.min(c),
        hi: b.max(c),
    })
}

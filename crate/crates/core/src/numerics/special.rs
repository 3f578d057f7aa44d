//! Standard normal density, distribution function, and quantile.
//!
//! The distribution function is built on `erfc`, which keeps full relative
//! precision deep into the lower tail. `ln Φ` switches to the asymptotic
//! Mills-ratio series once `erfc` would underflow.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// (2π)^{-1/2}
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this argument `ln Φ` uses the asymptotic expansion.
const LOG_CDF_ASYMPTOTIC: f64 = -30.0;

#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Density with non-finite input rejected.
pub fn checked_std_normal_pdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid(format!(
            "normal density needs a finite argument, got {x}"
        )));
    }
    Ok(std_normal_pdf(x))
}

/// Φ(x). Accepts ±∞; NaN propagates.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

#[inline]
pub fn std_normal_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// ln Φ(x), accurate in relative terms for arbitrarily negative `x`.
pub fn std_normal_log_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= LOG_CDF_ASYMPTOTIC {
        if x > 0.0 {
            (-0.5 * libm::erfc(x * FRAC_1_SQRT_2)).ln_1p()
        } else {
            std_normal_cdf(x).ln()
        }
    } else if x == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        // Φ(x) = φ(x)/(-x) · (1 - 1/x² + 3/x⁴ - 15/x⁶ + ...)
        let z = 1.0 / (x * x);
        let series = 1.0
            - z * (1.0
                - 3.0 * z * (1.0 - 5.0 * z * (1.0 - 7.0 * z * (1.0 - 9.0 * z * (1.0 - 11.0 * z)))));
        std_normal_log_pdf(x) - (-x).ln() + series.ln()
    }
}

/// Inverse Mills ratio φ(x)/Φ(x), stable for large negative `x`.
pub fn inverse_mills_ratio(x: f64) -> f64 {
    if x > LOG_CDF_ASYMPTOTIC {
        let cdf = std_normal_cdf(x);
        if cdf > 1e-300 {
            return std_normal_pdf(x) / cdf;
        }
    }
    (std_normal_log_pdf(x) - std_normal_log_cdf(x)).exp()
}

/// Φ^{-1}(p) for p in (0, 1).
///
/// Starts from the Abramowitz–Stegun 26.2.23 rational approximation and
/// polishes with Halley steps against [`std_normal_cdf`].
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "quantile needs p in (0, 1), got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        // 1 - p is exact for p >= 0.5
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile(p: f64) -> f64 {
    let t = (-2.0 * p.ln()).sqrt();
    let num = 2.515_517 + t * (0.802_853 + t * 0.010_328);
    let den = 1.0 + t * (1.432_788 + t * (0.189_269 + t * 0.001_308));
    let mut x = -(t - num / den);

    for _ in 0..50 {
        let err = std_normal_cdf(x) - p;
        let u = err / std_normal_pdf(x);
        let step = u / (1.0 + 0.5 * x * u);
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

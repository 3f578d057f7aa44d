//! Independent oracles: brute-force Simpson integration of the bivariate
//! normal density, written without any of the library's numerics.

use ordloc::data::{plugin_model, summarize, table2};
use ordloc::estimators::{bz_absolute_shift, bz_squared, restricted_mle};
use ordloc::model::{normal_density, NormalLocationModel};

/// Values computed once with an external quadrature package and frozen.
const SECTION4_PSI_SQUARED: f64 = 0.372_897_8;
const SECTION4_PSI_ABSOLUTE: f64 = 0.371_510_6;

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

fn bvn_pdf(sigma: f64, rho: f64, z1: f64, z2: f64) -> f64 {
    let q = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / ((1.0 - rho * rho) * sigma * sigma);
    (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * sigma * sigma * (1.0 - rho * rho).sqrt())
}

/// `h_t(s) = ∫_{-∞}^{t} f(s, s + y) dy`, truncated 14 sd below `t`.
fn h_oracle(sigma: f64, rho: f64, s: f64, t: f64) -> f64 {
    let tau = sigma * (2.0 * (1.0 - rho)).sqrt();
    let lo = (t.min(0.0) - 14.0 * tau).min(-s - 14.0 * tau);
    simpson(|y| bvn_pdf(sigma, rho, s, s + y), lo, t, 4000)
}

fn conditional_mean_and_median(sigma: f64, rho: f64, t: f64) -> (f64, f64) {
    let center = (-0.5 * t).max(0.0);
    let (a, b) = (center - 10.0 * sigma, center + 10.0 * sigma);
    let n = 2000;
    let h = (b - a) / n as f64;
    let hs: Vec<f64> = (0..=n)
        .map(|i| h_oracle(sigma, rho, a + i as f64 * h, t))
        .collect();
    let mass: f64 = simpson(|s| hs[((s - a) / h).round() as usize], a, b, n);
    let first: f64 = simpson(|s| s * hs[((s - a) / h).round() as usize], a, b, n);
    // median from the trapezoid cumulative, refined linearly
    let mut cum = 0.0;
    let mut median = f64::NAN;
    for i in 0..n {
        let piece = 0.5 * h * (hs[i] + hs[i + 1]);
        if cum + piece >= 0.5 * mass {
            let frac = (0.5 * mass - cum) / piece;
            median = a + (i as f64 + frac) * h;
            break;
        }
        cum += piece;
    }
    (first / mass, median)
}

#[test]
fn h_t_closed_form_matches_brute_force() {
    for &(sigma, rho) in &[(1.0, 0.0), (0.2, -0.9), (2.0, 0.5)] {
        let d = normal_density(NormalLocationModel::new(sigma, rho).unwrap());
        for &(s, t) in &[
            (0.0, 0.0),
            (0.3 * sigma, -sigma),
            (-1.2 * sigma, 2.0 * sigma),
        ] {
            let got = d.partial_cdf(s, t).unwrap();
            assert!(
                (got - h_oracle(sigma, rho, s, t)).abs() < 1e-9 / sigma,
                "{sigma} {rho} {s} {t}"
            );
        }
    }
}

#[test]
fn squared_shift_is_conditional_mean() {
    for &(sigma, rho, t) in &[
        (1.0, 0.0, 0.0),
        (1.0, 0.0, -2.0),
        (0.5, 0.2, 0.4),
        (2.0, -0.5, 3.0),
    ] {
        let m = NormalLocationModel::new(sigma, rho).unwrap();
        let (mean, _) = conditional_mean_and_median(sigma, rho, t);
        assert!(
            (bz_squared(m).psi(t) - mean).abs() < 1e-6,
            "{sigma} {rho} {t}"
        );
    }
}

#[test]
fn absolute_shift_is_conditional_median() {
    for &(sigma, rho, t) in &[(1.0, 0.0, 0.0), (1.0, 0.5, -1.5), (0.2, -0.9, 0.1)] {
        let m = NormalLocationModel::new(sigma, rho).unwrap();
        let (_, median) = conditional_mean_and_median(sigma, rho, t);
        let got = bz_absolute_shift(m, t).unwrap();
        assert!(
            (got - median).abs() < 1e-5 * sigma,
            "{sigma} {rho} {t}: {got} vs {median}"
        );
    }
}

#[test]
fn dental_plugin_estimates() {
    // the rounded means as reported with the table
    let s = summarize(&table2()).unwrap();
    let (x1, x2) = (23.077, 22.654);
    assert!((s.mean1 - x1).abs() < 5e-4 && (s.mean2 - x2).abs() < 5e-4);
    let m = plugin_model(0.418, 0.626).unwrap();
    let d = x2 - x1;

    let (mean, median) = conditional_mean_and_median(m.sigma(), m.rho(), d);
    assert!((mean - SECTION4_PSI_SQUARED).abs() < 1e-6);
    assert!((median - SECTION4_PSI_ABSOLUTE).abs() < 1e-5);

    let sq = bz_squared(m).estimate(x1, x2);
    assert!((sq.0 - (x1 - SECTION4_PSI_SQUARED)).abs() < 1e-6);
    assert!((sq.1 - (x2 + SECTION4_PSI_SQUARED)).abs() < 1e-6);
    let c = bz_absolute_shift(m, d).unwrap();
    assert!((c - SECTION4_PSI_ABSOLUTE).abs() < 1e-6);

    assert!((sq.0 - 22.704_102).abs() < 1e-6 && (sq.1 - 23.026_898).abs() < 1e-6);
    let ab = (x1 - c, x2 + c);
    assert!((ab.0 - 22.705_489).abs() < 1e-6 && (ab.1 - 23.025_511).abs() < 1e-6);

    let mle = restricted_mle().estimate(x1, x2);
    assert!((mle.0 - 22.8655).abs() < 1e-4 && (mle.1 - 22.8655).abs() < 1e-4);
}

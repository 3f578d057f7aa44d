//! Exact and simulated risk of equivariant estimators.
//!
//! Risk depends on `θ` only through `λ = θ2 - θ1`, so curves are indexed by
//! `λ` with `θ = (0, λ)`.
//!
//! The exact engine integrates `R = 2 ∫ r_λ(ψ(t), t) dt` where
//! `r_λ(c, t) = ∫ W(s - c) f(s, s + t - λ) ds`.
//! The simulation engine keys every `λ` point to its own substream
//! `(seed, λ-index)` and reuses those draws for every estimator (common
//! random numbers), so tables do not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::PsiEstimator;
use crate::model::{Loss, NormalLocationModel, SymmetricDensity, ThetaPoint};
use crate::numerics::{BivariateNormal, Integral, Quadrature, Rng};

/// Outer integral of the exact risk runs over `λ ± TRUNCATION · sd(D)`.
pub const TRUNCATION: f64 = 10.0;
pub const DEFAULT_EXACT_TOL: f64 = 1e-8;

/// Paper default sample count per grid point.
pub const DEFAULT_REPLICATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean: f64,
    /// Sample standard deviation of the per-replication losses over `√n`.
    pub std_error: f64,
    pub n: usize,
    pub seed: u64,
    pub loss: String,
    pub lambda: f64,
}

/// One row of a risk table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub estimator: String,
    #[serde(flatten)]
    pub risk: RiskEstimate,
}

/// `r_λ(c, t) = ∫ W(s - c) f(s, s + t - λ) ds`.
pub fn r_lambda(
    density: &SymmetricDensity,
    loss: &Loss,
    c: f64,
    t: f64,
    lambda: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(r_lambda_quad(density, loss, c, t, lambda, DEFAULT_EXACT_TOL * 1e-2)?.value)
}

fn r_lambda_quad(
    density: &SymmetricDensity,
    loss: &Loss,
    c: f64,
    t: f64,
    lambda: f64,
    tol: f64,
) -> Result<Integral> {
    let u = t - lambda;
    Quadrature::new(tol)
        .rel_tol(1e-11)
        .breakpoints(SymmetricDensity::spread_points(
            -0.5 * u,
            density.cond_scale(),
        ))
        .breakpoints([c])
        .integrate(
            |s| {
                let f = density.pdf(s, s + u);
                if f == 0.0 {
                    0.0
                } else {
                    loss.w(s - c) * f
                }
            },
            f64::NEG_INFINITY,
            f64::INFINITY,
        )
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    Ok(())
}

/// `R(λ) = 2 ∫ r_λ(ψ(t), t) dt` by nested quadrature.
pub fn exact_risk(
    density: &SymmetricDensity,
    lambda: f64,
    e: &PsiEstimator,
    loss: &Loss,
    tol: f64,
) -> Result<f64> {
    Ok(exact_risk_detailed(density, lambda, e, loss, tol)?.value)
}

/// As [`exact_risk`], with the achieved error estimate.
///
/// The outer integral is taken over `λ ± 10·sd(D)`. The two tails beyond
/// it are integrated separately and their size is added to `abs_error`
/// rather than to the value.
pub fn exact_risk_detailed(
    density: &SymmetricDensity,
    lambda: f64,
    e: &PsiEstimator,
    loss: &Loss,
    tol: f64,
) -> Result<Integral> {
    check_lambda(lambda)?;
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let width = TRUNCATION * density.diff_scale();
    let inner_tol = tol * 1e-2 / width;
    let outer = |t: f64| -> Result<f64> {
        let c = e.psi(t);
        if !c.is_finite() {
            return Err(Error::invalid(format!(
                "shift of {} is not finite at t = {t}",
                e.name()
            )));
        }
        Ok(2.0 * r_lambda_quad(density, loss, c, t, lambda, inner_tol)?.value)
    };
    let (lo, hi) = (lambda - width, lambda + width);
    let body = Quadrature::new(tol)
        .rel_tol(1e-12)
        .breakpoints([0.0])
        .breakpoints(
            SymmetricDensity::spread_points(lambda, density.diff_scale())
                .filter(|x| *x > lo && *x < hi),
        )
        .try_integrate(outer, lo, hi)?;
    let tail_quad = Quadrature::new(tol).rel_tol(1e-6);
    let left = tail_quad.try_integrate(outer, f64::NEG_INFINITY, lo)?;
    let right = tail_quad.try_integrate(outer, hi, f64::INFINITY)?;
    Ok(Integral {
        value: body.value,
        abs_error: body.abs_error + left.value.abs() + right.value.abs(),
        intervals: body.intervals,
    })
}

/// Monte Carlo risk at `theta` from `n` draws of substream `(seed, 0)`.
pub fn mc_risk(
    model: NormalLocationModel,
    theta: ThetaPoint,
    e: &PsiEstimator,
    loss: &Loss,
    n: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    let mut rng = Rng::substream(seed, 0);
    let mut rows = simulate_point(model, theta, std::slice::from_ref(e), loss, n, &mut rng)?;
    Ok(rows.remove(0).risk)
}

/// Risk table over `lambda_grid` with `θ = (0, λ)`.
///
/// Grid point `i` draws from substream `(seed, i)`; every estimator sees
/// the same draws there. Rows come back sorted by `λ`, then by estimator
/// name.
pub fn dominance_report(
    model: NormalLocationModel,
    estimators: &[PsiEstimator],
    loss: &Loss,
    lambda_grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<RiskRow>> {
    if estimators.is_empty() {
        return Err(Error::invalid("at least one estimator is required"));
    }
    if lambda_grid.is_empty() {
        return Err(Error::invalid("the lambda grid is empty"));
    }
    let blocks: Vec<Result<Vec<RiskRow>>> = lambda_grid
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let theta = ThetaPoint::canonical(lambda)?;
            let mut rng = Rng::substream(seed, i as u64);
            simulate_point(model, theta, estimators, loss, n, &mut rng)
        })
        .collect();
    let mut rows = Vec::with_capacity(lambda_grid.len() * estimators.len());
    for b in blocks {
        rows.extend(b?);
    }
    rows.sort_by(|a, b| {
        a.risk
            .lambda
            .total_cmp(&b.risk.lambda)
            .then_with(|| a.estimator.cmp(&b.estimator))
    });
    Ok(rows)
}

/// Exact-risk table over `lambda_grid`, in the same row order as
/// [`dominance_report`].
pub fn exact_report(
    density: &SymmetricDensity,
    estimators: &[PsiEstimator],
    loss: &Loss,
    lambda_grid: &[f64],
    tol: f64,
) -> Result<Vec<(f64, String, f64)>> {
    if estimators.is_empty() {
        return Err(Error::invalid("at least one estimator is required"));
    }
    let cells: Vec<(f64, &PsiEstimator)> = lambda_grid
        .iter()
        .flat_map(|&l| estimators.iter().map(move |e| (l, e)))
        .collect();
    let values: Vec<Result<(f64, String, f64)>> = cells
        .par_iter()
        .map(|&(l, e)| {
            Ok((
                l,
                e.name().to_string(),
                exact_risk(density, l, e, loss, tol)?,
            ))
        })
        .collect();
    let mut rows = values.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(rows)
}

fn simulate_point(
    model: NormalLocationModel,
    theta: ThetaPoint,
    estimators: &[PsiEstimator],
    loss: &Loss,
    n: usize,
    rng: &mut Rng,
) -> Result<Vec<RiskRow>> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "at least two replications are required, got {n}"
        )));
    }
    let (theta1, theta2) = theta.as_pair();
    let dist = BivariateNormal::new(theta1, theta2, model.sigma(), model.rho())?;
    let mut acc = vec![Welford::default(); estimators.len()];
    for _ in 0..n {
        let (x1, x2) = dist.sample(rng);
        for (e, a) in estimators.iter().zip(acc.iter_mut()) {
            a.push(loss.total(e.estimate(x1, x2), (theta1, theta2)));
        }
    }
    estimators
        .iter()
        .zip(acc)
        .map(|(e, a)| {
            if !a.mean.is_finite() {
                return Err(Error::invalid(format!(
                    "simulated loss of {} is not finite",
                    e.name()
                )));
            }
            Ok(RiskRow {
                estimator: e.name().to_string(),
                risk: RiskEstimate {
                    mean: a.mean,
                    std_error: (a.m2 / (a.n - 1) as f64).sqrt() / (a.n as f64).sqrt(),
                    n,
                    seed: rng.seed(),
                    loss: loss.name().to_string(),
                    lambda: theta.lambda(),
                },
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    #[inline]
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }
}

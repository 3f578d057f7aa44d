//! The location model, the loss, and grid validators for their assumptions.
//!
//! A [`SymmetricDensity`] is the centered density `f(z1, z2)` of
//! `(X1 - θ1, X2 - θ2)`. The estimators only need it through
//!
//! * `f` itself (for the risk integrals), and
//! * the partial integral `h_t(s) = ∫_{-∞}^{t} f(s, s + y) dy`, the joint
//!   density of `Z1 = s` restricted to `Z2 - Z1 <= t`.
//!
//! The bivariate normal supplies `h_t` in closed form; any other density
//! falls back to one-dimensional quadrature in `y`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{std_normal_cdf, std_normal_pdf};
use crate::numerics::Quadrature;

const INNER_TOL: f64 = 1e-12;
const MASS_TOL: f64 = 1e-11;
/// Denominators below this are skipped by the likelihood-ratio check.
pub const MLR_UNDERFLOW: f64 = 1e-300;

/// Bivariate normal location family with common known `σ` and correlation `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalLocationModel {
    sigma: f64,
    rho: f64,
}

impl NormalLocationModel {
    pub fn new(sigma: f64, rho: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        if !(rho > -1.0 && rho < 1.0) {
            return Err(Error::invalid(format!(
                "rho must lie in (-1, 1), got {rho}"
            )));
        }
        Ok(Self { sigma, rho })
    }

    pub fn from_variance(sigma2: f64, rho: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::invalid(format!(
                "sigma^2 must be positive and finite, got {sigma2}"
            )));
        }
        Self::new(sigma2.sqrt(), rho)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Standard deviation of `D = X2 - X1`: `τ = σ √(2(1 - ρ))`.
    pub fn tau(&self) -> f64 {
        self.sigma * (2.0 * (1.0 - self.rho)).sqrt()
    }

    /// Standard deviation of `Z1` given `Z2 - Z1`: `σ √((1 + ρ)/2)`.
    pub fn conditional_sd(&self) -> f64 {
        self.sigma * (0.5 * (1.0 + self.rho)).sqrt()
    }

    pub fn pdf(&self, z1: f64, z2: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let one_m_r2 = 1.0 - self.rho * self.rho;
        // written so that swapping or negating the arguments is bit-exact
        let q = (z1 * z1 + z2 * z2 - 2.0 * self.rho * (z1 * z2)) / (2.0 * one_m_r2 * s2);
        (-q).exp() / (2.0 * std::f64::consts::PI * s2 * one_m_r2.sqrt())
    }

    /// `h_t(s) = φ(s/σ)/σ · Φ((t + s(1 - ρ)) / (σ√(1 - ρ²)))`
    pub fn partial_cdf(&self, s: f64, t: f64) -> f64 {
        let k = self.sigma * (1.0 - self.rho * self.rho).sqrt();
        std_normal_pdf(s / self.sigma) / self.sigma * std_normal_cdf((t + s * (1.0 - self.rho)) / k)
    }

    /// `P(Z2 - Z1 <= t) = Φ(t/τ)`
    pub fn diff_cdf(&self, t: f64) -> f64 {
        std_normal_cdf(t / self.tau())
    }
}

/// The density of the normal model as a [`SymmetricDensity`].
pub fn normal_density(model: NormalLocationModel) -> SymmetricDensity {
    SymmetricDensity {
        label: format!("normal(sigma={}, rho={})", model.sigma, model.rho),
        pdf: Arc::new(move |z1, z2| model.pdf(z1, z2)),
        scale: model.sigma,
        diff_scale: model.tau(),
        cond_scale: model.conditional_sd(),
        normalization_tol: 1e-8,
        normal: Some(model),
    }
}

/// The closed-form `h_t` of the normal model as a function of `s`.
pub fn partial_cdf_h(model: NormalLocationModel, t: f64) -> impl Fn(f64) -> f64 + Send + Sync {
    move |s| model.partial_cdf(s, t)
}

pub type DensityFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A centered bivariate density assumed symmetric under exchange and
/// reflection. The scales describe where its mass sits and steer quadrature
/// breakpoints; they do not have to be exact.
#[derive(Clone)]
pub struct SymmetricDensity {
    label: String,
    pdf: Arc<DensityFn>,
    scale: f64,
    diff_scale: f64,
    cond_scale: f64,
    normalization_tol: f64,
    normal: Option<NormalLocationModel>,
}

impl fmt::Debug for SymmetricDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetricDensity")
            .field("label", &self.label)
            .field("scale", &self.scale)
            .field("diff_scale", &self.diff_scale)
            .field("cond_scale", &self.cond_scale)
            .field("normal", &self.normal)
            .finish()
    }
}

impl SymmetricDensity {
    /// `scale` is the typical spread of each coordinate. The spread of
    /// `Z2 - Z1` defaults to `√2·scale` and that of `Z1` given the difference
    /// to `scale`.
    pub fn new<F>(label: impl Into<String>, pdf: F, scale: f64) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(format!(
                "density scale must be positive, got {scale}"
            )));
        }
        Ok(Self {
            label: label.into(),
            pdf: Arc::new(pdf),
            scale,
            diff_scale: scale * std::f64::consts::SQRT_2,
            cond_scale: scale,
            normalization_tol: 1e-6,
            normal: None,
        })
    }

    pub fn with_diff_scale(mut self, diff_scale: f64) -> Self {
        self.diff_scale = diff_scale;
        self
    }

    pub fn with_cond_scale(mut self, cond_scale: f64) -> Self {
        self.cond_scale = cond_scale;
        self
    }

    pub fn with_normalization_tol(mut self, tol: f64) -> Self {
        self.normalization_tol = tol;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn pdf(&self, z1: f64, z2: f64) -> f64 {
        (self.pdf)(z1, z2)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn diff_scale(&self) -> f64 {
        self.diff_scale
    }

    pub fn cond_scale(&self) -> f64 {
        self.cond_scale
    }

    pub fn normalization_tol(&self) -> f64 {
        self.normalization_tol
    }

    /// The underlying normal model when the density came from [`normal_density`].
    pub fn normal_model(&self) -> Option<NormalLocationModel> {
        self.normal
    }

    /// Forgets the closed forms, forcing the generic quadrature paths.
    pub fn generic(mut self) -> Self {
        self.normal = None;
        self
    }

    /// Breakpoints spreading `±16·width` around `center`.
    pub(crate) fn spread_points(center: f64, width: f64) -> impl Iterator<Item = f64> {
        [-16.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0]
            .into_iter()
            .map(move |k| center + k * width)
    }

    /// `h_t(s) = ∫_{-∞}^{t} f(s, s + y) dy`.
    pub fn partial_cdf(&self, s: f64, t: f64) -> Result<f64> {
        if let Some(m) = self.normal {
            return Ok(m.partial_cdf(s, t));
        }
        // Z2 = s + y sits within a few scales of the origin
        let r = Quadrature::new(1e-300)
            .rel_tol(INNER_TOL)
            .breakpoints(Self::spread_points(-s, self.scale))
            .integrate(|y| self.pdf(s, s + y), f64::NEG_INFINITY, t)?;
        Ok(r.value)
    }

    /// `P(Z2 - Z1 <= t) = ∫ h_t(s) ds`.
    pub fn diff_cdf(&self, t: f64) -> Result<f64> {
        if let Some(m) = self.normal {
            return Ok(m.diff_cdf(t));
        }
        let center = -0.5 * t.min(0.0);
        let q = Quadrature::new(1e-300)
            .rel_tol(1e-10)
            .breakpoints(Self::spread_points(center, self.cond_scale.min(self.scale)));
        let r = q.try_integrate(|s| self.partial_cdf(s, t), f64::NEG_INFINITY, f64::INFINITY)?;
        Ok(r.value)
    }

    /// Total mass by two-dimensional quadrature over the whole plane.
    pub fn total_mass(&self) -> Result<f64> {
        let inner = |z1: f64| -> Result<f64> {
            Quadrature::new(MASS_TOL * 1e-2)
                .breakpoints(Self::spread_points(0.0, self.scale))
                .integrate(|z2| self.pdf(z1, z2), f64::NEG_INFINITY, f64::INFINITY)
                .map(|r| r.value)
        };
        let r = Quadrature::new(MASS_TOL)
            .breakpoints(Self::spread_points(0.0, self.scale))
            .try_integrate(inner, f64::NEG_INFINITY, f64::INFINITY)?;
        Ok(r.value)
    }

    /// Whether the density integrates to one within its normalization tolerance.
    pub fn check_normalization(&self) -> Result<Check> {
        let mass = self.total_mass()?;
        let violation = (mass - 1.0).abs();
        Ok(Check {
            name: "integrates to one".into(),
            passed: violation <= self.normalization_tol,
            max_violation: violation,
            witness: vec![mass],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Squared,
    Absolute,
    Custom,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Squared => "squared",
            LossKind::Absolute => "absolute",
            LossKind::Custom => "custom",
        })
    }
}

pub type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Componentwise loss `W(a1 - θ1) + W(a2 - θ2)`, carried as `W` and its
/// almost-everywhere derivative `W'`.
#[derive(Clone)]
pub struct Loss {
    kind: LossKind,
    name: String,
    w: Arc<ScalarFn>,
    w_prime: Arc<ScalarFn>,
}

impl fmt::Debug for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Loss")
            .field("kind", &self.kind)
            .field("name", &self.name)
            .finish()
    }
}

impl Loss {
    pub fn squared() -> Self {
        Self {
            kind: LossKind::Squared,
            name: "squared".into(),
            w: Arc::new(|t| t * t),
            w_prime: Arc::new(|t| 2.0 * t),
        }
    }

    /// `W(t) = |t|`, with `W'(0)` taken as 0.
    pub fn absolute() -> Self {
        Self {
            kind: LossKind::Absolute,
            name: "absolute".into(),
            w: Arc::new(f64::abs),
            w_prime: Arc::new(|t| {
                if t > 0.0 {
                    1.0
                } else if t < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }),
        }
    }

    /// A user loss; `w_prime` must be supplied explicitly.
    pub fn custom<W, D>(name: impl Into<String>, w: W, w_prime: D) -> Self
    where
        W: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: LossKind::Custom,
            name: name.into(),
            w: Arc::new(w),
            w_prime: Arc::new(w_prime),
        }
    }

    pub fn from_kind(kind: LossKind) -> Result<Self> {
        match kind {
            LossKind::Squared => Ok(Self::squared()),
            LossKind::Absolute => Ok(Self::absolute()),
            LossKind::Custom => Err(Error::invalid("a custom loss needs explicit W and W'")),
        }
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn w(&self, t: f64) -> f64 {
        (self.w)(t)
    }

    #[inline]
    pub fn w_prime(&self, t: f64) -> f64 {
        (self.w_prime)(t)
    }

    /// `W(a1 - θ1) + W(a2 - θ2)`
    #[inline]
    pub fn total(&self, estimate: (f64, f64), theta: (f64, f64)) -> f64 {
        self.w(estimate.0 - theta.0) + self.w(estimate.1 - theta.1)
    }
}

/// A parameter point of the restricted space `θ1 <= θ2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaPoint {
    theta1: f64,
    theta2: f64,
}

impl ThetaPoint {
    pub fn new(theta1: f64, theta2: f64) -> Result<Self> {
        if !(theta1.is_finite() && theta2.is_finite()) {
            return Err(Error::invalid("theta must be finite"));
        }
        if theta1 > theta2 {
            return Err(Error::invalid(format!(
                "theta1 = {theta1} exceeds theta2 = {theta2}"
            )));
        }
        Ok(Self { theta1, theta2 })
    }

    /// `(0, λ)`, the canonical point for a risk curve.
    pub fn canonical(lambda: f64) -> Result<Self> {
        Self::new(0.0, lambda)
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn lambda(&self) -> f64 {
        self.theta2 - self.theta1
    }

    pub fn as_pair(&self) -> (f64, f64) {
        (self.theta1, self.theta2)
    }
}

/// One named grid check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub max_violation: f64,
    /// The grid point (or value) where the worst violation occurred.
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Default)]
struct Worst {
    violation: f64,
    witness: Vec<f64>,
}

impl Worst {
    fn record(&mut self, violation: f64, witness: &[f64]) {
        if violation > self.violation || (self.witness.is_empty() && violation.is_nan()) {
            self.violation = violation;
            self.witness = witness.to_vec();
        }
    }

    fn into_check(self, name: &str, tol: f64) -> Check {
        Check {
            name: name.into(),
            passed: self.violation <= tol,
            max_violation: self.violation,
            witness: self.witness,
        }
    }
}

/// A `k × k` square grid on `[-radius, radius]²`.
pub fn square_grid(radius: f64, k: usize) -> Vec<(f64, f64)> {
    let pts = linspace(-radius, radius, k);
    pts.iter()
        .flat_map(|&a| pts.iter().map(move |&b| (a, b)))
        .collect()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub const D1_EXCHANGE: &str = "exchange symmetry";
pub const D1_REFLECTION: &str = "reflection symmetry";

/// Checks `f(z1,z2) = f(z2,z1)` and `f(z1,z2) = f(-z1,-z2)` on the grid.
pub fn validate_d1(
    density: &SymmetricDensity,
    grid: &[(f64, f64)],
    tol: f64,
) -> Result<ValidationReport> {
    if grid.is_empty() {
        return Err(Error::invalid("symmetry validation needs a nonempty grid"));
    }
    let mut exchange = Worst::default();
    let mut reflection = Worst::default();
    for &(z1, z2) in grid {
        let f = density.pdf(z1, z2);
        exchange.record((f - density.pdf(z2, z1)).abs(), &[z1, z2]);
        reflection.record((f - density.pdf(-z1, -z2)).abs(), &[z1, z2]);
    }
    Ok(ValidationReport {
        checks: vec![
            exchange.into_check(D1_EXCHANGE, tol),
            reflection.into_check(D1_REFLECTION, tol),
        ],
    })
}

pub const D2_ZERO: &str = "W(0) = 0";
pub const D2_EVEN: &str = "evenness";
pub const D2_DECREASING: &str = "strictly decreasing on (-inf, 0)";
pub const D2_INCREASING: &str = "strictly increasing on (0, inf)";
pub const D2_DERIVATIVE: &str = "W' nondecreasing";

/// Checks the loss conditions on a grid: `W(0) = 0`, evenness, strict
/// monotonicity away from zero on each side, and nondecreasing `W'`.
pub fn validate_d2(loss: &Loss, grid: &[f64], tol: f64) -> Result<ValidationReport> {
    if grid.is_empty() {
        return Err(Error::invalid("loss validation needs a nonempty grid"));
    }
    let mut pts: Vec<f64> = grid.iter().copied().filter(|t| t.is_finite()).collect();
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();

    let zero = Worst {
        violation: loss.w(0.0).abs(),
        witness: vec![0.0],
    };

    let mut even = Worst::default();
    for &t in &pts {
        even.record((loss.w(t) - loss.w(-t)).abs(), &[t]);
    }

    // strictness: any non-improving step counts, so the tolerance is not used
    let mut decreasing = Worst::default();
    let neg: Vec<f64> = pts.iter().copied().filter(|&t| t < 0.0).collect();
    let mut dec_ok = true;
    for w in neg.windows(2) {
        let step = loss.w(w[1]) - loss.w(w[0]);
        if !(step < 0.0) {
            dec_ok = false;
            decreasing.record(step.max(f64::MIN_POSITIVE), &[w[0], w[1]]);
        }
    }
    let mut increasing = Worst::default();
    let pos: Vec<f64> = pts.iter().copied().filter(|&t| t > 0.0).collect();
    let mut inc_ok = true;
    for w in pos.windows(2) {
        let step = loss.w(w[1]) - loss.w(w[0]);
        if !(step > 0.0) {
            inc_ok = false;
            increasing.record((-step).max(f64::MIN_POSITIVE), &[w[0], w[1]]);
        }
    }

    let mut derivative = Worst::default();
    for w in pts.windows(2) {
        let drop = loss.w_prime(w[0]) - loss.w_prime(w[1]);
        derivative.record(drop, &[w[0], w[1]]);
    }

    let mut dec = decreasing.into_check(D2_DECREASING, f64::INFINITY);
    dec.passed = dec_ok;
    let mut inc = increasing.into_check(D2_INCREASING, f64::INFINITY);
    inc.passed = inc_ok;
    Ok(ValidationReport {
        checks: vec![
            zero.into_check(D2_ZERO, tol),
            even.into_check(D2_EVEN, tol),
            dec,
            inc,
            derivative.into_check(D2_DERIVATIVE, tol),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monotonicity::Increasing => "increasing",
            Monotonicity::Decreasing => "decreasing",
        })
    }
}

/// Observed shape of a sequence on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
    NotMonotone,
}

/// Classifies consecutive values; steps within `tol·max(1, |v|)` are ties.
pub fn classify_trend(values: &[f64], tol: f64) -> Trend {
    let (mut up, mut down) = (false, false);
    for w in values.windows(2) {
        let slack = tol * w[0].abs().max(w[1].abs()).max(1.0);
        let d = w[1] - w[0];
        if d > slack {
            up = true;
        } else if d < -slack {
            down = true;
        }
    }
    match (up, down) {
        (false, false) => Trend::Constant,
        (true, false) => Trend::Increasing,
        (false, true) => Trend::Decreasing,
        (true, true) => Trend::NotMonotone,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MlrReport {
    pub t: f64,
    pub delta: f64,
    pub trend: Trend,
    /// `(s, ratio)` on the grid points that were evaluated.
    pub ratios: Vec<(f64, f64)>,
    /// Grid points whose denominator underflowed.
    pub skipped: Vec<f64>,
}

impl MlrReport {
    pub fn monotone(&self) -> bool {
        self.trend != Trend::NotMonotone
    }
}

/// Checks that `s ↦ h_{t-Δ}(s) / h_t(s)` is monotone on `s_grid`.
pub fn check_mlr(
    density: &SymmetricDensity,
    t: f64,
    delta: f64,
    s_grid: &[f64],
) -> Result<MlrReport> {
    if !(delta >= 0.0) {
        return Err(Error::invalid(format!(
            "delta must be nonnegative, got {delta}"
        )));
    }
    let mut ratios = Vec::with_capacity(s_grid.len());
    let mut skipped = Vec::new();
    for &s in s_grid {
        let den = density.partial_cdf(s, t)?;
        if den < MLR_UNDERFLOW {
            skipped.push(s);
            continue;
        }
        let num = if delta == 0.0 {
            den
        } else {
            density.partial_cdf(s, t - delta)?
        };
        ratios.push((s, num / den));
    }
    let values: Vec<f64> = ratios.iter().map(|r| r.1).collect();
    Ok(MlrReport {
        t,
        delta,
        trend: classify_trend(&values, 1e-12),
        ratios,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;
    use approx::assert_abs_diff_eq;

    #[test]
    fn model_construction() {
        let m = NormalLocationModel::new(1.0, 0.0).unwrap();
        assert_abs_diff_eq!(m.tau(), std::f64::consts::SQRT_2, epsilon = 1e-15);
        let m = NormalLocationModel::from_variance(4.0, -0.5).unwrap();
        assert_abs_diff_eq!(m.tau() * m.tau(), 2.0 * 4.0 * 1.5, epsilon = 1e-12);
        assert!(NormalLocationModel::new(0.0, 0.0).is_err());
        assert!(NormalLocationModel::new(1.0, 1.0).is_err());
        assert!(NormalLocationModel::new(1.0, -1.0).is_err());
        assert!(NormalLocationModel::from_variance(-1.0, 0.0).is_err());
    }

    #[test]
    fn normal_density_values() {
        let d = normal_density(NormalLocationModel::new(1.0, 0.0).unwrap());
        assert_abs_diff_eq!(d.pdf(0.0, 0.0), 0.159_154_9, epsilon = 1e-7);
        let d = normal_density(NormalLocationModel::new(1.0, 0.5).unwrap());
        assert_abs_diff_eq!(d.pdf(0.0, 0.0), 0.183_776_2, epsilon = 1e-7);
        assert_eq!(d.pdf(1.0, 2.0), d.pdf(2.0, 1.0));
    }

    #[test]
    fn d1_on_normal_and_counterexample() {
        let grid = square_grid(3.0, 10);
        assert_eq!(grid.len(), 100);
        for (s, r) in [(1.0, 0.3), (2.0, -0.9)] {
            let d = normal_density(NormalLocationModel::new(s, r).unwrap());
            let rep = validate_d1(&d, &grid, 1e-14).unwrap();
            assert!(rep.passed());
            assert_eq!(rep.check(D1_EXCHANGE).unwrap().max_violation, 0.0);
        }
        let skew =
            SymmetricDensity::new("skew", |a: f64, b: f64| (-a * a - 2.0 * b * b).exp(), 1.0)
                .unwrap();
        let rep = validate_d1(&skew, &grid, 1e-12).unwrap();
        assert!(!rep.check(D1_EXCHANGE).unwrap().passed);
        assert!(rep.check(D1_REFLECTION).unwrap().passed);
        assert!(validate_d1(&skew, &[], 1e-12).is_err());
    }

    #[test]
    fn d2_squared_absolute_and_odd() {
        let grid = linspace(-5.0, 5.0, 101);
        assert!(validate_d2(&Loss::squared(), &grid, 1e-12)
            .unwrap()
            .passed());
        assert!(validate_d2(&Loss::absolute(), &grid, 1e-12)
            .unwrap()
            .passed());
        let odd = Loss::custom("odd", |t| t, |_| 1.0);
        let rep = validate_d2(&odd, &grid, 1e-12).unwrap();
        assert!(!rep.passed());
        assert!(!rep.check(D2_EVEN).unwrap().passed);
        let flat = Loss::custom(
            "capped",
            |t: f64| t.abs().min(1.0),
            |t: f64| if t.abs() < 1.0 { t.signum() } else { 0.0 },
        );
        let rep = validate_d2(&flat, &grid, 1e-12).unwrap();
        assert!(!rep.check(D2_INCREASING).unwrap().passed);
        assert!(!rep.check(D2_DERIVATIVE).unwrap().passed);
        assert!(validate_d2(&Loss::squared(), &[], 1e-12).is_err());
    }

    #[test]
    fn absolute_derivative_at_zero() {
        assert_eq!(Loss::absolute().w_prime(0.0), 0.0);
    }

    #[test]
    fn partial_cdf_values() {
        let m = NormalLocationModel::new(1.0, 0.0).unwrap();
        let h = partial_cdf_h(m, 0.0);
        assert_abs_diff_eq!(h(0.0), 0.199_471_1, epsilon = 1e-7);
        let h_inf = partial_cdf_h(m, f64::INFINITY);
        assert_abs_diff_eq!(h_inf(0.7), std_normal_pdf(0.7), epsilon = 1e-15);
        let mass = integrate(
            partial_cdf_h(m, 1.0),
            f64::NEG_INFINITY,
            f64::INFINITY,
            1e-12,
        )
        .unwrap();
        assert_abs_diff_eq!(
            mass.value,
            std_normal_cdf(1.0 / std::f64::consts::SQRT_2),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(mass.value, 0.7602, epsilon = 1e-4);
    }

    #[test]
    fn generic_partial_cdf_matches_closed_form() {
        let m = NormalLocationModel::new(1.3, 0.4).unwrap();
        let d = normal_density(m).generic();
        for &(s, t) in &[
            (0.0, 0.0),
            (-1.2, 0.5),
            (2.0, -1.0),
            (0.3, 3.0),
            (-3.0, -2.0),
        ] {
            assert_abs_diff_eq!(
                d.partial_cdf(s, t).unwrap(),
                m.partial_cdf(s, t),
                epsilon = 1e-10
            );
        }
        assert_abs_diff_eq!(d.diff_cdf(-0.7).unwrap(), m.diff_cdf(-0.7), epsilon = 1e-9);
    }

    #[test]
    fn mlr_cases() {
        let grid = linspace(-4.0, 4.0, 81);
        let d = normal_density(NormalLocationModel::new(1.0, 0.0).unwrap());
        let rep = check_mlr(&d, 0.0, 1.0, &grid).unwrap();
        assert_eq!(rep.trend, Trend::Increasing);
        let rep = check_mlr(&d, 0.0, 0.0, &grid).unwrap();
        assert_eq!(rep.trend, Trend::Constant);
        assert!(rep.ratios.iter().all(|r| r.1 == 1.0));
        let d = normal_density(NormalLocationModel::new(2.0, 0.5).unwrap());
        let rep = check_mlr(&d, 1.0, 0.5, &grid).unwrap();
        assert!(rep.monotone());
        assert_eq!(rep.trend, Trend::Increasing);
        assert!(check_mlr(&d, 1.0, -0.5, &grid).is_err());
    }

    #[test]
    fn mlr_skips_underflow() {
        let d = normal_density(NormalLocationModel::new(0.2, 0.0).unwrap());
        let rep = check_mlr(&d, 0.0, 1.0, &[-100.0, 0.0, 0.1]).unwrap();
        assert_eq!(rep.skipped, vec![-100.0]);
        assert_eq!(rep.ratios.len(), 2);
    }

    #[test]
    fn theta_point() {
        let p = ThetaPoint::new(1.0, 3.0).unwrap();
        assert_eq!(p.lambda(), 2.0);
        assert!(ThetaPoint::new(2.0, 1.0).is_err());
        assert!(ThetaPoint::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn trend_classification() {
        assert_eq!(
            classify_trend(&[1.0, 2.0, 2.0, 3.0], 1e-12),
            Trend::Increasing
        );
        assert_eq!(classify_trend(&[3.0, 1.0], 1e-12), Trend::Decreasing);
        assert_eq!(classify_trend(&[1.0, 1.0], 1e-12), Trend::Constant);
        assert_eq!(classify_trend(&[1.0, 2.0, 1.0], 1e-12), Trend::NotMonotone);
    }
}

//! Location-equivariant estimators `(X1 - ψ(D), X2 + ψ(D))`, `D = X2 - X1`,
//! and the machinery that builds their shift functions.
//!
//! Every estimator here is a [`PsiEstimator`]: a name plus the shift `ψ`.
//! The constructors cover the unrestricted estimator, the Stein-type
//! truncation `max{-t/2, ψ(t)}`, the isotonic mixtures, and the smooth
//! boundary estimator obtained by solving `k₁(c | t) = 0` for each `t`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    classify_trend, linspace, Check, Loss, LossKind, Monotonicity, NormalLocationModel,
    SymmetricDensity, Trend, ValidationReport,
};
use crate::numerics::special::{inverse_mills_ratio, std_normal_log_cdf, std_normal_log_pdf};
use crate::numerics::{
    find_root_expanding, MonotoneCubic, Quadrature, DEFAULT_MAX_EXPANSIONS, DEFAULT_ROOT_TOL,
};

/// Tabulation grid: `[-8τ, 8τ]` with this many points.
pub const DEFAULT_GRID_POINTS: usize = 321;
pub const DEFAULT_GRID_HALF_WIDTH: f64 = 8.0;

/// Integrals inside the shift-function root solves are normalized to
/// probability scale, so an absolute tolerance is meaningful.
const SHIFT_QUAD_TOL: f64 = 1e-13;
const SHIFT_QUAD_REL_TOL: f64 = 1e-12;

pub type ShiftFn = dyn Fn(f64) -> f64 + Send + Sync;

/// An equivariant estimator encoded by its shift function `ψ`.
#[derive(Clone)]
pub struct PsiEstimator {
    name: String,
    psi: Arc<ShiftFn>,
    params: Vec<(String, f64)>,
    table: Option<Arc<PsiTable>>,
}

impl fmt::Debug for PsiEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsiEstimator")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("tabulated", &self.table.is_some())
            .finish()
    }
}

impl PsiEstimator {
    pub fn new<F>(name: impl Into<String>, psi: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            psi: Arc::new(psi),
            params: Vec::new(),
            table: None,
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.push((key.into(), value));
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    /// The node table when `ψ` is interpolated rather than evaluated directly.
    pub fn table(&self) -> Option<&PsiTable> {
        self.table.as_deref()
    }

    #[inline]
    pub fn psi(&self, t: f64) -> f64 {
        (self.psi)(t)
    }

    /// `(x1 - ψ(D), x2 + ψ(D))` with `D = x2 - x1`.
    ///
    /// When `ψ(D) >= -D/2` the pair is ordered; a one-ulp inversion from
    /// rounding is resolved to the common midpoint.
    #[inline]
    pub fn estimate(&self, x1: f64, x2: f64) -> (f64, f64) {
        let d = x2 - x1;
        let shift = self.psi(d);
        let (a, b) = (x1 - shift, x2 + shift);
        // shift >= -d/2 means ordered in exact arithmetic
        if a > b && shift >= -0.5 * d {
            let m = 0.5 * (a + b);
            return (m, m);
        }
        (a, b)
    }

    /// Replaces direct evaluation by monotone cubic interpolation through
    /// `ψ` at `grid`. See [`PsiTable`] for the behavior off the grid.
    pub fn tabulate(&self, grid: &[f64], right: RightTail) -> Result<Self> {
        let values: Vec<f64> = grid.iter().map(|&t| self.psi(t)).collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "shift of {} is not finite at t = {}",
                self.name, grid[i]
            )));
        }
        let table = PsiTable::new(grid.to_vec(), values, right)?;
        Ok(Self::from_table(self.name.clone(), table).with_params(self.params.clone()))
    }

    fn with_params(mut self, params: Vec<(String, f64)>) -> Self {
        self.params = params;
        self
    }

    pub fn from_table(name: impl Into<String>, table: PsiTable) -> Self {
        let table = Arc::new(table);
        let eval = Arc::clone(&table);
        Self {
            name: name.into(),
            psi: Arc::new(move |t| eval.eval(t)),
            params: Vec::new(),
            table: Some(table),
        }
    }
}

/// What a tabulated `ψ` does right of its last node.
#[derive(Clone)]
pub enum RightTail {
    Zero,
    /// Switch to a closed form.
    Function(Arc<ShiftFn>),
}

impl fmt::Debug for RightTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RightTail::Zero => f.write_str("Zero"),
            RightTail::Function(_) => f.write_str("Function"),
        }
    }
}

/// A shift function tabulated on increasing nodes.
///
/// Between nodes it is the monotone cubic through them. Right of the last
/// node it follows [`RightTail`]. Left of the first node (when that node is
/// negative) the excess over the pooling line `-t/2` is decayed like
/// `1/|t|`, which is how both the squared- and absolute-loss boundary
/// estimators approach that line.
#[derive(Debug, Clone)]
pub struct PsiTable {
    interp: MonotoneCubic,
    right: RightTail,
}

impl PsiTable {
    pub fn new(ts: Vec<f64>, psi: Vec<f64>, right: RightTail) -> Result<Self> {
        Ok(Self {
            interp: MonotoneCubic::new(ts, psi)?,
            right,
        })
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        self.interp.nodes()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.interp.x_range();
        if t > hi {
            return match &self.right {
                RightTail::Zero => 0.0,
                RightTail::Function(f) => f(t),
            };
        }
        if t < lo {
            let (ts, ps) = self.interp.nodes();
            let (t0, p0) = (ts[0], ps[0]);
            if t0 < 0.0 {
                let excess = p0 + 0.5 * t0;
                return -0.5 * t + excess * (t0 / t);
            }
            return p0;
        }
        self.interp.eval(t)
    }
}

/// 321 points on `[-8·scale, 8·scale]`, `scale` being the spread of `D`.
pub fn default_t_grid(diff_scale: f64) -> Vec<f64> {
    let w = DEFAULT_GRID_HALF_WIDTH * diff_scale;
    linspace(-w, w, DEFAULT_GRID_POINTS)
}

/// The unrestricted estimator `(X1, X2)`.
pub fn blee() -> PsiEstimator {
    PsiEstimator::new("blee", |_| 0.0)
}

/// Stein-type truncation `ψ*(t) = max{-t/2, ψ(t)}`; its estimates are always ordered.
pub fn stein_improve(base: &PsiEstimator) -> PsiEstimator {
    let inner = base.clone();
    PsiEstimator::new(format!("stein({})", base.name()), move |t| {
        (-0.5 * t).max(inner.psi(t))
    })
    .with_params(base.params.clone())
}

/// `(min{X1, X̄}, max{X2, X̄})`, i.e. `ψ(t) = max{0, -t/2}`.
pub fn restricted_mle() -> PsiEstimator {
    PsiEstimator::new("mle", |t| (-0.5 * t).max(0.0))
}

/// `ψ_α(t) = 0` for `t >= 0` and `-(1 - α)t` for `t < 0`.
pub fn isotonic(alpha: f64) -> Result<PsiEstimator> {
    if !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be finite, got {alpha}")));
    }
    let slope = 1.0 - alpha;
    Ok(PsiEstimator::new(format!("isotonic:{alpha}"), move |t| {
        if t >= 0.0 {
            0.0
        } else {
            -slope * t
        }
    })
    .with_param("alpha", alpha))
}

/// Closed-form boundary estimator under squared loss:
/// `ψ(t) = (τ/2) φ(t/τ) / Φ(t/τ)`.
pub fn bz_squared(model: NormalLocationModel) -> PsiEstimator {
    let tau = model.tau();
    PsiEstimator::new("bz", move |t| 0.5 * tau * inverse_mills_ratio(t / tau))
        .with_param("sigma", model.sigma())
        .with_param("rho", model.rho())
}

/// Boundary estimator under absolute loss, solving the median equation at
/// every call. Failures surface as NaN; use [`bz_absolute_shift`] for the
/// diagnostics, or [`PsiEstimator::tabulate`] for speed.
pub fn bz_absolute(model: NormalLocationModel) -> PsiEstimator {
    PsiEstimator::new("bz", move |t| {
        bz_absolute_shift(model, t).unwrap_or(f64::NAN)
    })
    .with_param("sigma", model.sigma())
    .with_param("rho", model.rho())
}

/// `C(t)` solving
/// `∫_{-∞}^{C} Φ((t + s(1-ρ)) / (σ√(1-ρ²))) φ(s/σ) ds = (σ/2) Φ(t/τ)`,
/// the median of `Z1` given `Z2 - Z1 <= t`.
pub fn bz_absolute_shift(model: NormalLocationModel, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::invalid(format!(
            "shift needs a finite argument, got {t}"
        )));
    }
    let sigma = model.sigma();
    let rho = model.rho();
    let k = sigma * (1.0 - rho * rho).sqrt();
    let log_norm = sigma.ln() + std_normal_log_cdf(t / model.tau());
    // Φ(a(s)) φ(s/σ) / (σ Φ(t/τ)) in log space, so deep-left t cannot underflow
    let integrand = move |s: f64| {
        (std_normal_log_cdf((t + s * (1.0 - rho)) / k) + std_normal_log_pdf(s / sigma) - log_norm)
            .exp()
    };
    let center = (-0.5 * t).max(0.0);
    let width = model.conditional_sd();
    let lower_mass = |c: f64| -> Result<f64> {
        let r = Quadrature::new(SHIFT_QUAD_TOL)
            .rel_tol(SHIFT_QUAD_REL_TOL)
            .breakpoints(SymmetricDensity::spread_points(center, width))
            .integrate(integrand, f64::NEG_INFINITY, c)?;
        Ok(r.value - 0.5)
    };
    solve_shift(t, sigma, lower_mass)
}

/// Root of a decreasing-or-increasing function of `c` near `-t/2`,
/// starting from `[-t/2 - 6·scale, -t/2 + 6·scale]`.
fn solve_shift<G>(t: f64, scale: f64, g: G) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    use std::cell::RefCell;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let wrapped = |c: f64| match g(c) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let anchor = -0.5 * t;
    let result = find_root_expanding(
        wrapped,
        anchor - 6.0 * scale,
        anchor + 6.0 * scale,
        DEFAULT_ROOT_TOL,
        DEFAULT_MAX_EXPANSIONS,
    );
    let err = match (failure.into_inner(), result) {
        (Some(e), _) => e,
        (None, Ok(c)) => return Ok(c),
        (
            None,
            Err(Error::BracketExpansion {
                attempts, lo, hi, ..
            }),
        ) => Error::BracketExpansion {
            attempts,
            lo,
            hi,
            context: Some(format!(
                "t = {t}, initial bracket [{}, {}]",
                anchor - 6.0 * scale,
                anchor + 6.0 * scale
            )),
        },
        (None, Err(e)) => e,
    };
    Err(Error::ShiftRoot {
        t,
        source: Box::new(err),
    })
}

/// `k₁(c | t) = ∫∫_{y <= t} W'(s - c) f(s, s + y) dy ds`.
pub fn k1(density: &SymmetricDensity, loss: &Loss, c: f64, t: f64) -> Result<f64> {
    Ok(k1_normalized(density, loss, c, t)? * density.diff_cdf(t)?)
}

/// `k₁(c | t) / P(Z2 - Z1 <= t)`: the same root, on probability scale.
pub fn k1_normalized(density: &SymmetricDensity, loss: &Loss, c: f64, t: f64) -> Result<f64> {
    let center = (-0.5 * t).max(0.0);
    // W' carries units; |W'(σ)| sets the size of the integrand
    let units = loss.w_prime(density.scale()).abs().max(1.0);
    let quad = Quadrature::new(SHIFT_QUAD_TOL * units)
        .rel_tol(SHIFT_QUAD_REL_TOL)
        .breakpoints(SymmetricDensity::spread_points(
            center,
            density.cond_scale(),
        ))
        .breakpoints([c]);
    match density.normal_model() {
        Some(m) => {
            let sigma = m.sigma();
            let rho = m.rho();
            let k = sigma * (1.0 - rho * rho).sqrt();
            let log_norm = sigma.ln() + std_normal_log_cdf(t / m.tau());
            let r = quad.integrate(
                |s| {
                    let w = loss.w_prime(s - c);
                    if w == 0.0 {
                        return 0.0;
                    }
                    w * (std_normal_log_cdf((t + s * (1.0 - rho)) / k)
                        + std_normal_log_pdf(s / sigma)
                        - log_norm)
                        .exp()
                },
                f64::NEG_INFINITY,
                f64::INFINITY,
            )?;
            Ok(r.value)
        }
        None => {
            let mass = density.diff_cdf(t)?;
            if !(mass > 0.0) {
                return Err(Error::invalid(format!(
                    "P(D <= {t}) vanishes; k1 is undefined there"
                )));
            }
            let r = quad.try_integrate(
                |s| {
                    let w = loss.w_prime(s - c);
                    if w == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(w * density.partial_cdf(s, t)? / mass)
                },
                f64::NEG_INFINITY,
                f64::INFINITY,
            )?;
            Ok(r.value)
        }
    }
}

/// Root `c = ψ₀,₁(t)` of `k₁(c | t) = 0` at a single `t`.
pub fn ierd_shift(density: &SymmetricDensity, loss: &Loss, t: f64) -> Result<f64> {
    solve_shift(t, density.scale(), |c| k1_normalized(density, loss, c, t))
}

/// Tabulates `ψ₀,₁` by solving `k₁(c | t) = 0` at every grid point.
///
/// Root solves run in parallel; each is independent, so the table does not
/// depend on the schedule. `tol` is the root tolerance in `c`.
pub fn ierd_general(
    density: &SymmetricDensity,
    loss: &Loss,
    t_grid: &[f64],
    tol: f64,
) -> Result<PsiEstimator> {
    if t_grid.len() < 2 {
        return Err(Error::invalid(
            "the tabulation grid needs at least two points",
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "root tolerance must be positive, got {tol}"
        )));
    }
    let roots: Vec<Result<f64>> = t_grid
        .par_iter()
        .map(|&t| {
            let g = |c: f64| k1_normalized(density, loss, c, t);
            solve_shift_tol(t, density.scale(), tol, g)
        })
        .collect();
    let mut values = Vec::with_capacity(roots.len());
    for r in roots {
        values.push(r?);
    }
    let right = match (loss.kind(), density.normal_model()) {
        (LossKind::Squared, Some(m)) => {
            let closed = bz_squared(m);
            RightTail::Function(Arc::new(move |t| closed.psi(t)))
        }
        _ => RightTail::Zero,
    };
    let table = PsiTable::new(t_grid.to_vec(), values, right)?;
    Ok(PsiEstimator::from_table(
        format!("ierd({})", loss.name()),
        table,
    ))
}

fn solve_shift_tol<G>(t: f64, scale: f64, tol: f64, g: G) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    if tol >= DEFAULT_ROOT_TOL {
        return solve_shift(t, scale, g);
    }
    // tighter than default: polish from the default root
    let c0 = solve_shift(t, scale, &g)?;
    let step = 1e3 * DEFAULT_ROOT_TOL;
    crate::numerics::find_root(|c| g(c).unwrap_or(f64::NAN), c0 - step, c0 + step, tol).map_err(
        |e| Error::ShiftRoot {
            t,
            source: Box::new(e),
        },
    )
}

pub const RELAX_ORDER: &str = "ordering against reference";
pub const RELAX_MONOTONE: &str = "monotone in stated direction";
pub const RELAX_LIMIT: &str = "vanishes at +inf";

/// Validates a candidate shift against the boundary estimator `reference`:
/// a decreasing candidate must stay at or below it (an increasing one at or
/// above), be monotone in its direction on `grid`, and vanish far right.
pub fn relax_psi<F>(
    name: impl Into<String>,
    candidate: F,
    reference: &PsiEstimator,
    direction: Monotonicity,
    grid: &[f64],
) -> std::result::Result<PsiEstimator, ValidationReport>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    const TOL: f64 = 1e-9;
    let mut order = Check {
        name: RELAX_ORDER.into(),
        passed: true,
        max_violation: 0.0,
        witness: vec![],
    };
    for &t in grid {
        let (c, r) = (candidate(t), reference.psi(t));
        let excess = match direction {
            Monotonicity::Decreasing => c - r,
            Monotonicity::Increasing => r - c,
        };
        if !(excess <= TOL) && !(excess <= order.max_violation) {
            order.passed = false;
            order.max_violation = if excess.is_nan() {
                f64::INFINITY
            } else {
                excess
            };
            order.witness = vec![t];
        }
    }

    let values: Vec<f64> = grid.iter().map(|&t| candidate(t)).collect();
    let trend = classify_trend(&values, TOL);
    let mono_ok = matches!(
        (direction, trend),
        (_, Trend::Constant)
            | (Monotonicity::Decreasing, Trend::Decreasing)
            | (Monotonicity::Increasing, Trend::Increasing)
    );
    let mut monotone = Check {
        name: RELAX_MONOTONE.into(),
        passed: mono_ok,
        max_violation: 0.0,
        witness: vec![],
    };
    if !mono_ok {
        for (w, ts) in values.windows(2).zip(grid.windows(2)) {
            let wrong = match direction {
                Monotonicity::Decreasing => w[1] - w[0],
                Monotonicity::Increasing => w[0] - w[1],
            };
            if wrong > monotone.max_violation {
                monotone.max_violation = wrong;
                monotone.witness = vec![ts[0], ts[1]];
            }
        }
    }

    let far = grid.iter().fold(1.0_f64, |m, t| m.max(t.abs())) * 1e3;
    let tail = candidate(far).abs();
    let limit = Check {
        name: RELAX_LIMIT.into(),
        passed: tail <= 1e-6,
        max_violation: tail,
        witness: vec![far],
    };

    let report = ValidationReport {
        checks: vec![order, monotone, limit],
    };
    if report.passed() {
        Ok(PsiEstimator::new(name, candidate))
    } else {
        Err(report)
    }
}

pub const STEIN_BELOW: &str = "relaxed shift between base and pooling line";
pub const STEIN_AGREE: &str = "relaxed shift equals base elsewhere";

/// Checks that `relaxed` satisfies `ψ(t) <= relaxed(t) < -t/2` wherever
/// `ψ(t) < -t/2`, and equals `ψ` elsewhere.
pub fn check_stein_relaxation<F>(relaxed: F, base: &PsiEstimator, grid: &[f64]) -> ValidationReport
where
    F: Fn(f64) -> f64,
{
    let mut below = Check {
        name: STEIN_BELOW.into(),
        passed: true,
        max_violation: 0.0,
        witness: vec![],
    };
    let mut agree = Check {
        name: STEIN_AGREE.into(),
        passed: true,
        max_violation: 0.0,
        witness: vec![],
    };
    for &t in grid {
        let (p, r, line) = (base.psi(t), relaxed(t), -0.5 * t);
        if p < line {
            let v = if r < p {
                p - r
            } else if r >= line {
                (r - line).max(f64::MIN_POSITIVE)
            } else {
                0.0
            };
            if v > 0.0 && v >= below.max_violation {
                below.passed = false;
                below.max_violation = v;
                below.witness = vec![t];
            }
        } else {
            let v = (r - p).abs();
            if v > 1e-12 && v >= agree.max_violation {
                agree.passed = false;
                agree.max_violation = v;
                agree.witness = vec![t];
            }
        }
    }
    ValidationReport {
        checks: vec![below, agree],
    }
}

//! Numeric verification battery for a normal model.
//!
//! Each entry is a named pass/fail line with a short detail string. The
//! battery checks the model assumptions, the pooling-center lemma on a
//! `(t, λ)` grid, the likelihood-ratio monotonicity, the shape of the
//! boundary shift functions, agreement between the closed forms and the
//! generic root-solving construction, and the ordering of exact risks.

use serde::Serialize;

use crate::error::Result;
use crate::estimators::{
    blee, bz_absolute_shift, bz_squared, default_t_grid, ierd_general, isotonic, restricted_mle,
    DEFAULT_GRID_HALF_WIDTH,
};
use crate::model::{
    check_mlr, linspace, normal_density, square_grid, validate_d1, validate_d2, Loss, LossKind,
    NormalLocationModel, ValidationReport,
};
use crate::numerics::DEFAULT_ROOT_TOL;
use crate::risk::{exact_risk, r_lambda};

/// Step of the `c` grid in the lemma check.
pub const LEMMA_C_STEP: f64 = 0.02;

/// Shift values below this are not resolved by the root solver.
pub const SHAPE_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub model: NormalLocationModel,
    pub losses: Vec<Loss>,
    /// Extra loss run through the loss-assumption check only.
    pub injected_loss: Option<Loss>,
    pub quick: bool,
    pub tol: f64,
}

impl VerifyConfig {
    pub fn new(model: NormalLocationModel) -> Self {
        Self {
            model,
            losses: vec![Loss::squared(), Loss::absolute()],
            injected_loss: None,
            quick: false,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub lines: Vec<VerifyLine>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.lines.push(VerifyLine {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn push_report(&mut self, prefix: &str, rep: &ValidationReport) {
        for c in &rep.checks {
            let detail = if c.passed {
                format!("max violation {:.3e}", c.max_violation)
            } else {
                format!("max violation {:.3e} at {:?}", c.max_violation, c.witness)
            };
            self.push(format!("{prefix}: {}", c.name), c.passed, detail);
        }
    }
}

pub fn run(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut out = VerifyReport::default();
    let m = cfg.model;
    let density = normal_density(m);
    let sigma = m.sigma();
    let tau = m.tau();

    let k = if cfg.quick { 12 } else { 40 };
    let d1 = validate_d1(
        &density,
        &square_grid(4.0 * sigma, k),
        1e-14 * density.pdf(0.0, 0.0),
    )?;
    out.push_report("density", &d1);
    let mass = density.check_normalization()?;
    out.push(
        "density: normalization",
        mass.passed,
        format!("|mass - 1| = {:.3e}", mass.max_violation),
    );

    let loss_grid = linspace(-5.0 * sigma, 5.0 * sigma, if cfg.quick { 41 } else { 201 });
    for loss in cfg.losses.iter().chain(cfg.injected_loss.as_ref()) {
        let rep = validate_d2(loss, &loss_grid, 1e-12)?;
        out.push_report(&format!("loss {}", loss.name()), &rep);
    }

    // r_λ(·, t) is minimized at (λ - t)/2, on a grid scaled to σ = 1 units
    let ts = linspace(-2.0 * sigma, 2.0 * sigma, 5);
    let lambdas = linspace(0.0, 2.0 * sigma, 5);
    let step = LEMMA_C_STEP * sigma;
    for loss in &cfg.losses {
        let mut worst: f64 = 0.0;
        let mut at = (0.0, 0.0);
        for &t in &ts {
            for &l in &lambdas {
                let target = 0.5 * (l - t);
                let cs: Vec<f64> = (-100..100)
                    .map(|i| target + 0.37 * step + i as f64 * step)
                    .collect();
                let mut best = (f64::INFINITY, f64::NAN);
                for &c in &cs {
                    let r = r_lambda(&density, loss, c, t, l)?;
                    if r < best.0 {
                        best = (r, c);
                    }
                }
                let off = (best.1 - target).abs();
                if off > worst {
                    worst = off;
                    at = (t, l);
                }
            }
        }
        out.push(
            format!("lemma minimizer ({})", loss.name()),
            worst <= step,
            format!("max |argmin - (λ-t)/2| = {worst:.4} (step {step}), worst at (t, λ) = ({:.3}, {:.3})", at.0, at.1),
        );
    }

    let s_grid = linspace(-4.0 * sigma, 4.0 * sigma, if cfg.quick { 41 } else { 161 });
    for &(t, delta) in &[(0.0, sigma), (tau, 0.5 * sigma), (-tau, 2.0 * sigma)] {
        let rep = check_mlr(&density, t, delta, &s_grid)?;
        out.push(
            format!("likelihood ratio monotone (t = {t:.3}, Δ = {delta:.3})"),
            rep.monotone(),
            format!(
                "trend {:?}, {} points skipped",
                rep.trend,
                rep.skipped.len()
            ),
        );
    }

    let n_grid = if cfg.quick {
        33
    } else {
        crate::estimators::DEFAULT_GRID_POINTS
    };
    let half = DEFAULT_GRID_HALF_WIDTH * tau;
    let grid = if cfg.quick {
        linspace(-half, half, n_grid)
    } else {
        default_t_grid(tau)
    };
    for loss in &cfg.losses {
        let closed: Option<Vec<f64>> = match loss.kind() {
            LossKind::Squared => {
                let e = bz_squared(m);
                Some(grid.iter().map(|&t| e.psi(t)).collect())
            }
            LossKind::Absolute => Some(
                grid.iter()
                    .map(|&t| bz_absolute_shift(m, t))
                    .collect::<Result<_>>()?,
            ),
            LossKind::Custom => None,
        };
        let generic = ierd_general(&density, loss, &grid, DEFAULT_ROOT_TOL * 1e-2)?;
        let (_, tabulated) = generic.table().expect("tabulated").nodes();
        let shape = match &closed {
            Some(v) => v.as_slice(),
            None => tabulated,
        };
        // below SHAPE_FLOOR root-solved values are solver noise around 0
        let positive = shape.iter().all(|&v| v > 0.0 || v.abs() <= SHAPE_FLOOR);
        let strictly = shape.windows(2).all(|w| {
            if w[0] > SHAPE_FLOOR {
                w[1] < w[0]
            } else {
                w[1] <= SHAPE_FLOOR
            }
        });
        let resolved = shape.iter().filter(|&&v| v > SHAPE_FLOOR).count();
        out.push(
            format!("boundary shift positive and decreasing ({})", loss.name()),
            positive && strictly,
            format!(
                "{} grid points on [{:.3}, {:.3}], strict on the {resolved} above {SHAPE_FLOOR:e}",
                grid.len(),
                grid[0],
                grid[grid.len() - 1]
            ),
        );
        let far = match &closed {
            Some(_) if loss.kind() == LossKind::Squared => bz_squared(m).psi(3.0 * half),
            Some(_) => bz_absolute_shift(m, 3.0 * half)?,
            None => generic.psi(3.0 * half),
        };
        out.push(
            format!("boundary shift vanishes far right ({})", loss.name()),
            far.abs() <= cfg.tol,
            format!("ψ({:.3}) = {far:.3e}", 3.0 * half),
        );
        if let Some(v) = closed {
            let gap = v
                .iter()
                .zip(tabulated)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            out.push(
                format!("closed form vs generic root solve ({})", loss.name()),
                gap <= cfg.tol,
                format!("max gap {gap:.3e} over {} points", grid.len()),
            );
        }
    }

    let exact_tol = 1e-9;
    let lam = if cfg.quick {
        vec![0.0, tau]
    } else {
        vec![0.0, 0.5 * tau, tau, 2.0 * tau]
    };
    let sq = Loss::squared();
    let alphas = [0.5, 0.75, 1.0];
    let mut iso_ok = true;
    let mut strict_gap = f64::INFINITY;
    let mut detail = String::new();
    for &l in &lam {
        let r: Vec<f64> = alphas
            .iter()
            .map(|&a| exact_risk(&density, l, &isotonic(a)?, &sq, exact_tol))
            .collect::<Result<_>>()?;
        iso_ok &= r.windows(2).all(|w| w[0] <= w[1] + 1e-9);
        if l == 0.0 {
            strict_gap = (r[1] - r[0]).min(r[2] - r[1]);
        }
        detail.push_str(&format!("λ={l:.3}: {:.6} {:.6} {:.6}; ", r[0], r[1], r[2]));
    }
    out.push(
        "isotonic risks ordered in alpha",
        iso_ok && strict_gap > 1e-7,
        detail.trim_end_matches("; ").to_string(),
    );

    for loss in &cfg.losses {
        let mut ok = true;
        let mut worst = f64::NEG_INFINITY;
        for &l in &lam {
            let a = exact_risk(&density, l, &restricted_mle(), loss, exact_tol)?;
            let b = exact_risk(&density, l, &blee(), loss, exact_tol)?;
            worst = worst.max(a - b);
            ok &= a <= b + 1e-9;
        }
        out.push(
            format!("pooling dominates unrestricted ({})", loss.name()),
            ok,
            format!("max risk difference {worst:.3e}"),
        );
    }
    Ok(out)
}

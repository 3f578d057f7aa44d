//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Semi-infinite pieces are mapped onto `(0, 1]` with `x = a ± (1 - u)/u`,
//! as in QUADPACK's `qagi`. The whole range is cut at the caller's
//! breakpoints first, and the interval with the largest error estimate is
//! bisected until the summed error meets `max(abs_tol, rel_tol·|I|)`.

use std::cell::RefCell;

use crate::error::{Error, Result};

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_INTERVALS: usize = 2000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value of a definite integral together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    breakpoints: Vec<f64>,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::new(DEFAULT_ABS_TOL)
    }
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Finite,
    /// `[a, ∞)` through `x = a + (1 - u)/u`
    Upper(f64),
    /// `(-∞, b]` through `x = b - (1 - u)/u`
    Lower(f64),
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    piece: Piece,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl Quadrature {
    pub fn new(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol: 0.0,
            max_intervals: DEFAULT_MAX_INTERVALS,
            breakpoints: Vec::new(),
        }
    }

    pub fn rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    /// Points where the integrand is known to bend sharply or to carry its mass.
    pub fn breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(points);
        self
    }

    pub fn integrate<F>(&self, f: F, lower: f64, upper: f64) -> Result<Integral>
    where
        F: Fn(f64) -> f64,
    {
        if lower.is_nan() || upper.is_nan() {
            return Err(Error::invalid("integration limits must not be NaN"));
        }
        if !(self.abs_tol > 0.0 || self.rel_tol > 0.0) || self.abs_tol < 0.0 || self.rel_tol < 0.0 {
            return Err(Error::invalid(format!(
                "tolerances must be nonnegative with one positive (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if lower == upper {
            return Ok(Integral {
                value: 0.0,
                abs_error: 0.0,
                intervals: 0,
            });
        }
        if lower > upper {
            let r = self.integrate(f, upper, lower)?;
            return Ok(Integral {
                value: -r.value,
                ..r
            });
        }
        self.integrate_ordered(&f, lower, upper)
    }

    /// Integrates a fallible integrand; the first error it reports is
    /// returned in place of the quadrature result.
    pub fn try_integrate<F>(&self, f: F, lower: f64, upper: f64) -> Result<Integral>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let result = self.integrate(
            |x| match f(x) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            lower,
            upper,
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => result,
        }
    }

    fn integrate_ordered<F>(&self, f: &F, lower: f64, upper: f64) -> Result<Integral>
    where
        F: Fn(f64) -> f64,
    {
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|p| p.is_finite() && *p > lower && *p < upper)
            .collect();
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup();
        if cuts.is_empty() && lower.is_infinite() && upper.is_infinite() {
            cuts.push(0.0);
        }

        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(lower);
        edges.extend(cuts);
        edges.push(upper);

        let mut cells: Vec<Cell> = Vec::with_capacity(64);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (piece, lo, hi) = match (a.is_infinite(), b.is_infinite()) {
                (false, false) => (Piece::Finite, a, b),
                (false, true) => (Piece::Upper(a), 0.0, 1.0),
                (true, false) => (Piece::Lower(b), 0.0, 1.0),
                (true, true) => unreachable!("doubly infinite piece is always split"),
            };
            cells.push(evaluate(f, piece, lo, hi)?);
        }

        let mut frozen_value = 0.0;
        let mut frozen_error = 0.0;
        loop {
            let total: f64 = frozen_value + cells.iter().map(|c| c.value).sum::<f64>();
            let error: f64 = frozen_error + cells.iter().map(|c| c.error).sum::<f64>();
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            let count = cells.len() + usize::from(frozen_error > 0.0 || frozen_value != 0.0);
            if error <= target {
                return Ok(Integral {
                    value: total,
                    abs_error: error,
                    intervals: count,
                });
            }
            if cells.is_empty() || cells.len() >= self.max_intervals {
                return Err(Error::Quadrature {
                    lower,
                    upper,
                    estimate: total,
                    abs_error: error,
                    intervals: count,
                });
            }

            let worst = cells
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
                .map(|(i, _)| i)
                .expect("nonempty");
            let cell = cells.swap_remove(worst);
            let mid = 0.5 * (cell.lo + cell.hi);
            let tiny =
                100.0 * f64::EPSILON * cell.lo.abs().max(cell.hi.abs()).max(f64::MIN_POSITIVE);
            if cell.hi - cell.lo <= tiny {
                // cannot be refined further in floating point
                frozen_value += cell.value;
                frozen_error += cell.error;
                continue;
            }
            cells.push(evaluate(f, cell.piece, cell.lo, mid)?);
            cells.push(evaluate(f, cell.piece, mid, cell.hi)?);
        }
    }
}

/// Integrates `f` over `(lower, upper)` to absolute tolerance `tol`.
/// Either limit may be infinite.
pub fn integrate<F>(f: F, lower: f64, upper: f64, tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    Quadrature::new(tol).integrate(f, lower, upper)
}

fn evaluate<F>(f: &F, piece: Piece, lo: f64, hi: f64) -> Result<Cell>
where
    F: Fn(f64) -> f64,
{
    let (value, error) = match piece {
        Piece::Finite => kronrod15(f, lo, hi),
        Piece::Upper(a) => kronrod15(
            &|u: f64| {
                let x = a + (1.0 - u) / u;
                f(x) / (u * u)
            },
            lo,
            hi,
        ),
        Piece::Lower(b) => kronrod15(
            &|u: f64| {
                let x = b - (1.0 - u) / u;
                f(x) / (u * u)
            },
            lo,
            hi,
        ),
    };
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::invalid(format!(
            "integrand is not finite on a subinterval of the mapped range [{lo}, {hi}]"
        )));
    }
    Ok(Cell {
        piece,
        lo,
        hi,
        value,
        error,
    })
}

fn kronrod15<F>(f: &F, a: f64, b: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut gauss = fc * WG[3];
    let mut kronrod = fc * WGK[7];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = ((kronrod - gauss) * half).abs();
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    (kronrod * half, rescale_error(err, res_abs, res_asc))
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err;
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::{std_normal_cdf, std_normal_pdf};
    use approx::assert_abs_diff_eq;

    #[test]
    fn normal_mass() {
        let r = integrate(std_normal_pdf, f64::NEG_INFINITY, f64::INFINITY, 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
        let r = integrate(std_normal_pdf, f64::NEG_INFINITY, 0.0, 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn phi_times_cdf_antiderivative() {
        let g = |s: f64| std_normal_pdf(s) * std_normal_cdf(s);
        let r = integrate(g, f64::NEG_INFINITY, 0.0, 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 0.125, epsilon = 1e-10);
        for c in [-3.0, -1.0, 0.5, 2.0] {
            let r = integrate(g, f64::NEG_INFINITY, c, 1e-10).unwrap();
            let phi = std_normal_cdf(c);
            assert_abs_diff_eq!(r.value, 0.5 * phi * phi, epsilon = 1e-10);
        }
    }

    #[test]
    fn reversed_and_degenerate_limits() {
        let r = integrate(|x| x * x, 2.0, 0.0, 1e-12).unwrap();
        assert_abs_diff_eq!(r.value, -8.0 / 3.0, epsilon = 1e-12);
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-12).unwrap().value, 0.0);
        assert!(integrate(|x| x, f64::NAN, 1.0, 1e-12).is_err());
        assert!(integrate(|x| x, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn nonconvergence_keeps_estimate() {
        let err = Quadrature::new(1e-14)
            .max_intervals(3)
            .integrate(|x: f64| (200.0 * x).sin(), 0.0, 100.0)
            .unwrap_err();
        match err {
            Error::Quadrature {
                estimate,
                intervals,
                ..
            } => {
                assert!(estimate.is_finite());
                assert!(intervals >= 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn kink_with_breakpoint() {
        let f = |x: f64| (x - 0.3).abs() * std_normal_pdf(x);
        let r = Quadrature::new(1e-12)
            .breakpoints([0.3])
            .integrate(f, f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        // E|Z - c| = 2φ(c) + c(2Φ(c) - 1)
        let c = 0.3;
        let exact = 2.0 * std_normal_pdf(c) + c * (2.0 * std_normal_cdf(c) - 1.0);
        assert_abs_diff_eq!(r.value, exact, epsilon = 1e-11);
    }

    #[test]
    fn narrow_peak_far_out_found_with_breakpoints() {
        let w = 0.01;
        let m = 40.0;
        let f = |x: f64| std_normal_pdf((x - m) / w) / w;
        let r = Quadrature::new(1e-12)
            .breakpoints([m - 8.0 * w, m, m + 8.0 * w])
            .integrate(f, f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn relative_tolerance_for_tiny_integrands() {
        let scale = 1e-30;
        let r = Quadrature::new(0.0)
            .rel_tol(1e-10)
            .integrate(|x| scale * std_normal_pdf(x), f64::NEG_INFINITY, 1.0)
            .unwrap();
        assert!((r.value / (scale * std_normal_cdf(1.0)) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fallible_integrand_error_surfaces() {
        let q = Quadrature::new(1e-10);
        let err = q
            .try_integrate(
                |x| {
                    if x > 0.5 {
                        Err(Error::invalid("boom"))
                    } else {
                        Ok(x)
                    }
                },
                0.0,
                1.0,
            )
            .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(m) if m == "boom"));
        let ok = q.try_integrate(Ok, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(ok.value, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn linearity() {
        let f = |x: f64| x.sin() * (-x * x).exp();
        let g = |x: f64| (x * 0.5).cos() * std_normal_pdf(x);
        let (a, b) = (2.5, -1.25);
        let tol = 1e-11;
        let lhs = integrate(|x| a * f(x) + b * g(x), -3.0, f64::INFINITY, tol).unwrap();
        let rf = integrate(f, -3.0, f64::INFINITY, tol).unwrap();
        let rg = integrate(g, -3.0, f64::INFINITY, tol).unwrap();
        let combined = tol * (1.0 + a.abs() + b.abs());
        assert_abs_diff_eq!(lhs.value, a * rf.value + b * rg.value, epsilon = combined);
    }
}

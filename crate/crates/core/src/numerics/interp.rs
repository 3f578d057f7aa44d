//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson).

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` must be strictly increasing with at least two nodes.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::invalid(
                "interpolation needs at least two (x, y) nodes of equal count",
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "interpolation nodes must be strictly increasing",
            ));
        }
        if ys.iter().chain(&xs).any(|v| !v.is_finite()) {
            return Err(Error::invalid("interpolation nodes must be finite"));
        }

        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        let mut slopes = vec![0.0; n];
        slopes[0] = end_slope(h[0], h.get(1).copied(), delta[0], delta.get(1).copied());
        slopes[n - 1] = end_slope(
            h[n - 2],
            if n > 2 { Some(h[n - 3]) } else { None },
            delta[n - 2],
            if n > 2 { Some(delta[n - 3]) } else { None },
        );
        for i in 1..n - 1 {
            let (d0, d1) = (delta[i - 1], delta[i]);
            if d0 == 0.0 || d1 == 0.0 || d0.signum() != d1.signum() {
                slopes[i] = 0.0;
            } else {
                // weighted harmonic mean
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slopes[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    /// Evaluates inside the node range; outside it the end values are held.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.ys[i]
            + h10 * h * self.slopes[i]
            + h01 * self.ys[i + 1]
            + h11 * h * self.slopes[i + 1]
    }
}

/// One-sided three-point end slope, clipped to keep monotonicity.
fn end_slope(h0: f64, h1: Option<f64>, d0: f64, d1: Option<f64>) -> f64 {
    let (h1, d1) = match (h1, d1) {
        (Some(h1), Some(d1)) => (h1, d1),
        _ => return d0,
    };
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_nodes_and_lines() {
        let xs = vec![0.0, 1.0, 2.5, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let p = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(p.eval(*x), *y);
        }
        assert!((p.eval(1.7) - (3.0 - 3.4)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(MonotoneCubic::new(vec![0.0], vec![1.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn preserves_monotone_decreasing_data(steps in proptest::collection::vec(0.0f64..1.0, 3..30),
                                              gaps in proptest::collection::vec(0.01f64..1.0, 30)) {
            let mut xs = vec![0.0];
            let mut ys = vec![10.0];
            for (i, s) in steps.iter().enumerate() {
                xs.push(xs[i] + gaps[i]);
                ys.push(ys[i] - s);
            }
            let p = MonotoneCubic::new(xs.clone(), ys).unwrap();
            let (a, b) = p.x_range();
            let mut prev = f64::INFINITY;
            for k in 0..=500 {
                let x = a + (b - a) * k as f64 / 500.0;
                let v = p.eval(x);
                prop_assert!(v <= prev + 1e-12);
                prev = v;
            }
        }
    }
}

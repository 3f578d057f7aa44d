//! Seeded random streams and the bivariate normal sampler.
//!
//! Streams are ChaCha8 keyed by a 64-bit seed; the 64-bit ChaCha stream id
//! selects a substream. Distinct `(seed, stream)` pairs therefore never
//! overlap, and a worker that owns one substream produces the same draws
//! whatever the thread schedule.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

/// BVN(θ1, θ2, σ², σ², ρ), drawn through the Cholesky factor of the
/// equicorrelated covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateNormal {
    theta1: f64,
    theta2: f64,
    sigma: f64,
    rho: f64,
    rho_c: f64,
}

impl BivariateNormal {
    pub fn new(theta1: f64, theta2: f64, sigma: f64, rho: f64) -> Result<Self> {
        if !(theta1.is_finite() && theta2.is_finite()) {
            return Err(Error::invalid("means must be finite"));
        }
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
        Ok(Self {
            theta1,
            theta2,
            sigma,
            rho,
            rho_c: (1.0 - rho * rho).sqrt(),
        })
    }

    /// Centered draw `(Z1, Z2)`.
    #[inline]
    pub fn noise(&self, rng: &mut Rng) -> (f64, f64) {
        let e1 = rng.standard_normal();
        let e2 = rng.standard_normal();
        (
            self.sigma * e1,
            self.sigma * (self.rho * e1 + self.rho_c * e2),
        )
    }

    #[inline]
    pub fn sample(&self, rng: &mut Rng) -> (f64, f64) {
        let (z1, z2) = self.noise(rng);
        (self.theta1 + z1, self.theta2 + z2)
    }
}

pub fn sample_bivariate_normal(
    rng: &mut Rng,
    theta1: f64,
    theta2: f64,
    sigma: f64,
    rho: f64,
    n: usize,
) -> Result<Vec<(f64, f64)>> {
    let dist = BivariateNormal::new(theta1, theta2, sigma, rho)?;
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn correlation(xs: &[(f64, f64)]) -> f64 {
        let n = xs.len() as f64;
        let m1 = xs.iter().map(|p| p.0).sum::<f64>() / n;
        let m2 = xs.iter().map(|p| p.1).sum::<f64>() / n;
        let (mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0);
        for &(a, b) in xs {
            s11 += (a - m1) * (a - m1);
            s22 += (b - m2) * (b - m2);
            s12 += (a - m1) * (b - m2);
        }
        s12 / (s11 * s22).sqrt()
    }

    #[test]
    fn empty_sample() {
        let mut rng = Rng::new(1);
        assert!(sample_bivariate_normal(&mut rng, 0.0, 0.0, 1.0, 0.0, 0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = Rng::new(1);
        assert!(sample_bivariate_normal(&mut rng, 0.0, 0.0, 0.0, 0.0, 3).is_err());
        assert!(sample_bivariate_normal(&mut rng, 0.0, 0.0, -1.0, 0.0, 3).is_err());
        assert!(sample_bivariate_normal(&mut rng, 0.0, 0.0, 1.0, 1.0, 3).is_err());
        assert!(sample_bivariate_normal(&mut rng, 0.0, 0.0, 1.0, f64::NAN, 3).is_err());
    }

    #[test]
    fn correlation_matches_rho() {
        for (rho, seed) in [(0.0, 11), (0.9, 12)] {
            let mut rng = Rng::new(seed);
            let xs = sample_bivariate_normal(&mut rng, 0.0, 0.0, 1.0, rho, 1_000_000).unwrap();
            assert!((correlation(&xs) - rho).abs() < 0.005, "rho {rho}");
        }
    }

    #[test]
    fn moments_match_parameters() {
        let mut rng = Rng::new(5);
        let xs = sample_bivariate_normal(&mut rng, -1.0, 3.0, 2.0, -0.5, 400_000).unwrap();
        let n = xs.len() as f64;
        let m1 = xs.iter().map(|p| p.0).sum::<f64>() / n;
        let m2 = xs.iter().map(|p| p.1).sum::<f64>() / n;
        let v2 = xs.iter().map(|p| (p.1 - m2).powi(2)).sum::<f64>() / n;
        assert!((m1 + 1.0).abs() < 0.02);
        assert!((m2 - 3.0).abs() < 0.02);
        assert!((v2 - 4.0).abs() < 0.05);
    }

    #[test]
    fn reproducible_and_streams_differ() {
        let a = sample_bivariate_normal(&mut Rng::new(42), 0.0, 1.0, 1.0, 0.3, 100).unwrap();
        let b = sample_bivariate_normal(&mut Rng::new(42), 0.0, 1.0, 1.0, 0.3, 100).unwrap();
        assert_eq!(a, b);
        let c =
            sample_bivariate_normal(&mut Rng::substream(42, 1), 0.0, 1.0, 1.0, 0.3, 100).unwrap();
        assert_ne!(a, c);
        let d = sample_bivariate_normal(&mut Rng::new(43), 0.0, 1.0, 1.0, 0.3, 100).unwrap();
        assert_ne!(a, d);
    }
}

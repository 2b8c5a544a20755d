//! First hitting time of a drifted Brownian motion to a constant barrier.
//!
//! The process starts at 0, moves with drift `mu` and diffusion `sigma`, and
//! the barrier sits at distance `a > 0` above the start. For `mu > 0` the
//! hitting time is inverse Gaussian with mean `a / mu` and shape `a^2 /
//! sigma^2`; for `mu <= 0` the law is defective and the barrier is reached
//! with probability `exp(2 mu a / sigma^2)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{FptError, Passage};
use crate::numeric::{exp_times_upper_tail, norm_cdf, LN_SQRT_2PI};

/// Parameters of a drifted Brownian first-passage problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftedBmFptParams {
    /// Distance from the start to the barrier.
    pub a: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl DriftedBmFptParams {
    pub fn new(a: f64, mu: f64, sigma: f64) -> Result<Self, FptError> {
        let p = Self { a, mu, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), FptError> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(FptError::InvalidParams(format!("barrier distance a must be > 0, got {}", self.a)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(FptError::InvalidParams(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !self.mu.is_finite() {
            return Err(FptError::InvalidParams(format!("drift must be finite, got {}", self.mu)));
        }
        Ok(())
    }

    /// Probability that the barrier is ever reached.
    pub fn hit_probability(&self) -> f64 {
        if self.mu >= 0.0 {
            1.0
        } else {
            (2.0 * self.mu * self.a / (self.sigma * self.sigma)).exp()
        }
    }

    /// `P(T <= t)`, defective when `mu < 0`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t.is_infinite() {
            return self.hit_probability();
        }
        let s = self.sigma * t.sqrt();
        let first = norm_cdf((self.mu * t - self.a) / s);
        let b = 2.0 * self.mu * self.a / (self.sigma * self.sigma);
        let second = exp_times_upper_tail(b, (self.a + self.mu * t) / s);
        (first + second).clamp(0.0, 1.0)
    }

    /// `P(T > t)`, including the never-hit mass.
    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        if t.is_infinite() {
            return 1.0 - self.hit_probability();
        }
        let s = self.sigma * t.sqrt();
        // Phi((a - mu t)/s) - exp(b) Phi(-(a + mu t)/s)
        let first = norm_cdf((self.a - self.mu * t) / s);
        let b = 2.0 * self.mu * self.a / (self.sigma * self.sigma);
        let second = exp_times_upper_tail(b, (self.a + self.mu * t) / s);
        (first - second).clamp(0.0, 1.0)
    }

    /// Log of the hitting-time density at `t > 0`.
    pub fn log_density(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let d = self.a - self.mu * t;
        self.a.ln() - self.sigma.ln() - LN_SQRT_2PI - 1.5 * t.ln() - d * d / (2.0 * t * self.sigma * self.sigma)
    }
}

/// Density of the hitting time at `t`.
pub fn ig_density(t: f64, p: &DriftedBmFptParams) -> Result<f64, FptError> {
    if !(t > 0.0) {
        return Err(FptError::Domain { what: "time", value: t });
    }
    p.validate()?;
    Ok(p.log_density(t).exp())
}

/// Exact draw of the hitting time; `Never` when it exceeds `horizon` or the
/// barrier is never reached.
pub fn ig_sample<R: Rng + ?Sized>(rng: &mut R, p: &DriftedBmFptParams, horizon: f64) -> Passage {
    let t = if p.mu > 0.0 {
        inverse_gaussian(rng, p.a / p.mu, p.a * p.a / (p.sigma * p.sigma))
    } else if p.mu < 0.0 {
        // Conditioned on hitting, the law is that of the reflected drift.
        let u: f64 = rng.random();
        if u >= p.hit_probability() {
            return Passage::Never;
        }
        inverse_gaussian(rng, p.a / -p.mu, p.a * p.a / (p.sigma * p.sigma))
    } else {
        // Levy law: a^2 / (sigma^2 Z^2).
        let z: f64 = rng.sample(StandardNormal);
        p.a * p.a / (p.sigma * p.sigma * z * z)
    };
    if t <= horizon {
        Passage::At(t)
    } else {
        Passage::Never
    }
}

/// Transformation-with-rejection draw (Michael, Schucany and Haas).
fn inverse_gaussian<R: Rng + ?Sized>(rng: &mut R, mean: f64, shape: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let y = z * z;
    // x = mean + mean^2 y/(2 shape) - mean/(2 shape) sqrt(4 mean shape y + mean^2 y^2),
    // rewritten to avoid cancellation for large y.
    let root = (mean * y * (4.0 * shape + mean * y)).sqrt();
    let x = mean - 2.0 * mean * mean * y / (mean * y + root);
    let x = x.max(f64::MIN_POSITIVE);
    let u: f64 = rng.random();
    if u <= mean / (mean + x) {
        x
    } else {
        mean * mean / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn density_at_unit_parameters() {
        let p = DriftedBmFptParams::new(1.0, 1.0, 1.0).unwrap();
        let d = ig_density(1.0, &p).unwrap();
        assert!((d - 0.398_942_280_401_432_7).abs() < 1e-12);
    }

    #[test]
    fn density_vanishes_near_zero() {
        let p = DriftedBmFptParams::new(1.0, -3.0, 2.0).unwrap();
        assert!(ig_density(1e-6, &p).unwrap() < 1e-100);
        assert!(ig_density(0.0, &p).is_err());
        assert!(ig_density(-1.0, &p).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DriftedBmFptParams::new(0.0, 1.0, 1.0).is_err());
        assert!(DriftedBmFptParams::new(1.0, 1.0, 0.0).is_err());
        assert!(DriftedBmFptParams::new(1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn cdf_and_survival_are_complementary() {
        for &mu in &[-1.0, 0.0, 0.5, 4.0] {
            let p = DriftedBmFptParams::new(0.7, mu, 0.3).unwrap();
            for &t in &[0.01, 0.2, 1.0, 5.0, 40.0] {
                assert!((p.cdf(t) + p.survival(t) - 1.0).abs() < 1e-12, "mu={mu} t={t}");
            }
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = DriftedBmFptParams::new(1.0, 1.0, 1.0).unwrap();
        let mut r1 = stream_rng(11, 0);
        let mut r2 = stream_rng(11, 0);
        for _ in 0..100 {
            assert_eq!(ig_sample(&mut r1, &p, f64::INFINITY), ig_sample(&mut r2, &p, f64::INFINITY));
        }
    }

    #[test]
    fn sampler_respects_horizon() {
        let p = DriftedBmFptParams::new(1.0, 1.0, 1.0).unwrap();
        let mut rng = stream_rng(5, 0);
        for _ in 0..1000 {
            if let Passage::At(t) = ig_sample(&mut rng, &p, 0.5) {
                assert!(t <= 0.5);
            }
        }
    }

    #[test]
    fn sampler_matches_cdf_away_from_unit_scale() {
        for &(a, mu, sigma) in &[(0.2, 1.0, 1.0), (0.05, 2.0, 0.2), (3.0, 0.5, 1.5), (0.4, -1.0, 0.7)] {
            let p = DriftedBmFptParams::new(a, mu, sigma).unwrap();
            let mut rng = stream_rng(8, 1);
            let n = 20_000;
            let mut d: Vec<f64> = (0..n).map(|_| ig_sample(&mut rng, &p, f64::INFINITY).or_infinity()).collect();
            d.sort_by(f64::total_cmp);
            let ks = d
                .iter()
                .enumerate()
                .filter(|(_, t)| t.is_finite())
                .map(|(k, &t)| {
                    let c = p.cdf(t);
                    (c - k as f64 / n as f64).abs().max((c - (k + 1) as f64 / n as f64).abs())
                })
                .fold(0.0, f64::max);
            assert!(ks < 0.015, "a={a} mu={mu} sigma={sigma}: ks {ks}");
        }
    }
}

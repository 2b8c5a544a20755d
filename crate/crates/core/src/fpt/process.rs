//! One-dimensional Gauss–Markov membrane processes and their inputs.

use serde::{Deserialize, Serialize};

use super::FptError;

/// A piecewise-constant function of absolute time.
///
/// `values[k]` holds on `[times[k], times[k + 1])`; the first value also covers
/// any time before `times[0]` and the last one extends to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InputRepr", into = "InputRepr")]
pub struct PiecewiseConstant {
    times: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum InputRepr {
    Constant(f64),
    Steps { times: Vec<f64>, values: Vec<f64> },
}

impl TryFrom<InputRepr> for PiecewiseConstant {
    type Error = FptError;

    fn try_from(r: InputRepr) -> Result<Self, FptError> {
        match r {
            InputRepr::Constant(c) => {
                if !c.is_finite() {
                    return Err(FptError::InvalidParams(format!("input value must be finite, got {c}")));
                }
                Ok(Self::constant(c))
            }
            InputRepr::Steps { times, values } => Self::new(times, values),
        }
    }
}

impl From<PiecewiseConstant> for InputRepr {
    fn from(p: PiecewiseConstant) -> Self {
        if p.is_constant() {
            InputRepr::Constant(p.values[0])
        } else {
            InputRepr::Steps { times: p.times, values: p.values }
        }
    }
}

impl PiecewiseConstant {
    pub fn constant(value: f64) -> Self {
        Self { times: vec![0.0], values: vec![value] }
    }

    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, FptError> {
        if times.is_empty() || times.len() != values.len() {
            return Err(FptError::InvalidParams(
                "input needs matching, nonempty `times` and `values`".into(),
            ));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(FptError::InvalidParams("input breakpoints and values must be finite".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FptError::InvalidParams("input breakpoints must be strictly increasing".into()));
        }
        if values.len() == 1 {
            return Ok(Self::constant(values[0]));
        }
        Ok(Self { times, values })
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn piece(&self, t: f64) -> usize {
        self.times.partition_point(|&b| b <= t).saturating_sub(1)
    }

    /// Value at `t` (right-continuous).
    pub fn at(&self, t: f64) -> f64 {
        self.values[self.piece(t)]
    }

    /// Calls `f(start, end, value)` for every constant piece covering `[t0, t1]`.
    pub fn for_each_piece(&self, t0: f64, t1: f64, mut f: impl FnMut(f64, f64, f64)) {
        let mut k = self.piece(t0);
        let mut a = t0;
        while a < t1 {
            let b = self.times.get(k + 1).copied().unwrap_or(f64::INFINITY).min(t1);
            f(a, b, self.values[k]);
            a = b;
            k += 1;
        }
    }

    /// `\int_{t0}^{t1} I(s) ds`.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        let mut acc = 0.0;
        self.for_each_piece(t0, t1, |a, b, v| acc += v * (b - a));
        acc
    }

    /// Same function seen from a time origin shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        let k = self.piece(offset);
        let mut times = vec![0.0];
        let mut values = vec![self.values[k]];
        for j in k + 1..self.times.len() {
            times.push(self.times[j] - offset);
            values.push(self.values[j]);
        }
        Self { times, values }
    }
}

/// Free membrane dynamics between spikes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    /// `dV = I(t) dt + sigma dW`.
    Brownian,
    /// `tau dV = (rest_mu - V + I(t)) dt + sigma dW`.
    OrnsteinUhlenbeck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussMarkovSpec {
    pub kind: ProcessKind,
    pub tau: f64,
    pub sigma: f64,
    pub input: PiecewiseConstant,
    pub rest_mu: f64,
}

impl GaussMarkovSpec {
    pub fn brownian(sigma: f64, input: PiecewiseConstant) -> Self {
        Self { kind: ProcessKind::Brownian, tau: 1.0, sigma, input, rest_mu: 0.0 }
    }

    pub fn ornstein_uhlenbeck(tau: f64, sigma: f64, rest_mu: f64, input: PiecewiseConstant) -> Self {
        Self { kind: ProcessKind::OrnsteinUhlenbeck, tau, sigma, input, rest_mu }
    }

    pub fn validate(&self) -> Result<(), FptError> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(FptError::InvalidParams(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if self.kind == ProcessKind::OrnsteinUhlenbeck && !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(FptError::InvalidParams(format!("tau must be > 0, got {}", self.tau)));
        }
        if !self.rest_mu.is_finite() {
            return Err(FptError::InvalidParams("rest_mu must be finite".into()));
        }
        Ok(())
    }

    /// Diffusion coefficient of `V`.
    pub fn noise_scale(&self) -> f64 {
        match self.kind {
            ProcessKind::Brownian => self.sigma,
            ProcessKind::OrnsteinUhlenbeck => self.sigma / self.tau,
        }
    }

    /// Drift of `V` at value `v` and time `t`.
    pub fn drift(&self, v: f64, t: f64) -> f64 {
        match self.kind {
            ProcessKind::Brownian => self.input.at(t),
            ProcessKind::OrnsteinUhlenbeck => (self.rest_mu + self.input.at(t) - v) / self.tau,
        }
    }

    /// Whether the transition law depends only on elapsed time.
    pub fn is_time_homogeneous(&self) -> bool {
        self.input.is_constant()
    }

    /// Conditional mean of `V(t1)` given `V(t0) = v`.
    pub fn mean_after(&self, v: f64, t0: f64, t1: f64) -> f64 {
        match self.kind {
            ProcessKind::Brownian => v + self.input.integral(t0, t1),
            ProcessKind::OrnsteinUhlenbeck => {
                let mut m = v;
                self.input.for_each_piece(t0, t1, |a, b, c| {
                    let target = self.rest_mu + c;
                    m = target + (m - target) * (-(b - a) / self.tau).exp();
                });
                m
            }
        }
    }

    /// Conditional variance of `V(t0 + d)` given `V(t0)`.
    pub fn variance_over(&self, d: f64) -> f64 {
        match self.kind {
            ProcessKind::Brownian => self.sigma * self.sigma * d,
            ProcessKind::OrnsteinUhlenbeck => {
                self.sigma * self.sigma / (2.0 * self.tau) * -(-2.0 * d / self.tau).exp_m1()
            }
        }
    }

    /// Gaussian transition `(mean, variance)` from `(t0, v)` to `t1`.
    pub fn transition(&self, v: f64, t0: f64, t1: f64) -> (f64, f64) {
        (self.mean_after(v, t0, t1), self.variance_over(t1 - t0))
    }

    /// Probability that the process bridged from `v` to `u` over a time `d`
    /// touches `theta` in between (both ends below `theta`).
    ///
    /// Exact for Brownian dynamics with constant input. For OU the bridge is
    /// mapped to a Brownian bridge by the Doob time change and the curved image
    /// of the barrier is replaced by its chord.
    pub fn bridge_crossing_probability(&self, v: f64, u: f64, d: f64, theta: f64) -> f64 {
        if v >= theta || u >= theta {
            return 1.0;
        }
        if !(d > 0.0) {
            return 0.0;
        }
        (-2.0 * (theta - v) * (theta - u) * self.decay_over(d) / self.variance_over(d)).exp()
    }

    /// Factor `E[V(t0+d) - m(t0+d) | V(t0) = y] / (y - m(t0))`.
    pub(crate) fn decay_over(&self, d: f64) -> f64 {
        match self.kind {
            ProcessKind::Brownian => 1.0,
            ProcessKind::OrnsteinUhlenbeck => (-d / self.tau).exp(),
        }
    }
}

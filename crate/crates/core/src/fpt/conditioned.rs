//! Law of the membrane value at an intermediate time, given the last known
//! value and what is known about the next threshold passage.
//!
//! By Bayes' formula and the Markov property the density of `V(t*) = u` is
//! proportional to the killed transition density from `(t_last, v_last)` to
//! `(t*, u)` times the likelihood of the passage evidence from `(t*, u)`. The
//! killed transition is the Gaussian transition times the probability that
//! the bridge between the two values stays below the barrier; without it
//! the posterior would ignore that no passage occurred before `t*`.

use rand::Rng;

use super::{ClosedFormLaw, FirstPassageLaw, FptError, GaussMarkovSpec, ProcessKind, VolterraLaw};
use crate::numeric::{gauss_log_pdf, sample_linear_cell};
use crate::rng::SimRng;

/// What is known about the next passage after `t_last`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HitEvidence {
    /// The first passage happens at this absolute time.
    At(f64),
    /// No passage before this absolute time.
    NoHitBefore(f64),
}

/// Tabulated density of the membrane value below the barrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedValueDensity {
    grid: Vec<f64>,
    weights: Vec<f64>,
    cell_mass: Vec<f64>,
    log_norm: f64,
}

const LOG_TINY: f64 = -690.775_527_898_213_7; // ln(1e-300)
const ZOOM_PASSES: usize = 4;

impl ConditionedValueDensity {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Log of the unnormalized mass, i.e. the likelihood of the evidence.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Grid point of largest weight.
    pub fn mode(&self) -> f64 {
        let k = (0..self.weights.len()).max_by(|&a, &b| self.weights[a].total_cmp(&self.weights[b])).unwrap();
        self.grid[k]
    }

    pub fn mean(&self) -> f64 {
        let f: Vec<f64> = self.grid.iter().zip(&self.weights).map(|(x, w)| x * w).collect();
        crate::numeric::trapezoid(&self.grid, &f)
    }

    /// Draws a value from the piecewise-linear density.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let k = self.cell_mass.partition_point(|&c| c <= u).min(self.cell_mass.len() - 1);
        let prev = if k == 0 { 0.0 } else { self.cell_mass[k - 1] };
        let mass = self.cell_mass[k] - prev;
        let frac = if mass > 0.0 { ((u - prev) / mass).clamp(0.0, 1.0) } else { 0.5 };
        let h = self.grid[k + 1] - self.grid[k];
        (self.grid[k] + sample_linear_cell(self.weights[k], self.weights[k + 1], h, frac)).min(self.grid[k + 1])
    }

    /// Conditions on the passage evidence using `law` for the likelihood.
    pub fn from_law(
        law: &dyn FirstPassageLaw,
        v_last: f64,
        t_last: f64,
        t_star: f64,
        evidence: HitEvidence,
        grid_size: usize,
    ) -> Result<Self, FptError> {
        let theta = law.theta();
        if !(v_last < theta) {
            return Err(FptError::Precondition(format!("v_last = {v_last} must lie below theta = {theta}")));
        }
        if !(t_last < t_star) {
            return Err(FptError::Precondition(format!("need t_last < t_star, got {t_last} and {t_star}")));
        }
        let horizon = match evidence {
            HitEvidence::At(t) | HitEvidence::NoHitBefore(t) => t,
        };
        if !(t_star < horizon) {
            return Err(FptError::Precondition(format!("need t_star < passage time, got {t_star} and {horizon}")));
        }
        if grid_size < 8 {
            return Err(FptError::InvalidParams(format!("grid needs at least 8 points, got {grid_size}")));
        }
        let process = law.process();
        let d = t_star - t_last;
        let (mean, var) = process.transition(v_last, t_last, t_star);
        let sd = var.sqrt();
        let base_lo = mean - 8.0 * sd;
        if !(base_lo < theta) {
            return Err(FptError::DegenerateConditioning { log_norm: f64::NEG_INFINITY });
        }
        let log_weights = |grid: &[f64]| -> Vec<f64> {
            let lik = match evidence {
                HitEvidence::At(t) => law.log_density_many(grid, t_star, t - t_star),
                HitEvidence::NoHitBefore(t) => law.log_survival_many(grid, t_star, t - t_star),
            };
            grid.iter()
                .zip(lik)
                .map(|(&u, l)| {
                    let kill = process.bridge_crossing_probability(v_last, u, d, theta);
                    gauss_log_pdf(u, mean, var) + (-kill).ln_1p() + l
                })
                .collect()
        };

        let (mut lo, mut hi) = (base_lo, theta);
        let mut grid = Vec::new();
        let mut lw = Vec::new();
        for pass in 0..ZOOM_PASSES {
            grid = uniform_open(lo, hi, grid_size);
            lw = log_weights(&grid);
            let peak = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !peak.is_finite() {
                break;
            }
            let sig: Vec<usize> = (0..grid.len()).filter(|&k| lw[k] > peak - 40.0).collect();
            let (first, last) = (sig[0], *sig.last().unwrap());
            if last - first >= grid_size / 8 || pass + 1 == ZOOM_PASSES {
                break;
            }
            let cell = grid[1] - grid[0];
            lo = (grid[first] - cell).max(base_lo);
            hi = (grid[last] + cell).min(theta);
        }

        let peak = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            return Err(FptError::DegenerateConditioning { log_norm: f64::NEG_INFINITY });
        }
        let mut weights: Vec<f64> = lw.iter().map(|l| (l - peak).exp()).collect();
        let mass = crate::numeric::trapezoid(&grid, &weights);
        let log_norm = peak + mass.ln();
        if !(log_norm >= LOG_TINY) || !(mass > 0.0) {
            return Err(FptError::DegenerateConditioning { log_norm });
        }
        weights.iter_mut().for_each(|w| *w /= mass);
        let mut acc = 0.0;
        let cell_mass = grid
            .windows(2)
            .zip(weights.windows(2))
            .map(|(g, w)| {
                acc += 0.5 * (g[1] - g[0]) * (w[0] + w[1]);
                acc
            })
            .collect();
        Ok(Self { grid, weights, cell_mass, log_norm })
    }
}

/// `n` uniform points on `[lo, hi)`.
fn uniform_open(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / n as f64;
    (0..n).map(|k| lo + k as f64 * h).collect()
}

/// Density of `V(t_star)` given `V(t_last) = v_last` and a first passage
/// through `theta` at `hit_time`.
pub fn conditioned_value_density(
    process: &GaussMarkovSpec,
    v_last: f64,
    t_last: f64,
    t_star: f64,
    hit_time: f64,
    theta: f64,
    v_grid_size: usize,
) -> Result<ConditionedValueDensity, FptError> {
    let evidence = HitEvidence::At(hit_time);
    if process.kind == ProcessKind::Brownian && process.input.is_constant() {
        let law = ClosedFormLaw::new(process.clone(), theta)?;
        ConditionedValueDensity::from_law(&law, v_last, t_last, t_star, evidence, v_grid_size)
    } else {
        let law = VolterraLaw::new(process.clone(), theta, Default::default())?;
        ConditionedValueDensity::from_law(&law, v_last, t_last, t_star, evidence, v_grid_size)
    }
}

/// Value of the membrane at `t_star`, drawn from the conditioned law; exact
/// endpoint values are returned when `t_star` coincides with an end.
pub(crate) fn sample_conditioned_value(
    rng: &mut SimRng,
    law: &dyn FirstPassageLaw,
    v_last: f64,
    t_last: f64,
    t_star: f64,
    evidence: HitEvidence,
    grid_size: usize,
) -> Result<f64, FptError> {
    if t_star <= t_last {
        return Ok(v_last);
    }
    if let HitEvidence::At(t) = evidence {
        if t <= t_star {
            return Ok(law.theta());
        }
    }
    Ok(ConditionedValueDensity::from_law(law, v_last, t_last, t_star, evidence, grid_size)?.sample(rng))
}

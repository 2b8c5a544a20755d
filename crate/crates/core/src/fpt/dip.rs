//! Membrane processes driven by exponentially filtered noise.
//!
//! `tau_s dI = -I dt + sigma dW` feeds the membrane either directly
//! (`dV = (I_e + I) dt`, a doubly integrated process) or through a leak
//! (`dV = ((mu - V + I_e) / tau + I) dt`). No closed form for the passage law
//! is used; passages are found by stepping the pair `(I, \int I)` exactly over
//! short steps and interpolating the crossing.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{FptError, FptTable, Passage, PiecewiseConstant};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpSynapseKind {
    Perfect,
    Leaky,
}

/// Two-dimensional membrane/current process.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSynapseProcess {
    pub kind: ExpSynapseKind,
    /// Membrane time constant (leaky kind only).
    pub tau: f64,
    pub tau_s: f64,
    pub sigma: f64,
    pub rest_mu: f64,
    pub input: PiecewiseConstant,
    /// Step used by the passage sampler.
    pub dt: f64,
}

/// Passage time together with the synaptic current at the passage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointPassage {
    pub passage: Passage,
    pub current: f64,
}

/// Exact one-step law of `(I, \int I)` for a fixed step.
#[derive(Debug, Clone, Copy)]
struct CurrentStep {
    h: f64,
    decay: f64,
    gain: f64,
    a: f64,
    b: f64,
    c: f64,
}

impl CurrentStep {
    fn new(tau_s: f64, sigma: f64, h: f64) -> Self {
        let x = h / tau_s;
        let decay = (-x).exp();
        let one_minus = -(-x).exp_m1();
        let var_i = sigma * sigma / (2.0 * tau_s) * -(-2.0 * x).exp_m1();
        let var_j = if x < 1e-2 {
            sigma * sigma * tau_s * x.powi(3) * (1.0 / 3.0 - x / 4.0 + 7.0 * x * x / 60.0)
        } else {
            sigma * sigma * tau_s * (x - 2.0 * one_minus - 0.5 * (-2.0 * x).exp_m1())
        };
        let cov = 0.5 * sigma * sigma * one_minus * one_minus;
        let a = var_i.sqrt();
        let b = if a > 0.0 { cov / a } else { 0.0 };
        let c = (var_j - b * b).max(0.0).sqrt();
        Self { h, decay, gain: tau_s * one_minus, a, b, c }
    }

    /// New current and integral of the current over the step.
    fn draw(&self, rng: &mut SimRng, i: f64) -> (f64, f64) {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        (i * self.decay + self.a * z1, i * self.gain + self.b * z1 + self.c * z2)
    }
}

impl ExpSynapseProcess {
    pub fn validate(&self) -> Result<(), FptError> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(FptError::InvalidParams(format!("{name} must be > 0, got {v}")))
            }
        };
        pos("tau_s", self.tau_s)?;
        pos("sigma", self.sigma)?;
        pos("dt", self.dt)?;
        if self.kind == ExpSynapseKind::Leaky {
            pos("tau", self.tau)?;
        }
        Ok(())
    }

    /// Leak rate `1 / tau` (0 for the perfect integrator).
    fn leak(&self) -> f64 {
        match self.kind {
            ExpSynapseKind::Perfect => 0.0,
            ExpSynapseKind::Leaky => 1.0 / self.tau,
        }
    }

    /// Membrane response at time `t` to a unit jump of the current at time 0:
    /// `e^{-t/tau} (1 - e^{-alpha t}) / alpha`, `alpha = 1/tau_s - 1/tau`,
    /// with the `alpha -> 0` limit `t e^{-t/tau}`.
    pub fn response(&self, t: f64) -> f64 {
        response(self.leak(), 1.0 / self.tau_s, t)
    }

    /// Deterministic drift of `V` over `[t0, t0 + h]` without the current,
    /// applied to `v`.
    fn free_membrane(&self, v: f64, t0: f64, h: f64) -> f64 {
        match self.kind {
            ExpSynapseKind::Perfect => v + self.input.integral(t0, t0 + h),
            ExpSynapseKind::Leaky => {
                let mut m = v;
                self.input.for_each_piece(t0, t0 + h, |a, b, c| {
                    let target = self.rest_mu + c;
                    m = target + (m - target) * (-(b - a) / self.tau).exp();
                });
                m
            }
        }
    }

    /// One step of length `h` from `(v, i)` at absolute time `t`.
    ///
    /// The current and its integral are exact; for the leaky kind the
    /// integral enters the membrane without the within-step leak.
    pub fn step(&self, rng: &mut SimRng, v: f64, i: f64, t: f64, h: f64) -> (f64, f64) {
        let s = CurrentStep::new(self.tau_s, self.sigma, h);
        self.step_with(&s, rng, v, i, t)
    }

    fn step_with(&self, s: &CurrentStep, rng: &mut SimRng, v: f64, i: f64, t: f64) -> (f64, f64) {
        let (i1, j) = s.draw(rng, i);
        (self.free_membrane(v, t, s.h) + j, i1)
    }

    /// Current after evolving freely for a time `d` (no membrane coupling).
    pub fn evolve_current(&self, rng: &mut SimRng, i: f64, d: f64) -> f64 {
        if !(d > 0.0) {
            return i;
        }
        let x = d / self.tau_s;
        let var = self.sigma * self.sigma / (2.0 * self.tau_s) * -(-2.0 * x).exp_m1();
        let z: f64 = rng.sample(StandardNormal);
        i * (-x).exp() + var.sqrt() * z
    }

    /// Draws the first passage of `V` through `theta` from `(v0, i0)` at
    /// absolute time `t0`, with the current at the passage. `Never` when no
    /// passage happens within `max_wait`.
    pub fn sample_passage(&self, rng: &mut SimRng, v0: f64, i0: f64, t0: f64, theta: f64, max_wait: f64) -> JointPassage {
        if v0 >= theta {
            return JointPassage { passage: Passage::At(0.0), current: i0 };
        }
        let s = CurrentStep::new(self.tau_s, self.sigma, self.dt);
        let (mut v, mut i, mut elapsed) = (v0, i0, 0.0);
        while elapsed < max_wait {
            let (v1, i1) = self.step_with(&s, rng, v, i, t0 + elapsed);
            if v1 >= theta {
                let f = ((theta - v) / (v1 - v)).clamp(0.0, 1.0);
                let t = elapsed + f * self.dt;
                let current = i + f * (i1 - i);
                return if t <= max_wait {
                    JointPassage { passage: Passage::At(t), current }
                } else {
                    JointPassage { passage: Passage::Never, current }
                };
            }
            v = v1;
            i = i1;
            elapsed += self.dt;
        }
        JointPassage { passage: Passage::Never, current: i }
    }

    /// Mean of `(V, I)` at `t0 + d` from `(v, i)` at `t0`.
    pub fn mean_after(&self, v: f64, i: f64, t0: f64, d: f64) -> (f64, f64) {
        (self.free_membrane(v, t0, d) + i * self.response(d), i * (-d / self.tau_s).exp())
    }

    /// Covariance `[[vv, vi], [vi, ii]]` of `(V, I)` accumulated over `d`.
    pub fn covariance(&self, d: f64) -> [f64; 3] {
        if !(d > 0.0) {
            return [0.0; 3];
        }
        let r2 = 1.0 / self.tau_s;
        let q = (self.sigma * r2).powi(2);
        // Simpson on smooth integrands.
        let n = 128;
        let h = d / n as f64;
        let (mut vv, mut vi, mut ii) = (0.0, 0.0, 0.0);
        for k in 0..=n {
            let u = k as f64 * h;
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            let phi = self.response(u);
            let e = (-r2 * u).exp();
            vv += w * phi * phi;
            vi += w * phi * e;
            ii += w * e * e;
        }
        let s = q * h / 3.0;
        [vv * s, vi * s, ii * s]
    }

    /// Draws `(V, I)` at `t_star` given `(v_a, i_a)` at `t_a` and, when
    /// known, the passage `(t_hit, i_hit)` with `V(t_hit) = theta`. The draw is
    /// Gaussian conditioned on the end points, truncated to `V < theta`;
    /// the requirement that the path stays below the barrier in between is
    /// not imposed.
    #[allow(clippy::too_many_arguments)]
    pub fn sample_bridge(
        &self,
        rng: &mut SimRng,
        v_a: f64,
        i_a: f64,
        t_a: f64,
        t_star: f64,
        end: Option<(f64, f64)>,
        theta: f64,
    ) -> (f64, f64) {
        let d = t_star - t_a;
        if !(d > 0.0) {
            return (v_a, i_a);
        }
        let (mut mv, mut mi) = self.mean_after(v_a, i_a, t_a, d);
        let [mut cvv, mut cvi, mut cii] = self.covariance(d);
        if let Some((t_hit, i_hit)) = end {
            let e = t_hit - t_star;
            if !(e > 0.0) {
                return (theta, i_hit);
            }
            // Z_hit = M Z_star + noise(Q); condition Z_star on Z_hit.
            let (m11, m12, m22) = ((-self.leak() * e).exp(), self.response(e), (-e / self.tau_s).exp());
            let [qvv, qvi, qii] = self.covariance(e);
            let (fv0, _) = self.mean_after(0.0, 0.0, t_star, e);
            // C M^T
            let k11 = cvv * m11 + cvi * m12;
            let k12 = cvi * m22;
            let k21 = cvi * m11 + cii * m12;
            let k22 = cii * m22;
            // S = M C M^T + Q
            let s11 = m11 * k11 + m12 * k21 + qvv;
            let s12 = m11 * k12 + m12 * k22 + qvi;
            let s22 = m22 * k22 + qii;
            let det = s11 * s22 - s12 * s12;
            if det > 0.0 {
                let (i11, i12, i22) = (s22 / det, -s12 / det, s11 / det);
                let r1 = theta - (m11 * mv + m12 * mi + fv0);
                let r2 = i_hit - m22 * mi;
                let (y1, y2) = (i11 * r1 + i12 * r2, i12 * r1 + i22 * r2);
                mv += k11 * y1 + k12 * y2;
                mi += k21 * y1 + k22 * y2;
                // C - K S^{-1} K^T
                let g11 = k11 * i11 + k12 * i12;
                let g12 = k11 * i12 + k12 * i22;
                let g21 = k21 * i11 + k22 * i12;
                let g22 = k21 * i12 + k22 * i22;
                cvv -= g11 * k11 + g12 * k12;
                cvi -= g21 * k11 + g22 * k12;
                cii -= g21 * k21 + g22 * k22;
            }
        }
        let a = cvv.max(0.0).sqrt();
        let b = if a > 0.0 { cvi / a } else { 0.0 };
        let c = (cii - b * b).max(0.0).sqrt();
        for _ in 0..256 {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let v = mv + a * z1;
            if v < theta {
                return (v, mi + b * z1 + c * z2);
            }
        }
        // Essentially all conditional mass sits at the barrier.
        (theta - 1e-12 * theta.abs().max(1.0), mi)
    }
}

fn response(r1: f64, r2: f64, t: f64) -> f64 {
    let alpha = r2 - r1;
    let frac = if alpha.abs() * t < 1e-300 { t } else { -(-alpha * t).exp_m1() / alpha };
    (-r1 * t).exp() * frac
}

/// Monte-Carlo passage table of the exponentially filtered process from
/// `(v0, is0)`: `n_paths` passages with step `dt`, binned on 1024 cells over
/// `[0, horizon]`.
#[allow(clippy::too_many_arguments)]
pub fn dip_fpt_mc(
    rng: &mut SimRng,
    process: &ExpSynapseProcess,
    v0: f64,
    is0: f64,
    theta: f64,
    dt: f64,
    horizon: f64,
    n_paths: usize,
) -> Result<FptTable, FptError> {
    if !(v0 < theta) {
        return Err(FptError::Precondition(format!("v0 = {v0} must lie below theta = {theta}")));
    }
    if n_paths < 10_000 {
        return Err(FptError::InvalidParams(format!("need at least 10000 paths, got {n_paths}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(FptError::InvalidParams(format!("horizon must be finite and > 0, got {horizon}")));
    }
    let p = ExpSynapseProcess { dt, ..process.clone() };
    p.validate()?;
    const BINS: usize = 1024;
    let h = horizon / BINS as f64;
    let mut counts = vec![0u64; BINS];
    for _ in 0..n_paths {
        if let Passage::At(t) = p.sample_passage(rng, v0, is0, 0.0, theta, horizon).passage {
            counts[((t / h) as usize).min(BINS - 1)] += 1;
        }
    }
    let mass: Vec<f64> = counts.iter().map(|&c| c as f64 / n_paths as f64).collect();
    // Edge densities averaging the neighbouring bins keep the total mass.
    let mut density = vec![0.0; BINS + 1];
    density[0] = mass[0] / h;
    density[BINS] = mass[BINS - 1] / h;
    for k in 1..BINS {
        density[k] = 0.5 * (mass[k - 1] + mass[k]) / h;
    }
    FptTable::from_uniform(h, density)
}

//! Time-stepped Monte-Carlo reference simulators.
//!
//! The full network is integrated on a fixed grid with Euler–Maruyama steps.
//! The `EulerGobet` scheme adds the Brownian-bridge test for crossings between
//! grid points and draws the crossing time inside the step from the bridge;
//! plain `Euler` detects crossings at grid points only.

mod histogram;

pub use histogram::{histogram, Histogram};

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fpt::{ig_sample, DriftedBmFptParams, ExpSynapseProcess, FptError, GaussMarkovSpec, Passage};
use crate::models::{KappaSpec, ModelError, NetworkSpec};
use crate::rng::{stream_rng, SimRng};
use crate::sim::{Ensemble, PendingDelivery, SpikeTrain};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fpt(#[from] FptError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty ensemble")]
    EmptyEnsemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Euler,
    EulerGobet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub dt: f64,
    pub n_paths: usize,
    pub scheme: Scheme,
    pub seed: u64,
}

impl McConfig {
    fn validate(&self, horizon: f64) -> Result<(), McError> {
        if !(self.dt > 0.0 && self.dt <= horizon) {
            return Err(McError::InvalidConfig(format!("dt must be in (0, horizon], got {}", self.dt)));
        }
        if self.n_paths == 0 {
            return Err(McError::InvalidConfig("n_paths must be >= 1".into()));
        }
        Ok(())
    }
}

/// Whether a Brownian path with noise scale `sigma` crossed `theta` during a
/// step of length `dt` between the end values `v_lo` and `v_hi`.
pub fn gobet_crossing<R: Rng + ?Sized>(rng: &mut R, v_lo: f64, v_hi: f64, theta: f64, sigma: f64, dt: f64) -> bool {
    if v_lo.max(v_hi) >= theta {
        return true;
    }
    let p = (-2.0 * (theta - v_lo) * (theta - v_hi) / (sigma * sigma * dt)).exp();
    rng.random::<f64>() < p
}

/// Draws the first time in `[0, dt]` at which a Brownian bridge from `v_lo`
/// to `v_hi` with noise scale `sigma` reaches `theta`, given that it does.
///
/// With `alpha = theta - v_lo` and `beta = |theta - v_hi|`, the crossing time
/// is `dt Y / (1 + Y)` for `Y` inverse Gaussian with mean `alpha / beta` and
/// shape `alpha^2 / (sigma^2 dt)`.
pub fn bridge_crossing_time<R: Rng + ?Sized>(rng: &mut R, v_lo: f64, v_hi: f64, theta: f64, sigma: f64, dt: f64) -> f64 {
    let alpha = theta - v_lo;
    if !(alpha > 0.0) {
        return 0.0;
    }
    let p = DriftedBmFptParams { a: alpha, mu: (theta - v_hi).abs(), sigma: sigma * dt.sqrt() };
    match ig_sample(rng, &p, f64::INFINITY) {
        Passage::At(y) => dt * y / (1.0 + y),
        Passage::Never => dt,
    }
}

#[derive(Debug, Clone)]
enum Dynamics {
    Instant(GaussMarkovSpec),
    ExpSynapse(ExpSynapseProcess),
}

#[derive(Debug, Clone)]
struct Unit {
    dynamics: Dynamics,
    theta: f64,
    v_reset: f64,
    refractory: f64,
    kappa: KappaSpec,
}

/// Per-path scratch buffers.
#[derive(Debug, Default)]
struct Scratch {
    v: Vec<f64>,
    i: Vec<f64>,
    last_spike: Vec<f64>,
    free_from: Vec<f64>,
    pending: BinaryHeap<Reverse<PendingDelivery>>,
    spikes: Vec<(f64, usize)>,
}

struct Integrator<'a> {
    spec: &'a NetworkSpec,
    units: Vec<Unit>,
    outgoing: Vec<Vec<usize>>,
    scheme: Scheme,
    dt: f64,
}

impl Integrator<'_> {
    fn spike(&self, s: &mut Scratch, j: usize, t: f64) {
        s.spikes.push((t, j));
        s.last_spike[j] = t;
        s.free_from[j] = t + self.units[j].refractory;
        s.v[j] = self.units[j].v_reset;
        for &k in &self.outgoing[j] {
            let syn = &self.spec.synapses[k];
            s.pending.push(Reverse(PendingDelivery { at: t + syn.delay, pre: j, post: syn.post, emission: t, synapse: k }));
        }
    }

    /// Applies the deliveries that arrived by `t`.
    fn deliver(&self, s: &mut Scratch, t: f64) {
        while let Some(&Reverse(d)) = s.pending.peek() {
            if d.at > t {
                break;
            }
            s.pending.pop();
            let u = &self.units[d.post];
            let w = self.spec.synapses[d.synapse].weight * u.kappa.value(d.at - s.last_spike[d.post], u.refractory);
            if w == 0.0 {
                continue;
            }
            match u.dynamics {
                Dynamics::Instant(_) => {
                    s.v[d.post] += w;
                    if s.v[d.post] >= u.theta {
                        self.spike(s, d.post, d.at);
                    }
                }
                Dynamics::ExpSynapse(_) => s.i[d.post] += w,
            }
        }
    }

    fn path(&self, s: &mut Scratch, rng: &mut SimRng, v0: &[f64], i0: &[f64], train: &mut SpikeTrain) {
        let n = self.units.len();
        let horizon = self.spec.horizon;
        s.v.clear();
        s.v.extend_from_slice(v0);
        s.i.clear();
        s.i.extend_from_slice(i0);
        s.last_spike.clear();
        s.last_spike.resize(n, f64::NEG_INFINITY);
        s.free_from.clear();
        s.free_from.resize(n, f64::NEG_INFINITY);
        s.pending.clear();
        s.spikes.clear();
        let steps = (horizon / self.dt).ceil() as usize;
        for k in 0..steps {
            let t0 = k as f64 * self.dt;
            let t1 = (k + 1) as f64 * self.dt;
            self.deliver(s, t0);
            for j in 0..n {
                let u = &self.units[j];
                let start = s.free_from[j].max(t0);
                match &u.dynamics {
                    Dynamics::Instant(process) => {
                        if start >= t1 {
                            continue;
                        }
                        let h = t1 - start;
                        let v = s.v[j];
                        let sigma = process.noise_scale();
                        let z: f64 = rng.sample(StandardNormal);
                        let v1 = v + process.drift(v, start) * h + sigma * h.sqrt() * z;
                        let crossed = match self.scheme {
                            Scheme::Euler => (v1 >= u.theta).then_some(t1),
                            Scheme::EulerGobet => gobet_crossing(rng, v, v1, u.theta, sigma, h)
                                .then(|| start + bridge_crossing_time(rng, v, v1, u.theta, sigma, h)),
                        };
                        match crossed {
                            Some(tc) => self.spike(s, j, tc),
                            None => s.v[j] = v1,
                        }
                    }
                    Dynamics::ExpSynapse(process) => {
                        // The current keeps evolving while the membrane is clamped.
                        if start > t0 {
                            s.i[j] = process.evolve_current(rng, s.i[j], start.min(t1) - t0);
                        }
                        if start >= t1 {
                            continue;
                        }
                        let h = t1 - start;
                        let (v, i) = (s.v[j], s.i[j]);
                        let (v1, i1) = process.step(rng, v, i, start, h);
                        s.i[j] = i1;
                        if v1 >= u.theta {
                            let tc = match self.scheme {
                                Scheme::Euler => t1,
                                Scheme::EulerGobet => start + ((u.theta - v) / (v1 - v)).clamp(0.0, 1.0) * h,
                            };
                            self.spike(s, j, tc);
                        } else {
                            s.v[j] = v1;
                        }
                    }
                }
            }
        }
        s.spikes.retain(|r| r.0 <= horizon);
        s.spikes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(t, j) in &s.spikes {
            train.push(t, j);
        }
    }
}

/// `cfg.n_paths` time-stepped realizations of the network from the spec's
/// initial values, or from `v0` when given. Path `k` draws from stream `k`
/// of `cfg.seed`.
pub fn euler_run(spec: &NetworkSpec, v0: Option<&[f64]>, cfg: &McConfig) -> Result<Ensemble, McError> {
    spec.validate()?;
    cfg.validate(spec.horizon)?;
    let mut units = Vec::with_capacity(spec.neurons.len());
    for n in &spec.neurons {
        let dynamics = match n.gauss_markov() {
            Some(p) => Dynamics::Instant(p),
            None => {
                let process = ExpSynapseProcess {
                    kind: n.exp_synapse_kind().expect("exp-synapse model"),
                    tau: n.tau.unwrap_or(1.0),
                    tau_s: n.tau_s.unwrap_or(1.0),
                    sigma: n.sigma,
                    rest_mu: n.rest_mu,
                    input: n.input.clone(),
                    dt: cfg.dt,
                };
                process.validate()?;
                Dynamics::ExpSynapse(process)
            }
        };
        units.push(Unit { dynamics, theta: n.theta, v_reset: n.v_reset, refractory: n.refractory, kappa: n.kappa });
    }
    let v0: Vec<f64> = match v0 {
        Some(v) if v.len() == spec.neurons.len() => v.to_vec(),
        Some(v) => return Err(McError::InvalidConfig(format!("expected {} initial values, got {}", spec.neurons.len(), v.len()))),
        None => spec.neurons.iter().map(|n| n.initial_voltage()).collect(),
    };
    if let Some(j) = (0..v0.len()).find(|&j| !(v0[j] < spec.neurons[j].theta)) {
        return Err(McError::InvalidConfig(format!("neuron {j}: initial value is not below theta")));
    }
    let i0: Vec<f64> = spec.neurons.iter().map(|n| n.i_init).collect();
    let mut outgoing = vec![Vec::new(); spec.neurons.len()];
    for (k, s) in spec.synapses.iter().enumerate() {
        outgoing[s.pre].push(k);
    }
    let integrator = Integrator { spec, units, outgoing, scheme: cfg.scheme, dt: cfg.dt };
    Ensemble::build(cfg.n_paths, spec.neurons.len(), Scratch::default, |s, k, train| {
        integrator.path(s, &mut stream_rng(cfg.seed, k), &v0, &i0, train);
        Ok::<_, McError>(())
    })
}

//! A network spec turned into ready-to-sample laws.

use std::sync::Arc;

use crate::fpt::{law_for, AtlasConfig, ExpSynapseProcess, FirstPassageLaw};
use crate::models::{KappaSpec, NetworkSpec, NeuronModel};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileConfig {
    pub atlas: AtlasConfig,
    /// Voltage grid of the conditioned densities.
    pub grid_size: usize,
    /// Step of the exponential-synapse passage sampler; by default
    /// `min(tau_s, tau) / 200`.
    pub exp_synapse_dt: Option<f64>,
}

impl Default for CompileConfig {
    fn default() -> Self {
        Self { atlas: AtlasConfig::default(), grid_size: 512, exp_synapse_dt: None }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Dynamics {
    Instant { law: Arc<dyn FirstPassageLaw> },
    ExpSynapse { process: ExpSynapseProcess },
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledNeuron {
    pub dynamics: Dynamics,
    pub theta: f64,
    pub v_reset: f64,
    pub refractory: f64,
    pub kappa: KappaSpec,
    /// Deliveries are handled through the conditioned membrane value.
    pub needs_voltage: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Outgoing {
    pub synapse: usize,
    pub post: usize,
    pub delay: f64,
}

/// Compiled network, shareable across threads and runs.
#[derive(Debug, Clone)]
pub struct Network {
    pub(crate) spec: NetworkSpec,
    pub(crate) neurons: Vec<CompiledNeuron>,
    pub(crate) outgoing: Vec<Vec<Outgoing>>,
    pub(crate) depth: usize,
    pub(crate) grid_size: usize,
    pub(crate) history_fill: f64,
}

impl Network {
    pub fn compile(spec: &NetworkSpec) -> Result<Self, SimError> {
        Self::compile_with(spec, CompileConfig::default())
    }

    pub fn compile_with(spec: &NetworkSpec, cfg: CompileConfig) -> Result<Self, SimError> {
        spec.validate()?;
        let mut neurons = Vec::with_capacity(spec.neurons.len());
        for (j, n) in spec.neurons.iter().enumerate() {
            let dynamics = if let Some(process) = n.gauss_markov() {
                let inhibition: f64 =
                    spec.synapses.iter().filter(|s| s.post == j && s.weight < 0.0).map(|s| -s.weight).sum();
                let floor = n.input.values().iter().copied().fold(f64::INFINITY, f64::min);
                let spread = if n.model.is_leaky() { n.sigma / (2.0 * n.tau.unwrap_or(1.0)).sqrt() } else { n.sigma };
                let lower = n.v_reset.min(n.initial_voltage()).min(n.rest_mu + floor) - 8.0 * spread - inhibition;
                let law = law_for(&process, n.theta, spec.horizon, lower, &[n.v_reset, n.initial_voltage()], cfg.atlas)?;
                Dynamics::Instant { law }
            } else {
                let tau_s = n.tau_s.unwrap_or(1.0);
                let tau = n.tau.unwrap_or(f64::INFINITY);
                let process = ExpSynapseProcess {
                    kind: n.exp_synapse_kind().expect("exp-synapse model"),
                    tau: n.tau.unwrap_or(1.0),
                    tau_s,
                    sigma: n.sigma,
                    rest_mu: n.rest_mu,
                    input: n.input.clone(),
                    dt: cfg.exp_synapse_dt.unwrap_or(tau_s.min(tau) / 200.0),
                };
                process.validate()?;
                Dynamics::ExpSynapse { process }
            };
            neurons.push(CompiledNeuron {
                dynamics,
                theta: n.theta,
                v_reset: n.v_reset,
                refractory: n.refractory,
                kappa: n.kappa,
                needs_voltage: spec.receives_excitation(j),
            });
        }
        let mut outgoing = vec![Vec::new(); spec.neurons.len()];
        for (k, s) in spec.synapses.iter().enumerate() {
            outgoing[s.pre].push(Outgoing { synapse: k, post: s.post, delay: s.delay });
        }
        // Appendix B initial history: every neuron looks like it fired long enough ago.
        let history_fill = spec
            .synapses
            .iter()
            .map(|s| -spec.neurons[s.pre].refractory - s.delay)
            .fold(0.0, f64::min);
        Ok(Self {
            spec: spec.clone(),
            neurons,
            outgoing,
            depth: spec.history_depth(),
            grid_size: cfg.grid_size,
            history_fill,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.neurons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neurons.is_empty()
    }

    /// Model of neuron `j`.
    pub fn model(&self, j: usize) -> NeuronModel {
        self.spec.neurons[j].model
    }

    /// Depth `M` of the firing-time history.
    pub fn history_depth(&self) -> usize {
        self.depth
    }
}

//! Seeded random networks for benchmarks and invariant checks.

use rand::Rng;

use super::{ModelError, NetworkSpec, NeuronSpec, SynapseSpec};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ErdosRenyiConfig {
    pub n: usize,
    /// Probability of each ordered pair `(pre, post)`, `pre != post`.
    pub p: f64,
    /// Neuron templates, assigned round-robin.
    pub templates: Vec<NeuronSpec>,
    /// Range of synaptic weight magnitudes.
    pub weight: (f64, f64),
    /// Probability that a synapse is excitatory.
    pub excitatory_fraction: f64,
    /// Range of delays.
    pub delay: (f64, f64),
    pub horizon: f64,
    pub seed: u64,
}

/// Draws an Erdős–Rényi network; identical configurations give identical specs.
pub fn erdos_renyi(cfg: &ErdosRenyiConfig) -> Result<NetworkSpec, ModelError> {
    if cfg.templates.is_empty() {
        return Err(ModelError::Invalid { path: "templates".into(), reason: "need at least one template".into() });
    }
    if !(0.0..=1.0).contains(&cfg.p) || !(0.0..=1.0).contains(&cfg.excitatory_fraction) {
        return Err(ModelError::Invalid { path: "p".into(), reason: "probabilities must lie in [0, 1]".into() });
    }
    let mut rng = stream_rng(cfg.seed, 0);
    let neurons = (0..cfg.n).map(|i| cfg.templates[i % cfg.templates.len()].clone()).collect();
    let mut synapses = Vec::new();
    for pre in 0..cfg.n {
        for post in 0..cfg.n {
            if pre == post || rng.random::<f64>() >= cfg.p {
                continue;
            }
            let magnitude = cfg.weight.0 + (cfg.weight.1 - cfg.weight.0) * rng.random::<f64>();
            let sign = if rng.random::<f64>() < cfg.excitatory_fraction { 1.0 } else { -1.0 };
            let delay = cfg.delay.0 + (cfg.delay.1 - cfg.delay.0) * rng.random::<f64>();
            synapses.push(SynapseSpec { pre, post, weight: sign * magnitude, delay });
        }
    }
    NetworkSpec::new(cfg.horizon, neurons, synapses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::NeuronModel;

    #[test]
    fn seeded_and_valid() {
        let mut t = NeuronSpec::new(NeuronModel::PifInstant);
        t.refractory = 0.02;
        let cfg = ErdosRenyiConfig {
            n: 10,
            p: 0.3,
            templates: vec![t],
            weight: (0.05, 0.2),
            excitatory_fraction: 0.5,
            delay: (0.01, 0.1),
            horizon: 2.0,
            seed: 9,
        };
        let a = erdos_renyi(&cfg).unwrap();
        let b = erdos_renyi(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.synapses.iter().all(|s| s.pre != s.post && (0.01..=0.1).contains(&s.delay)));
        assert!(!a.synapses.is_empty());
    }
}

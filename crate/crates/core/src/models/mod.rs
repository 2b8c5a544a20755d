//! Declarative network descriptions.
//!
//! Networks are written as TOML documents:
//!
//! ```toml
//! format_version = 1
//! horizon = 4.0
//!
//! [[neurons]]
//! model = "pif_instant"   # lif_instant, pif_exp_synapse, lif_exp_synapse
//! sigma = 0.2
//! theta = 1.0
//! v_reset = 0.0
//! input = 1.0             # or { times = [0.0, 2.0], values = [1.0, 0.5] }
//!
//! [[synapses]]
//! pre = 0
//! post = 1
//! weight = -0.2
//! delay = 0.0
//! ```
//!
//! All quantities are in dimensionless model units.

mod er;

pub use er::{erdos_renyi, ErdosRenyiConfig};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fpt::{ExpSynapseKind, GaussMarkovSpec, PiecewiseConstant};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("malformed network document: {0}")]
    Syntax(String),
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> ModelError {
    ModelError::Invalid { path: path.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeuronModel {
    PifInstant,
    LifInstant,
    PifExpSynapse,
    LifExpSynapse,
}

impl NeuronModel {
    pub fn is_leaky(self) -> bool {
        matches!(self, NeuronModel::LifInstant | NeuronModel::LifExpSynapse)
    }

    pub fn has_exp_synapse(self) -> bool {
        matches!(self, NeuronModel::PifExpSynapse | NeuronModel::LifExpSynapse)
    }

    pub fn name(self) -> &'static str {
        match self {
            NeuronModel::PifInstant => "pif_instant",
            NeuronModel::LifInstant => "lif_instant",
            NeuronModel::PifExpSynapse => "pif_exp_synapse",
            NeuronModel::LifExpSynapse => "lif_exp_synapse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaForm {
    /// Full efficacy right after the refractory period.
    #[default]
    Step,
    /// `1 - exp(-(t - R) / tau_kappa)` after the refractory period.
    ExpRecovery,
}

/// Synaptic efficacy as a function of the time since the receiver's last spike.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaSpec {
    pub form: KappaForm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_kappa: Option<f64>,
}

impl KappaSpec {
    /// `kappa(elapsed)` for a refractory period `r`; 0 up to and including `r`.
    pub fn value(&self, elapsed: f64, r: f64) -> f64 {
        if elapsed.is_infinite() && elapsed > 0.0 {
            return 1.0;
        }
        if !(elapsed > r) {
            return 0.0;
        }
        match self.form {
            KappaForm::Step => 1.0,
            KappaForm::ExpRecovery => -(-(elapsed - r) / self.tau_kappa.unwrap_or(1.0)).exp_m1(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronSpec {
    /// Optional explicit index; must equal the position in the list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<usize>,
    pub model: NeuronModel,
    /// Membrane time constant (leaky models).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Synaptic time constant (exponential-synapse models).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_s: Option<f64>,
    pub sigma: f64,
    pub theta: f64,
    pub v_reset: f64,
    /// Resting level of the leak (leaky models).
    #[serde(default)]
    pub rest_mu: f64,
    #[serde(default = "zero_input")]
    pub input: PiecewiseConstant,
    #[serde(default)]
    pub refractory: f64,
    #[serde(default)]
    pub kappa: KappaSpec,
    /// Membrane value at time 0; defaults to `v_reset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_init: Option<f64>,
    /// Synaptic current at time 0 (exponential-synapse models).
    #[serde(default)]
    pub i_init: f64,
}

fn zero_input() -> PiecewiseConstant {
    PiecewiseConstant::constant(0.0)
}

impl NeuronSpec {
    /// A neuron with the given model and the remaining fields at defaults
    /// (`sigma = 1`, `theta = 1`, `v_reset = 0`, no input).
    pub fn new(model: NeuronModel) -> Self {
        Self {
            id: None,
            model,
            tau: model.is_leaky().then_some(1.0),
            tau_s: model.has_exp_synapse().then_some(0.1),
            sigma: 1.0,
            theta: 1.0,
            v_reset: 0.0,
            rest_mu: 0.0,
            input: zero_input(),
            refractory: 0.0,
            kappa: KappaSpec::default(),
            v_init: None,
            i_init: 0.0,
        }
    }

    pub fn initial_voltage(&self) -> f64 {
        self.v_init.unwrap_or(self.v_reset)
    }

    /// Free membrane dynamics of instantaneous-synapse models.
    pub fn gauss_markov(&self) -> Option<GaussMarkovSpec> {
        match self.model {
            NeuronModel::PifInstant => Some(GaussMarkovSpec::brownian(self.sigma, self.input.clone())),
            NeuronModel::LifInstant => Some(GaussMarkovSpec::ornstein_uhlenbeck(
                self.tau.unwrap_or(1.0),
                self.sigma,
                self.rest_mu,
                self.input.clone(),
            )),
            _ => None,
        }
    }

    /// Kind of the two-dimensional dynamics of exponential-synapse models.
    pub fn exp_synapse_kind(&self) -> Option<ExpSynapseKind> {
        match self.model {
            NeuronModel::PifExpSynapse => Some(ExpSynapseKind::Perfect),
            NeuronModel::LifExpSynapse => Some(ExpSynapseKind::Leaky),
            _ => None,
        }
    }

    fn validate(&self, index: usize) -> Result<(), ModelError> {
        let path = |f: &str| format!("neurons[{index}].{f}");
        let finite = |f: &str, v: f64| if v.is_finite() { Ok(()) } else { Err(invalid(path(f), format!("must be finite, got {v}"))) };
        let positive = |f: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(path(f), format!("must be > 0, got {v}")))
            }
        };
        if let Some(id) = self.id {
            if id != index {
                return Err(invalid(path("id"), format!("must equal the neuron's position {index}, got {id}")));
            }
        }
        positive("sigma", self.sigma)?;
        finite("theta", self.theta)?;
        finite("v_reset", self.v_reset)?;
        finite("rest_mu", self.rest_mu)?;
        finite("i_init", self.i_init)?;
        if !(self.v_reset < self.theta) {
            return Err(invalid(path("v_reset"), format!("must be below theta = {}, got {}", self.theta, self.v_reset)));
        }
        if let Some(v) = self.v_init {
            finite("v_init", v)?;
            if !(v < self.theta) {
                return Err(invalid(path("v_init"), format!("must be below theta = {}, got {v}", self.theta)));
            }
        }
        match (self.model.is_leaky(), self.tau) {
            (true, Some(t)) => positive("tau", t)?,
            (true, None) => return Err(invalid(path("tau"), format!("required by model {}", self.model.name()))),
            (false, Some(_)) => return Err(invalid(path("tau"), format!("not used by model {}", self.model.name()))),
            (false, None) => {}
        }
        match (self.model.has_exp_synapse(), self.tau_s) {
            (true, Some(t)) => positive("tau_s", t)?,
            (true, None) => return Err(invalid(path("tau_s"), format!("required by model {}", self.model.name()))),
            (false, Some(_)) => return Err(invalid(path("tau_s"), format!("not used by model {}", self.model.name()))),
            (false, None) => {}
        }
        if !self.model.has_exp_synapse() && self.i_init != 0.0 {
            return Err(invalid(path("i_init"), format!("not used by model {}", self.model.name())));
        }
        if !self.model.is_leaky() && self.rest_mu != 0.0 {
            return Err(invalid(path("rest_mu"), format!("not used by model {}", self.model.name())));
        }
        if !(self.refractory >= 0.0 && self.refractory.is_finite()) {
            return Err(invalid(path("refractory"), format!("must be finite and >= 0, got {}", self.refractory)));
        }
        match (self.kappa.form, self.kappa.tau_kappa) {
            (KappaForm::ExpRecovery, Some(t)) => positive("kappa.tau_kappa", t)?,
            (KappaForm::ExpRecovery, None) => return Err(invalid(path("kappa.tau_kappa"), "required by exp_recovery")),
            (KappaForm::Step, Some(_)) => return Err(invalid(path("kappa.tau_kappa"), "not used by step")),
            (KappaForm::Step, None) => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynapseSpec {
    pub pre: usize,
    pub post: usize,
    /// Voltage jump (instantaneous models) or current jump (exponential
    /// synapses); negative is inhibitory.
    pub weight: f64,
    #[serde(default)]
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub format_version: u32,
    pub horizon: f64,
    pub neurons: Vec<NeuronSpec>,
    #[serde(default)]
    pub synapses: Vec<SynapseSpec>,
}

impl NetworkSpec {
    pub fn new(horizon: f64, neurons: Vec<NeuronSpec>, synapses: Vec<SynapseSpec>) -> Result<Self, ModelError> {
        let spec = Self { format_version: FORMAT_VERSION, horizon, neurons, synapses };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.format_version != FORMAT_VERSION {
            return Err(invalid(
                "format_version",
                format!("unsupported version {} (expected {FORMAT_VERSION})", self.format_version),
            ));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", format!("must be finite and > 0, got {}", self.horizon)));
        }
        if self.neurons.is_empty() {
            return Err(invalid("neurons", "at least one neuron is required"));
        }
        for (i, n) in self.neurons.iter().enumerate() {
            n.validate(i)?;
        }
        let count = self.neurons.len();
        for (k, s) in self.synapses.iter().enumerate() {
            let path = |f: &str| format!("synapses[{k}].{f}");
            if s.pre >= count {
                return Err(invalid(path("pre"), format!("no neuron {} (network has {count})", s.pre)));
            }
            if s.post >= count {
                return Err(invalid(path("post"), format!("no neuron {} (network has {count})", s.post)));
            }
            if !(s.weight.is_finite() && s.weight != 0.0) {
                return Err(invalid(path("weight"), format!("must be finite and nonzero, got {}", s.weight)));
            }
            if !(s.delay >= 0.0 && s.delay.is_finite()) {
                return Err(invalid(path("delay"), format!("must be finite and >= 0, got {}", s.delay)));
            }
            if s.pre == s.post && s.delay <= 0.0 {
                return Err(invalid(path("delay"), "self-connections need a positive delay"));
            }
            if s.delay > 0.0 && s.weight > 0.0 && self.neurons[s.post].refractory == 0.0 {
                return Err(invalid(
                    path("delay"),
                    format!(
                        "delayed excitation into neuron {} needs a positive refractory period (avalanche risk)",
                        s.post
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Depth of the firing-time history needed for delayed deliveries.
    pub fn history_depth(&self) -> usize {
        compute_m(self)
    }

    /// Canonical TOML text; parsing it gives back an equal spec.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("network specs always serialize")
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_toml().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Whether neuron `j` receives any excitatory synapse.
    pub fn receives_excitation(&self, j: usize) -> bool {
        self.synapses.iter().any(|s| s.post == j && s.weight > 0.0)
    }
}

/// Parses and validates a network document.
pub fn parse_network(text: &str) -> Result<NetworkSpec, ModelError> {
    let spec: NetworkSpec = toml::from_str(text).map_err(|e| ModelError::Syntax(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

/// `M = max floor(delay / R_post)` over delayed synapses whose receiver has a
/// positive refractory period; 0 without such synapses.
pub fn compute_m(spec: &NetworkSpec) -> usize {
    spec.synapses
        .iter()
        .filter_map(|s| {
            let r = spec.neurons[s.post].refractory;
            (s.delay > 0.0 && r > 0.0).then(|| (s.delay / r).floor() as usize)
        })
        .max()
        .unwrap_or(0)
}

//! Where an inhibitory delivery restarts the receiving neuron's passage.
//!
//! An inhibitory spike received `x_star` before the scheduled passage moves
//! the membrane at that passage time to `theta + shift`. The extra wait is the
//! first passage from there, so the new countdown is `x_star` plus that wait.

use crate::models::{NeuronModel, NeuronSpec};

use super::SimError;

/// Initial condition of the additional wait `tau_ij`.
///
/// The wait starts `offset` after the delivery (the old countdown) from
/// membrane value `start` and, for exponential-synapse models, current
/// `current`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostDeliveryLaw {
    pub offset: f64,
    pub start: f64,
    pub current: Option<f64>,
    pub theta: f64,
}

/// Start of the additional wait after an inhibitory delivery of effective
/// weight `w_eff < 0`, `x_star` before the scheduled passage. `i_s_star` is
/// the synaptic current at the scheduled passage (exponential-synapse models).
pub fn interaction_shift(
    neuron: &NeuronSpec,
    w_eff: f64,
    x_star: f64,
    i_s_star: Option<f64>,
) -> Result<PostDeliveryLaw, SimError> {
    if !(w_eff < 0.0) {
        return Err(SimError::WrongBranch(w_eff));
    }
    if !x_star.is_finite() || x_star < 0.0 {
        return Err(SimError::Precondition(format!("x_star must be finite and >= 0, got {x_star}")));
    }
    let tau = neuron.tau.unwrap_or(1.0);
    let tau_s = neuron.tau_s.unwrap_or(1.0);
    let (shift, current) = match neuron.model {
        NeuronModel::PifInstant => (w_eff, None),
        NeuronModel::LifInstant => (w_eff * (-x_star / tau).exp(), None),
        NeuronModel::PifExpSynapse | NeuronModel::LifExpSynapse => {
            let leak = if neuron.model.is_leaky() { 1.0 / tau } else { 0.0 };
            let carried = i_s_star.ok_or_else(|| {
                SimError::Precondition("exponential-synapse models need the current at the passage".into())
            })?;
            let decay = (-x_star / tau_s).exp();
            (w_eff * exp_response(leak, 1.0 / tau_s, x_star), Some(carried + w_eff * decay))
        }
    };
    Ok(PostDeliveryLaw { offset: x_star, start: neuron.theta + shift, current, theta: neuron.theta })
}

/// `e^{-r1 t} (1 - e^{-alpha t}) / alpha` with `alpha = r2 - r1`, and the
/// `alpha -> 0` limit `t e^{-r1 t}`.
pub(crate) fn exp_response(r1: f64, r2: f64, t: f64) -> f64 {
    let alpha = r2 - r1;
    let frac = if alpha == 0.0 { t } else { -(-alpha * t).exp_m1() / alpha };
    (-r1 * t).exp() * frac
}

/// First-order postsynaptic current kernel `alpha(s)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PspKernel {
    /// `alpha(s) = e^{-s / tau_s}`.
    Exponential { tau_s: f64 },
    /// Samples of `alpha` on an increasing grid starting at 0, linear in
    /// between and zero beyond the last point.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

/// Membrane shift `w e^{-x/tau} \int_0^x alpha(s) e^{s/tau} ds` at the
/// scheduled passage, `x_star` after a delivery of weight `w`. `tau = None`
/// is the perfect integrator.
pub fn psp_kernel_shift(kernel: &PspKernel, tau: Option<f64>, w: f64, x_star: f64) -> Result<f64, SimError> {
    if !(x_star >= 0.0) {
        return Err(SimError::Precondition(format!("x_star must be >= 0, got {x_star}")));
    }
    let leak = tau.map_or(0.0, |t| 1.0 / t);
    match kernel {
        PspKernel::Exponential { tau_s } => Ok(w * exp_response(leak, 1.0 / tau_s, x_star)),
        PspKernel::Tabulated { grid, values } => {
            if grid.len() != values.len() || grid.len() < 2 || grid[0] != 0.0 || grid.windows(2).any(|p| p[1] <= p[0]) {
                return Err(SimError::Precondition("kernel grid must start at 0 and increase".into()));
            }
            // Exact integral of the piecewise-linear kernel against e^{-leak (x - s)}.
            let weight = |s: f64| (-leak * (x_star - s)).exp();
            let mut total = 0.0;
            for k in 0..grid.len() - 1 {
                let (a, b) = (grid[k], grid[k + 1].min(x_star));
                if a >= b {
                    break;
                }
                let slope = (values[k + 1] - values[k]) / (grid[k + 1] - grid[k]);
                let (fa, fb) = (values[k], values[k] + slope * (b - a));
                // Simpson is exact enough on one cell with linear times exponential.
                let m = 0.5 * (a + b);
                total += (b - a) / 6.0 * (fa * weight(a) + 4.0 * 0.5 * (fa + fb) * weight(m) + fb * weight(b));
            }
            Ok(w * total)
        }
    }
}

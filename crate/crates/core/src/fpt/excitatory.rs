//! Two-step draw of the next passage after an instantaneous voltage jump.

use super::conditioned::sample_conditioned_value;
use super::{FirstPassageLaw, FptError, HitEvidence, Passage};
use crate::rng::SimRng;

/// What the receiving neuron knows at the moment the jump arrives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitatoryInputs {
    /// Last known membrane value and its absolute time.
    pub v_last: f64,
    pub t_last: f64,
    /// Absolute arrival time of the jump.
    pub t_star: f64,
    /// Passage evidence of the unperturbed process.
    pub evidence: HitEvidence,
    /// Voltage grid size for the conditioned density.
    pub grid_size: usize,
}

/// Draws the next passage time (relative to `t_star`) after an excitatory
/// jump `w > 0`: first the membrane value `u` at `t_star` from its
/// conditioned law, then the passage from `u + w`. A jump reaching the
/// barrier fires immediately.
pub fn excitatory_next_fpt(
    rng: &mut SimRng,
    law: &dyn FirstPassageLaw,
    cond: &ExcitatoryInputs,
    w: f64,
    horizon: f64,
) -> Result<Passage, FptError> {
    if !(w > 0.0) {
        return Err(FptError::Precondition(format!("excitatory weight must be > 0, got {w}")));
    }
    Ok(jump_next_fpt(rng, law, cond, w, horizon)?.0)
}

/// Two-step draw for a jump of either sign. Returns the passage relative to
/// `t_star` and the post-jump value `u + w`.
pub(crate) fn jump_next_fpt(
    rng: &mut SimRng,
    law: &dyn FirstPassageLaw,
    cond: &ExcitatoryInputs,
    w: f64,
    horizon: f64,
) -> Result<(Passage, f64), FptError> {
    let u = sample_conditioned_value(rng, law, cond.v_last, cond.t_last, cond.t_star, cond.evidence, cond.grid_size)?;
    let v = u + w;
    if v >= law.theta() {
        return Ok((Passage::At(0.0), v));
    }
    Ok((law.sample(rng, v, cond.t_star, horizon - cond.t_star), v))
}

//! Restarting the chain from a saved state.

use crate::rng::{derive_seed, stream_rng, SimRng};

use super::{CountdownState, Ensemble, Network, SimError, Snapshot, SpikeTrain};

const FRESH_LABEL: u64 = 0x5245_5354_4152_54;

/// Post-snapshot spikes of the same runs, continued in place and restarted
/// from their serialized snapshots with fresh randomness.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartEnsembles {
    pub t_snapshot: f64,
    pub continued: Ensemble,
    pub restarted: Ensemble,
}

/// Runs `runs` realizations up to `t_snapshot`, then continues each one to
/// `horizon` twice: with its own generator, and from its snapshot (after a
/// JSON round trip) with an independent generator. Under the Markov property
/// both ensembles have the same law.
pub fn markov_restart_check(
    network: &Network,
    seed: u64,
    runs: usize,
    t_snapshot: f64,
    horizon: f64,
) -> Result<RestartEnsembles, SimError> {
    if !(t_snapshot < horizon) || t_snapshot < 0.0 {
        return Err(SimError::Precondition(format!("need 0 <= t_snapshot < horizon, got {t_snapshot}")));
    }
    if runs == 0 {
        return Err(SimError::Precondition("runs must be >= 1".into()));
    }
    let digest = network.spec().digest();
    let prefix = |k: u64| -> Result<(CountdownState, SimRng), SimError> {
        let mut rng = stream_rng(seed, k);
        let mut state = network.initial_state(&mut rng, horizon)?;
        network.run_until(&mut state, &mut rng, t_snapshot, &mut SpikeTrain::new())?;
        state.t = t_snapshot;
        Ok((state, rng))
    };
    let n = network.len();
    let continued = Ensemble::build(runs, n, || (), |_, k, train| {
        let (mut state, mut rng) = prefix(k)?;
        network.run_until(&mut state, &mut rng, horizon, train)
    })?;
    let fresh = derive_seed(seed, FRESH_LABEL);
    let restarted = Ensemble::build(runs, n, || (), |_, k, train| {
        let (state, _) = prefix(k)?;
        let text = state.to_snapshot(&digest).to_json();
        let mut state = CountdownState::from_snapshot(&Snapshot::from_json(&text)?)?;
        network.run_until(&mut state, &mut stream_rng(fresh, k), horizon, train)
    })?;
    Ok(RestartEnsembles { t_snapshot, continued, restarted })
}

//! Many independent realizations.

use rayon::prelude::*;

use crate::rng::stream_rng;

use super::{Network, SimError, SpikeTrain};

/// Spike trains of many realizations in flat storage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ensemble {
    neurons: usize,
    /// Run `k` owns records `offsets[k]..offsets[k + 1]`.
    offsets: Vec<usize>,
    times: Vec<f64>,
    ids: Vec<u32>,
}

impl Ensemble {
    pub fn empty(neurons: usize) -> Self {
        Self { neurons, offsets: vec![0], times: Vec::new(), ids: Vec::new() }
    }

    pub fn from_trains<'a>(neurons: usize, trains: impl IntoIterator<Item = &'a SpikeTrain>) -> Self {
        let mut e = Self::empty(neurons);
        for t in trains {
            e.push_train(t);
        }
        e
    }

    pub fn push_train(&mut self, train: &SpikeTrain) {
        for &(t, i) in train.records() {
            self.times.push(t);
            self.ids.push(i as u32);
        }
        self.offsets.push(self.times.len());
    }

    fn append(&mut self, other: Ensemble) {
        let base = self.times.len();
        self.offsets.extend(other.offsets[1..].iter().map(|o| o + base));
        self.times.extend(other.times);
        self.ids.extend(other.ids);
    }

    pub fn neurons(&self) -> usize {
        self.neurons
    }

    pub fn runs(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn total_spikes(&self) -> usize {
        self.times.len()
    }

    /// Records of run `k`.
    pub fn spikes(&self, k: usize) -> impl Iterator<Item = (f64, usize)> + '_ {
        let r = self.offsets[k]..self.offsets[k + 1];
        self.times[r.clone()].iter().zip(&self.ids[r]).map(|(&t, &i)| (t, i as usize))
    }

    pub fn train(&self, k: usize) -> SpikeTrain {
        SpikeTrain::from_records(self.spikes(k).collect()).expect("ensemble runs are time-ordered")
    }

    /// All spike times of `neuron`, pooled over runs.
    pub fn spike_times(&self, neuron: usize) -> Vec<f64> {
        self.times.iter().zip(&self.ids).filter(|(_, &i)| i as usize == neuron).map(|(&t, _)| t).collect()
    }

    /// Per run, the first spike of `neuron` strictly after `after`; runs
    /// without one are skipped.
    pub fn first_spike_times(&self, neuron: usize, after: f64) -> Vec<f64> {
        (0..self.runs()).filter_map(|k| self.spikes(k).find(|&(t, i)| i == neuron && t > after).map(|s| s.0)).collect()
    }

    /// Spike count per neuron, pooled over runs.
    pub fn spike_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.neurons];
        for &i in &self.ids {
            c[i as usize] += 1;
        }
        c
    }

    /// Runs `run(scratch, k, train)` for `k = 0..runs` in parallel, with one
    /// scratch value per worker, and stores the trains in run order. The
    /// first failing run (lowest index) decides the error.
    pub(crate) fn build<S, E, I, F>(runs: usize, neurons: usize, init: I, run: F) -> Result<Self, E>
    where
        E: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, u64, &mut SpikeTrain) -> Result<(), E> + Sync + Send,
    {
        const CHUNK: usize = 64;
        let parts: Vec<Result<Ensemble, E>> = (0..runs.div_ceil(CHUNK))
            .into_par_iter()
            .map_init(
                || (init(), SpikeTrain::new()),
                |(scratch, train), c| {
                    let mut part = Ensemble::empty(neurons);
                    for k in c * CHUNK..runs.min((c + 1) * CHUNK) {
                        train.clear();
                        run(scratch, k as u64, train)?;
                        part.push_train(train);
                    }
                    Ok(part)
                },
            )
            .collect();
        let mut out = Ensemble::empty(neurons);
        for p in parts {
            out.append(p?);
        }
        Ok(out)
    }
}

/// `runs` realizations of `network` on `[0, horizon]`; realization `k`
/// draws from stream `k` of `seed`, so the result does not depend on the
/// number of worker threads.
pub fn simulate_ensemble(network: &Network, seed: u64, runs: usize, horizon: f64) -> Result<Ensemble, SimError> {
    if runs == 0 {
        return Err(SimError::Precondition("runs must be >= 1".into()));
    }
    let n = network.len();
    Ensemble::build(
        runs,
        n,
        || None,
        |state, k, train| {
            let mut rng = stream_rng(seed, k);
            let state = match state {
                Some(s) => {
                    network.reset_state(s, &mut rng, horizon)?;
                    s
                }
                None => state.insert(network.initial_state(&mut rng, horizon)?),
            };
            network.run_until(state, &mut rng, horizon, train)
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_storage_keeps_runs_apart() {
        let a = SpikeTrain::from_records(vec![(0.1, 0), (0.2, 1)]).unwrap();
        let b = SpikeTrain::new();
        let c = SpikeTrain::from_records(vec![(0.5, 1)]).unwrap();
        let e = Ensemble::from_trains(2, [&a, &b, &c]);
        assert_eq!(e.runs(), 3);
        assert_eq!(e.train(0), a);
        assert_eq!(e.train(1), b);
        assert_eq!(e.train(2), c);
        assert_eq!(e.spike_times(1), vec![0.2, 0.5]);
        assert_eq!(e.first_spike_times(1, 0.3), vec![0.5]);
        assert_eq!(e.spike_counts(), vec![1, 2]);
    }
}

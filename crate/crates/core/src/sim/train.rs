//! Spike records of one realization.

use std::fmt::Write as _;

use super::SimError;

/// Spikes of one realization in emission order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpikeTrain {
    records: Vec<(f64, usize)>,
}

impl SpikeTrain {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a train from records, which must be time-ordered.
    pub fn from_records(records: Vec<(f64, usize)>) -> Result<Self, SimError> {
        if records.windows(2).any(|p| !(p[0].0 <= p[1].0)) {
            return Err(SimError::Precondition("spike times must be nondecreasing".into()));
        }
        Ok(Self { records })
    }

    pub(crate) fn push(&mut self, t: f64, neuron: usize) {
        self.records.push((t, neuron));
    }

    pub(crate) fn clear(&mut self) {
        self.records.clear();
    }

    pub fn records(&self) -> &[(f64, usize)] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Spike times of one neuron.
    pub fn times_of(&self, neuron: usize) -> Vec<f64> {
        self.records.iter().filter(|r| r.1 == neuron).map(|r| r.0).collect()
    }

    /// First spike of `neuron` strictly after `t`.
    pub fn first_after(&self, neuron: usize, t: f64) -> Option<f64> {
        self.records.iter().find(|r| r.1 == neuron && r.0 > t).map(|r| r.0)
    }

    /// Inter-spike intervals of one neuron.
    pub fn isis(&self, neuron: usize) -> Vec<f64> {
        self.times_of(neuron).windows(2).map(|p| p[1] - p[0]).collect()
    }

    /// Checks time order and that every neuron's intervals are at least its
    /// refractory period.
    pub fn check_invariants(&self, refractory: &[f64]) -> Result<(), String> {
        let mut last = vec![f64::NEG_INFINITY; refractory.len()];
        let mut prev = f64::NEG_INFINITY;
        for &(t, i) in &self.records {
            if t < prev {
                return Err(format!("time {t} follows {prev}"));
            }
            prev = t;
            let r = *refractory.get(i).ok_or_else(|| format!("unknown neuron {i}"))?;
            // Relative slack for absolute times recomposed from sums.
            if t - last[i] < r - 1e-12 * t.abs().max(1.0) {
                return Err(format!("neuron {i} fired at {} and {t}, closer than {r}", last[i]));
            }
            last[i] = t;
        }
        Ok(())
    }

    /// CSV lines `time,neuron_id` under a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,neuron_id\n");
        for &(t, i) in &self.records {
            writeln!(out, "{t},{i}").expect("writing to a String");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, SimError> {
        let mut records = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with("time")) {
                continue;
            }
            let bad = || SimError::Precondition(format!("line {}: expected `time,neuron_id`", n + 1));
            let (t, i) = line.split_once(',').ok_or_else(bad)?;
            records.push((t.trim().parse().map_err(|_| bad())?, i.trim().parse().map_err(|_| bad())?));
        }
        Self::from_records(records)
    }
}

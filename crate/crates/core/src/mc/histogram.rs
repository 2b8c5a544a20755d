//! Per-neuron spike-time histograms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::McError;
use crate::sim::Ensemble;

/// Spike-time histograms on a common set of bins; each neuron's column holds
/// the fraction of its spikes in the window that fall in each bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// `fractions[neuron][bin]`.
    pub fractions: Vec<Vec<f64>>,
    /// Spikes counted per neuron.
    pub counts: Vec<usize>,
}

impl Histogram {
    /// CSV with columns `bin_start,bin_end,neuron_0,...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_start,bin_end");
        for j in 0..self.fractions.len() {
            write!(out, ",neuron_{j}").expect("writing to a String");
        }
        out.push('\n');
        for b in 0..self.edges.len() - 1 {
            write!(out, "{},{}", self.edges[b], self.edges[b + 1]).expect("writing to a String");
            for col in &self.fractions {
                write!(out, ",{}", col[b]).expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    /// Bin with the largest fraction for `neuron`.
    pub fn mode_bin(&self, neuron: usize) -> usize {
        let col = &self.fractions[neuron];
        (0..col.len()).fold(0, |best, b| if col[b] > col[best] { b } else { best })
    }
}

/// Histograms of all spike times of `ensemble` in `window = (start, end)`,
/// with bins of width `bin_width` (the last bin may be shorter).
pub fn histogram(ensemble: &Ensemble, bin_width: f64, window: (f64, f64)) -> Result<Histogram, McError> {
    if !(bin_width > 0.0) {
        return Err(McError::InvalidConfig(format!("bin width must be > 0, got {bin_width}")));
    }
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(McError::InvalidConfig(format!("empty window [{lo}, {hi}]")));
    }
    if ensemble.runs() == 0 || ensemble.total_spikes() == 0 {
        return Err(McError::EmptyEnsemble);
    }
    let bins = ((hi - lo) / bin_width).ceil() as usize;
    let edges: Vec<f64> = (0..=bins).map(|b| (lo + b as f64 * bin_width).min(hi)).collect();
    let mut fractions = vec![vec![0.0; bins]; ensemble.neurons()];
    let mut counts = vec![0; ensemble.neurons()];
    for j in 0..ensemble.neurons() {
        for t in ensemble.spike_times(j) {
            if t < lo || t > hi {
                continue;
            }
            let b = (((t - lo) / bin_width) as usize).min(bins - 1);
            fractions[j][b] += 1.0;
            counts[j] += 1;
        }
        if counts[j] > 0 {
            let total = counts[j] as f64;
            fractions[j].iter_mut().for_each(|f| *f /= total);
        }
    }
    Ok(Histogram { edges, fractions, counts })
}

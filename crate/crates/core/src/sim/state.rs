//! Chain state and its serialized snapshot.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use super::SimError;

/// A spike in flight from `pre` to `post`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendingDelivery {
    pub at: f64,
    pub pre: usize,
    pub post: usize,
    pub emission: f64,
    pub synapse: usize,
}

impl Eq for PendingDelivery {}

impl Ord for PendingDelivery {
    fn cmp(&self, other: &Self) -> Ordering {
        self.at
            .total_cmp(&other.at)
            .then(self.pre.cmp(&other.pre))
            .then(self.post.cmp(&other.post))
            .then(self.emission.total_cmp(&other.emission))
            .then(self.synapse.cmp(&other.synapse))
    }
}

impl PartialOrd for PendingDelivery {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// State of the countdown chain.
///
/// `next_fire[i]` is the absolute time of neuron `i`'s next spike absent new
/// input (`+inf` when it does not fire before the horizon); the countdown is
/// `next_fire[i] - t`. The anchor `(anchor_v, anchor_i, anchor_t)` is the last
/// known membrane state, used to condition deliveries on the membrane value;
/// `i_hit` is the synaptic current at the scheduled spike (exponential-synapse
/// models).
#[derive(Debug, Clone)]
pub struct CountdownState {
    pub t: f64,
    /// End of the simulated window; passages beyond it are `+inf`.
    pub horizon: f64,
    pub next_fire: Vec<f64>,
    pub anchor_v: Vec<f64>,
    pub anchor_i: Vec<f64>,
    pub anchor_t: Vec<f64>,
    pub i_hit: Vec<f64>,
    pub last_spike: Vec<f64>,
    /// `depth` most recent firing times per neuron, oldest first.
    pub history: Vec<f64>,
    pub depth: usize,
    pub(crate) pending: BinaryHeap<Reverse<PendingDelivery>>,
    /// Spikes at the current instant, for the avalanche guard.
    pub(crate) burst_time: f64,
    pub(crate) burst_count: usize,
}

impl CountdownState {
    pub(crate) fn empty(n: usize, depth: usize, fill: f64, horizon: f64) -> Self {
        Self {
            t: 0.0,
            horizon,
            next_fire: vec![f64::INFINITY; n],
            anchor_v: vec![0.0; n],
            anchor_i: vec![0.0; n],
            anchor_t: vec![0.0; n],
            i_hit: vec![0.0; n],
            last_spike: vec![f64::NEG_INFINITY; n],
            history: vec![fill; n * depth],
            depth,
            pending: BinaryHeap::new(),
            burst_time: f64::NAN,
            burst_count: 0,
        }
    }

    pub(crate) fn reset(&mut self, n: usize, depth: usize, fill: f64, horizon: f64) {
        self.t = 0.0;
        self.horizon = horizon;
        self.burst_time = f64::NAN;
        self.burst_count = 0;
        for v in [&mut self.next_fire, &mut self.anchor_v, &mut self.anchor_i, &mut self.anchor_t, &mut self.i_hit, &mut self.last_spike] {
            v.clear();
            v.resize(n, 0.0);
        }
        self.next_fire.fill(f64::INFINITY);
        self.last_spike.fill(f64::NEG_INFINITY);
        self.history.clear();
        self.history.resize(n * depth, fill);
        self.depth = depth;
        self.pending.clear();
    }

    pub fn len(&self) -> usize {
        self.next_fire.len()
    }

    pub fn is_empty(&self) -> bool {
        self.next_fire.is_empty()
    }

    /// Remaining times `X = next_fire - t`.
    pub fn countdown(&self) -> Vec<f64> {
        self.next_fire.iter().map(|&f| f - self.t).collect()
    }

    /// History row of neuron `i`.
    pub fn history_row(&self, i: usize) -> &[f64] {
        &self.history[i * self.depth..(i + 1) * self.depth]
    }

    /// Deliveries in flight, earliest first.
    pub fn pending(&self) -> Vec<PendingDelivery> {
        let mut v: Vec<_> = self.pending.iter().map(|r| r.0).collect();
        v.sort();
        v
    }

    pub(crate) fn record_spike(&mut self, i: usize, t: f64) {
        self.last_spike[i] = t;
        if self.depth > 0 {
            let row = &mut self.history[i * self.depth..(i + 1) * self.depth];
            row.rotate_left(1);
            row[self.depth - 1] = t;
        }
    }

    pub fn to_snapshot(&self, spec_digest: &str) -> Snapshot {
        let fin = |v: &[f64]| v.iter().map(|&x| x.is_finite().then_some(x)).collect();
        Snapshot {
            format_version: SNAPSHOT_VERSION,
            spec_digest: spec_digest.to_string(),
            t: self.t,
            horizon: self.horizon,
            next_fire: fin(&self.next_fire),
            anchor_v: self.anchor_v.clone(),
            anchor_i: self.anchor_i.clone(),
            anchor_t: self.anchor_t.clone(),
            i_hit: self.i_hit.clone(),
            last_spike: fin(&self.last_spike),
            depth: self.depth,
            history: fin(&self.history),
            pending: self.pending(),
        }
    }

    pub fn from_snapshot(s: &Snapshot) -> Result<Self, SimError> {
        if s.format_version != SNAPSHOT_VERSION {
            return Err(SimError::Snapshot(format!("unsupported version {}", s.format_version)));
        }
        let n = s.next_fire.len();
        let lens = [s.anchor_v.len(), s.anchor_i.len(), s.anchor_t.len(), s.i_hit.len(), s.last_spike.len()];
        if lens.iter().any(|&l| l != n) || s.history.len() != n * s.depth {
            return Err(SimError::Snapshot("per-neuron vectors disagree in length".into()));
        }
        let or = |v: &[Option<f64>], d: f64| v.iter().map(|x| x.unwrap_or(d)).collect();
        Ok(Self {
            t: s.t,
            horizon: s.horizon,
            next_fire: or(&s.next_fire, f64::INFINITY),
            anchor_v: s.anchor_v.clone(),
            anchor_i: s.anchor_i.clone(),
            anchor_t: s.anchor_t.clone(),
            i_hit: s.i_hit.clone(),
            last_spike: or(&s.last_spike, f64::NEG_INFINITY),
            history: or(&s.history, f64::NEG_INFINITY),
            depth: s.depth,
            pending: s.pending.iter().map(|&p| Reverse(p)).collect(),
            burst_time: f64::NAN,
            burst_count: 0,
        })
    }
}

pub const SNAPSHOT_VERSION: u32 = 1;

/// JSON-friendly form of [`CountdownState`]; infinite times are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format_version: u32,
    pub spec_digest: String,
    pub t: f64,
    pub horizon: f64,
    pub next_fire: Vec<Option<f64>>,
    pub anchor_v: Vec<f64>,
    pub anchor_i: Vec<f64>,
    pub anchor_t: Vec<f64>,
    pub i_hit: Vec<f64>,
    pub last_spike: Vec<Option<f64>>,
    pub depth: usize,
    pub history: Vec<Option<f64>>,
    pub pending: Vec<PendingDelivery>,
}

impl Snapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshots always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Snapshot(e.to_string()))
    }
}

//! Comparison and benchmark reports.

use serde::{Deserialize, Serialize};

use crate::mc::Histogram;

pub const REPORT_VERSION: u32 = 1;

/// Seeds of the three ensembles of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub event: u64,
    pub euler: u64,
    pub euler_gobet: u64,
}

/// Two-sample KS distances of one neuron's spike times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronKs {
    pub neuron: usize,
    pub event_vs_euler: f64,
    pub event_vs_euler_gobet: f64,
    pub euler_vs_euler_gobet: f64,
}

/// Wall-clock seconds per method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub event: f64,
    pub euler: f64,
    pub euler_gobet: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Machine {
    pub os: String,
    pub arch: String,
    pub threads: usize,
    pub crate_version: String,
}

impl Machine {
    pub fn current() -> Self {
        Self {
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            threads: rayon::current_num_threads(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Event-based versus Monte-Carlo comparison of one spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub format_version: u32,
    pub spec_digest: String,
    pub seeds: Seeds,
    pub runs: usize,
    pub dt: f64,
    pub window: (f64, f64),
    pub bin_width: f64,
    pub histograms: MethodHistograms,
    pub ks: Vec<NeuronKs>,
    pub timings: Timings,
    pub machine: Machine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodHistograms {
    pub event: Histogram,
    pub euler: Histogram,
    pub euler_gobet: Histogram,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Largest event-versus-EulerGobet distance over neurons.
    pub fn worst_event_vs_gobet(&self) -> f64 {
        self.ks.iter().map(|k| k.event_vs_euler_gobet).fold(0.0, f64::max)
    }
}

/// Timing comparison at matched run counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub format_version: u32,
    pub spec_digest: String,
    pub seeds: Seeds,
    pub runs: usize,
    pub dt: f64,
    pub timings: Timings,
    pub speedup_vs_euler: f64,
    pub speedup_vs_euler_gobet: f64,
    /// Largest per-neuron KS distance between event-based and EulerGobet spike times.
    pub ks_event_vs_euler_gobet: f64,
    /// Ratio stated in the source text (a gain of the order of 30).
    pub reference_stated_gain: f64,
    /// Ratio implied by the source timings, 716.68 s over 2.46 s.
    pub reference_timing_ratio: f64,
    pub machine: Machine,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// Plain-text table.
    pub fn table(&self) -> String {
        let t = &self.timings;
        format!(
            "method        seconds\n\
             event         {:.3}\n\
             euler         {:.3}\n\
             euler_gobet   {:.3}\n\
             speedup vs euler        {:.1}\n\
             speedup vs euler_gobet  {:.1}\n\
             ks event vs euler_gobet {:.4}\n\
             reference: stated gain {:.0}, timing ratio {:.1}\n",
            t.event,
            t.euler,
            t.euler_gobet,
            self.speedup_vs_euler,
            self.speedup_vs_euler_gobet,
            self.ks_event_vs_euler_gobet,
            self.reference_stated_gain,
            self.reference_timing_ratio,
        )
    }
}

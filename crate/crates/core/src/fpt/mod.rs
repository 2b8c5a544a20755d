//! First-passage-time laws of the membrane processes.
//!
//! Closed forms are used for drifted Brownian motion, a Volterra solver for
//! general Gauss–Markov processes, and path simulation for the two-dimensional
//! processes with exponentially filtered noise.

mod conditioned;
mod dip;
mod excitatory;
mod ig;
mod law;
mod process;
mod table;
mod volterra;

pub use conditioned::{conditioned_value_density, ConditionedValueDensity, HitEvidence};
pub use dip::{dip_fpt_mc, ExpSynapseKind, ExpSynapseProcess, JointPassage};
pub use excitatory::{excitatory_next_fpt, ExcitatoryInputs};
pub(crate) use excitatory::jump_next_fpt;
pub use ig::{ig_density, ig_sample, DriftedBmFptParams};
pub use law::{law_for, AtlasConfig, ClosedFormLaw, FirstPassageLaw, OuAtlas, VolterraLaw};
pub use process::{GaussMarkovSpec, PiecewiseConstant, ProcessKind};
pub use table::{table_sample, FptTable};
pub use volterra::{geometric_uniform_grid, volterra_fpt, volterra_on_grid};

use thiserror::Error;

/// Outcome of a first-passage draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Passage {
    /// Hit after this (relative) time.
    At(f64),
    /// No hit within the horizon, or no hit at all.
    Never,
}

impl Passage {
    pub fn time(self) -> Option<f64> {
        match self {
            Passage::At(t) => Some(t),
            Passage::Never => None,
        }
    }

    /// Hit time, with `Never` mapped to `+inf`.
    pub fn or_infinity(self) -> f64 {
        self.time().unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FptError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("Volterra solver diverged at t = {time}: density {value}")]
    SolverFailure { time: f64, value: f64 },
    #[error("conditioning is numerically impossible (log normalizer {log_norm})")]
    DegenerateConditioning { log_norm: f64 },
    #[error("invalid table: {0}")]
    InvalidTable(String),
}

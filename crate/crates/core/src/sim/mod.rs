//! The countdown Markov chain.
//!
//! The state holds, for every neuron, the absolute time of its next spike in
//! the absence of further input. The chain moves from event to event: the
//! earliest pending delivery or spike is processed, and only the countdowns
//! touched by it are redrawn from first-passage laws.

mod engine;
mod ensemble;
mod interaction;
pub(crate) mod network;
mod restart;
mod state;
mod train;

pub use engine::Event;
pub use ensemble::{simulate_ensemble, Ensemble};
pub use interaction::{interaction_shift, psp_kernel_shift, PostDeliveryLaw, PspKernel};
pub use network::{CompileConfig, Network};
pub use restart::{markov_restart_check, RestartEnsembles};
pub use state::{CountdownState, PendingDelivery, Snapshot, SNAPSHOT_VERSION};
pub use train::SpikeTrain;

use thiserror::Error;

use crate::fpt::FptError;
use crate::models::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fpt(#[from] FptError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("avalanche detected at t = {time}: {events} spikes at the same instant")]
    AvalancheDetected { time: f64, events: usize },
    #[error("interaction_shift handles inhibition only, got effective weight {0}")]
    WrongBranch(f64),
    #[error("invalid snapshot: {0}")]
    Snapshot(String),
}

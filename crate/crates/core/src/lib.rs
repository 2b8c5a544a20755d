//! Exact event-driven simulation of networks of noisy integrate-and-fire
//! neurons.
//!
//! Each neuron's next spike time is kept as a countdown; spikes, deliveries
//! and refractory periods update the countdowns by drawing from first-passage
//! laws of the membrane processes, so the membrane potentials themselves are
//! never integrated. Time-stepped Monte-Carlo simulators in [`mc`] serve as the
//! reference.

pub mod cli;
pub mod fpt;
pub mod mc;
pub mod models;
pub mod numeric;
pub mod rng;
pub mod sim;
pub mod stats;

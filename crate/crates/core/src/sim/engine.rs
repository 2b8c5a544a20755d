//! The event loop.

use std::cmp::Reverse;

use crate::fpt::{jump_next_fpt, ExcitatoryInputs, HitEvidence, Passage};
use crate::rng::SimRng;

use super::network::{CompiledNeuron, Dynamics, Network};
use super::{CountdownState, PendingDelivery, SimError, SpikeTrain};

/// Next transition of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Fire { neuron: usize, at: f64 },
    Delivery(PendingDelivery),
}

impl Event {
    pub fn at(&self) -> f64 {
        match self {
            Event::Fire { at, .. } => *at,
            Event::Delivery(d) => d.at,
        }
    }
}

impl Network {
    /// State at time 0 from the initial values of the spec.
    pub fn initial_state(&self, rng: &mut SimRng, horizon: f64) -> Result<CountdownState, SimError> {
        let mut state = CountdownState::empty(self.len(), self.depth, self.history_fill, horizon);
        self.reset_state(&mut state, rng, horizon)?;
        Ok(state)
    }

    /// State at time 0 from membrane values `v0` and synaptic currents `i0`
    /// (ignored by instantaneous-synapse models).
    pub fn init_state(&self, v0: &[f64], i0: &[f64], rng: &mut SimRng, horizon: f64) -> Result<CountdownState, SimError> {
        if v0.len() != self.len() || i0.len() != self.len() {
            return Err(SimError::Precondition(format!("expected {} initial values", self.len())));
        }
        let mut state = CountdownState::empty(self.len(), self.depth, self.history_fill, horizon);
        self.fill_initial(&mut state, v0.iter().copied(), i0.iter().copied(), rng)?;
        Ok(state)
    }

    /// Reinitializes `state` in place from the spec's initial values.
    pub(crate) fn reset_state(&self, state: &mut CountdownState, rng: &mut SimRng, horizon: f64) -> Result<(), SimError> {
        state.reset(self.len(), self.depth, self.history_fill, horizon);
        let v0 = self.spec.neurons.iter().map(|n| n.initial_voltage());
        let i0 = self.spec.neurons.iter().map(|n| n.i_init);
        self.fill_initial(state, v0, i0, rng)
    }

    fn fill_initial(
        &self,
        state: &mut CountdownState,
        v0: impl Iterator<Item = f64>,
        i0: impl Iterator<Item = f64>,
        rng: &mut SimRng,
    ) -> Result<(), SimError> {
        let horizon = state.horizon;
        for (j, (v, i)) in v0.zip(i0).enumerate() {
            let n = &self.neurons[j];
            if !(v < n.theta) {
                return Err(SimError::Precondition(format!("neuron {j}: initial value {v} is not below theta {}", n.theta)));
            }
            state.anchor_v[j] = v;
            state.anchor_i[j] = i;
            state.anchor_t[j] = 0.0;
            state.next_fire[j] = match &n.dynamics {
                Dynamics::Instant { law } => law.sample(rng, v, 0.0, horizon).or_infinity(),
                Dynamics::ExpSynapse { process } => {
                    let jp = process.sample_passage(rng, v, i, 0.0, n.theta, horizon);
                    state.i_hit[j] = jp.current;
                    jp.passage.or_infinity()
                }
            };
        }
        Ok(())
    }

    /// Earliest pending transition; `None` when the network is quiescent.
    /// Deliveries precede spikes at equal times; among spikes the lowest
    /// index goes first.
    pub fn next_event(&self, state: &CountdownState) -> Option<Event> {
        let mut fire: Option<(usize, f64)> = None;
        for (j, &t) in state.next_fire.iter().enumerate() {
            if t.is_finite() && fire.is_none_or(|(_, best)| t < best) {
                fire = Some((j, t));
            }
        }
        let delivery = state.pending.peek().map(|r| r.0);
        match (delivery, fire) {
            (Some(d), Some((_, t))) if d.at <= t => Some(Event::Delivery(d)),
            (_, Some((neuron, at))) => Some(Event::Fire { neuron, at }),
            (Some(d), None) => Some(Event::Delivery(d)),
            (None, None) => None,
        }
    }

    /// Processes the next event if it happens no later than `until`.
    pub fn step(
        &self,
        state: &mut CountdownState,
        rng: &mut SimRng,
        until: f64,
        train: &mut SpikeTrain,
    ) -> Result<Option<Event>, SimError> {
        let Some(event) = self.next_event(state) else { return Ok(None) };
        if event.at() > until {
            return Ok(None);
        }
        match event {
            Event::Fire { neuron, at } => self.fire(state, neuron, at, rng, train)?,
            Event::Delivery(d) => {
                state.pending.pop();
                self.deliver(state, d, rng)?;
            }
        }
        Ok(Some(event))
    }

    /// Runs all events up to `until`.
    pub fn run_until(
        &self,
        state: &mut CountdownState,
        rng: &mut SimRng,
        until: f64,
        train: &mut SpikeTrain,
    ) -> Result<(), SimError> {
        while self.step(state, rng, until, train)?.is_some() {}
        Ok(())
    }

    /// One realization on `[0, horizon]` from the spec's initial values.
    pub fn run(&self, rng: &mut SimRng, horizon: f64) -> Result<SpikeTrain, SimError> {
        let mut state = self.initial_state(rng, horizon)?;
        let mut train = SpikeTrain::new();
        self.run_until(&mut state, rng, horizon, &mut train)?;
        Ok(train)
    }

    /// Spike of neuron `i` at `t`: record it, schedule its deliveries and draw
    /// the next spike from the reset value after the refractory period.
    pub fn fire(
        &self,
        state: &mut CountdownState,
        i: usize,
        t: f64,
        rng: &mut SimRng,
        train: &mut SpikeTrain,
    ) -> Result<(), SimError> {
        if t == state.burst_time {
            state.burst_count += 1;
            if state.burst_count > 10 * self.len() {
                return Err(SimError::AvalancheDetected { time: t, events: state.burst_count });
            }
        } else {
            state.burst_time = t;
            state.burst_count = 1;
        }
        state.t = t;
        state.record_spike(i, t);
        train.push(t, i);
        for o in &self.outgoing[i] {
            state.pending.push(Reverse(PendingDelivery {
                at: t + o.delay,
                pre: i,
                post: o.post,
                emission: t,
                synapse: o.synapse,
            }));
        }
        let n = &self.neurons[i];
        let start = t + n.refractory;
        let max_wait = state.horizon - start;
        state.anchor_v[i] = n.v_reset;
        state.anchor_t[i] = start;
        state.next_fire[i] = match &n.dynamics {
            Dynamics::Instant { law } => {
                if max_wait < 0.0 {
                    f64::INFINITY
                } else {
                    start + law.sample(rng, n.v_reset, start, max_wait).or_infinity()
                }
            }
            Dynamics::ExpSynapse { process } => {
                let current = process.evolve_current(rng, state.i_hit[i], n.refractory);
                state.anchor_i[i] = current;
                if max_wait < 0.0 {
                    f64::INFINITY
                } else {
                    let jp = process.sample_passage(rng, n.v_reset, current, start, n.theta, max_wait);
                    state.i_hit[i] = jp.current;
                    start + jp.passage.or_infinity()
                }
            }
        };
        Ok(())
    }

    /// Arrival of a spike at its receiver.
    pub fn deliver(&self, state: &mut CountdownState, d: PendingDelivery, rng: &mut SimRng) -> Result<(), SimError> {
        let t = d.at;
        state.t = t;
        let j = d.post;
        let n = &self.neurons[j];
        let w = self.spec.synapses[d.synapse].weight * n.kappa.value(t - state.last_spike[j], n.refractory);
        if w == 0.0 {
            return Ok(());
        }
        if n.needs_voltage {
            self.deliver_through_value(state, j, n, w, t, rng)
        } else {
            self.deliver_inhibition(state, j, n, w, rng);
            Ok(())
        }
    }

    /// Inhibition onto a neuron without excitatory input: the scheduled
    /// passage is pushed back by an independent wait.
    fn deliver_inhibition(&self, state: &mut CountdownState, j: usize, n: &CompiledNeuron, w: f64, rng: &mut SimRng) {
        let old = state.next_fire[j];
        if !old.is_finite() {
            return;
        }
        let x_star = old - state.t;
        let max_wait = state.horizon - old;
        state.next_fire[j] = match &n.dynamics {
            Dynamics::Instant { law } => {
                let start = n.theta + w * law.process().decay_over(x_star);
                old + law.sample(rng, start, old, max_wait).or_infinity()
            }
            Dynamics::ExpSynapse { process } => {
                let start = n.theta + w * process.response(x_star);
                let current = state.i_hit[j] + w * (-x_star / process.tau_s).exp();
                let jp = process.sample_passage(rng, start, current, old, n.theta, max_wait);
                state.i_hit[j] = jp.current;
                old + jp.passage.or_infinity()
            }
        };
    }

    /// Delivery onto a neuron with excitatory input: draw the membrane state
    /// now given what is known about the unperturbed passage, apply the jump
    /// and draw the passage afresh.
    fn deliver_through_value(
        &self,
        state: &mut CountdownState,
        j: usize,
        n: &CompiledNeuron,
        w: f64,
        t: f64,
        rng: &mut SimRng,
    ) -> Result<(), SimError> {
        let old = state.next_fire[j];
        let horizon = state.horizon;
        match &n.dynamics {
            Dynamics::Instant { law } => {
                let evidence = if old.is_finite() { HitEvidence::At(old) } else { HitEvidence::NoHitBefore(horizon.max(t)) };
                let inputs = ExcitatoryInputs {
                    v_last: state.anchor_v[j],
                    t_last: state.anchor_t[j],
                    t_star: t,
                    evidence,
                    grid_size: self.grid_size,
                };
                let (passage, v) = jump_next_fpt(rng, law.as_ref(), &inputs, w, horizon)?;
                state.anchor_v[j] = v.min(n.theta);
                state.anchor_t[j] = t;
                state.next_fire[j] = match passage {
                    Passage::At(s) => t + s,
                    Passage::Never => f64::INFINITY,
                };
            }
            Dynamics::ExpSynapse { process } => {
                let end = old.is_finite().then(|| (old, state.i_hit[j]));
                let (v, i) =
                    process.sample_bridge(rng, state.anchor_v[j], state.anchor_i[j], state.anchor_t[j], t, end, n.theta);
                let i = i + w;
                let jp = process.sample_passage(rng, v, i, t, n.theta, horizon - t);
                state.anchor_v[j] = v;
                state.anchor_i[j] = i;
                state.anchor_t[j] = t;
                state.i_hit[j] = jp.current;
                state.next_fire[j] = t + jp.passage.or_infinity();
            }
        }
        Ok(())
    }
}

//! Countdown-chain laws checked against closed forms and Monte Carlo.

mod common;

use countdown::fpt::PiecewiseConstant;
use countdown::mc::{euler_run, McConfig, Scheme};
use countdown::models::{compute_m, parse_network, NetworkSpec, NeuronModel, NeuronSpec, SynapseSpec};
use countdown::rng::stream_rng;
use countdown::sim::{markov_restart_check, simulate_ensemble, Network, PendingDelivery, SpikeTrain};

use common::{ig_cdf, ks_one, ks_two, pif_pair, single_pif};

fn pif(sigma: f64, refractory: f64) -> NeuronSpec {
    let mut n = NeuronSpec::new(NeuronModel::PifInstant);
    n.sigma = sigma;
    n.refractory = refractory;
    n.input = PiecewiseConstant::constant(1.0);
    n
}

#[test]
fn initial_countdown_follows_inverse_gaussian() {
    let net = Network::compile(&single_pif(1.0, 50.0)).unwrap();
    let mut rng = stream_rng(1, 0);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| net.init_state(&[0.0], &[0.0], &mut rng, 50.0).unwrap().next_fire[0])
        .filter(|x| x.is_finite())
        .collect();
    let ks = ks_one(&xs, |t| ig_cdf(t, 1.0, 1.0, 1.0) / ig_cdf(50.0, 1.0, 1.0, 1.0));
    assert!(ks < 0.01, "{ks}");
}

#[test]
fn start_near_barrier_fires_at_once() {
    let net = Network::compile(&single_pif(1.0, 10.0)).unwrap();
    let mut rng = stream_rng(2, 0);
    let mut xs: Vec<f64> =
        (0..1001).map(|_| net.init_state(&[1.0 - 1e-6], &[0.0], &mut rng, 10.0).unwrap().next_fire[0]).collect();
    xs.sort_by(f64::total_cmp);
    assert!(xs[500] < 1e-6, "median {}", xs[500]);
}

#[test]
fn reset_law_is_offset_by_refractory_period() {
    let spec = NetworkSpec::new(60.0, vec![pif(1.0, 2.0)], vec![]).unwrap();
    let net = Network::compile(&spec).unwrap();
    let ens = simulate_ensemble(&net, 3, 1_000, 60.0).unwrap();
    let mut isis = Vec::new();
    for k in 0..ens.runs() {
        let t = ens.train(k).times_of(0);
        isis.extend(t.windows(2).filter(|w| w[0] < 40.0).map(|w| w[1] - w[0]));
    }
    assert!(isis.iter().all(|&x| x >= 2.0));
    let ks = ks_one(&isis, |t| ig_cdf(t - 2.0, 1.0, 1.0, 1.0));
    assert!(isis.len() > 5_000 && ks < 0.02, "n = {}, KS {ks}", isis.len());
}

#[test]
fn nearly_noiseless_neuron_fires_periodically() {
    let spec = NetworkSpec::new(10.5, vec![pif(1e-6, 0.0)], vec![]).unwrap();
    let train = Network::compile(&spec).unwrap().run(&mut stream_rng(4, 0), 10.5).unwrap();
    let times = train.times_of(0);
    assert_eq!(times.len(), 10);
    for (k, t) in times.iter().enumerate() {
        assert!((t - (k + 1) as f64).abs() < 1e-4, "spike {k} at {t}");
    }
}

/// An inhibitory spike `x_star` before the passage restarts it from
/// `theta - 0.2`, so the added wait is the passage of a distance 0.2.
#[test]
fn inhibitory_wait_is_inverse_gaussian() {
    let spec = NetworkSpec::new(
        100.0,
        vec![pif(1.0, 0.0), pif(1.0, 0.0)],
        vec![SynapseSpec { pre: 0, post: 1, weight: -0.2, delay: 0.0 }],
    )
    .unwrap();
    let net = Network::compile(&spec).unwrap();
    let mut rng = stream_rng(5, 0);
    let mut waits = Vec::new();
    let mut shifted_mean = 0.0;
    while waits.len() < 50_000 {
        let mut state = net.init_state(&[0.0, 0.0], &[0.0, 0.0], &mut rng, 100.0).unwrap();
        let old = state.next_fire[1];
        if !(old > 0.3 && old < 50.0) {
            continue;
        }
        let d = PendingDelivery { at: 0.3, pre: 0, post: 1, emission: 0.3, synapse: 0 };
        net.deliver(&mut state, d, &mut rng).unwrap();
        let new = state.next_fire[1];
        assert!(new >= old);
        shifted_mean += new - old;
        if new.is_finite() {
            waits.push(new - old);
        }
    }
    let ks = ks_one(&waits, |t| ig_cdf(t, 0.2, 1.0, 1.0));
    assert!(ks < 0.01, "{ks}");
    assert!(shifted_mean / waits.len() as f64 > 0.15);
}

#[test]
fn inhibition_delays_the_receiver() {
    let free = pif_pair(-1e-9, -1e-9, 1.0);
    let inhibited = pif_pair(-0.5, -1e-9, 1.0);
    let mean_first = |spec: &NetworkSpec| {
        let ens = simulate_ensemble(&Network::compile(spec).unwrap(), 6, 10_000, 4.0).unwrap();
        let t = ens.first_spike_times(1, 0.0);
        t.iter().sum::<f64>() / t.len() as f64
    };
    let (a, b) = (mean_first(&free), mean_first(&inhibited));
    assert!(b > a + 0.05, "free {a}, inhibited {b}");
}

#[test]
fn delivery_in_refractory_window_is_ignored() {
    let spec = NetworkSpec::new(
        20.0,
        vec![pif(1.0, 0.0), pif(1.0, 0.5)],
        vec![SynapseSpec { pre: 0, post: 1, weight: -0.4, delay: 0.0 }],
    )
    .unwrap();
    let net = Network::compile(&spec).unwrap();
    let mut rng = stream_rng(7, 0);
    let mut state = net.init_state(&[0.0, 0.0], &[0.0, 0.0], &mut rng, 20.0).unwrap();
    state.last_spike[1] = 1.0;
    state.next_fire[1] = 3.0;
    let d = PendingDelivery { at: 1.2, pre: 0, post: 1, emission: 1.2, synapse: 0 };
    net.deliver(&mut state, d, &mut rng).unwrap();
    assert_eq!(state.next_fire[1], 3.0);
}

fn delayed_ring(n: usize) -> NetworkSpec {
    let neurons = (0..n).map(|_| pif(0.5, 0.05)).collect();
    let synapses = (0..n)
        .flat_map(|i| {
            [
                SynapseSpec { pre: i, post: (i + 1) % n, weight: -0.1, delay: 0.23 },
                SynapseSpec { pre: i, post: (i + 2) % n, weight: 0.15, delay: 0.11 },
            ]
        })
        .collect();
    NetworkSpec::new(6.0, neurons, synapses).unwrap()
}

#[test]
fn pending_deliveries_stay_within_history_bound() {
    let spec = delayed_ring(4);
    let m = compute_m(&spec);
    assert_eq!(m, 4);
    let net = Network::compile(&spec).unwrap();
    let mut worst = 0;
    for k in 0..200 {
        let mut rng = stream_rng(8, k);
        let mut state = net.initial_state(&mut rng, spec.horizon).unwrap();
        let mut train = SpikeTrain::new();
        while net.step(&mut state, &mut rng, spec.horizon, &mut train).unwrap().is_some() {
            let mut per_synapse = vec![0; spec.synapses.len()];
            for d in state.pending() {
                per_synapse[d.synapse] += 1;
            }
            worst = worst.max(per_synapse.into_iter().max().unwrap());
        }
    }
    assert!(worst >= 1 && worst <= m + 1, "worst {worst}, M = {m}");
}

#[test]
fn relabeling_neurons_relabels_the_law() {
    let spec = parse_network(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../specs/fig2_asymmetric.toml")).unwrap())
        .unwrap();
    let mut swapped = spec.clone();
    swapped.neurons.swap(0, 1);
    for s in &mut swapped.synapses {
        (s.pre, s.post) = (1 - s.pre, 1 - s.post);
    }
    swapped.validate().unwrap();
    let a = simulate_ensemble(&Network::compile(&spec).unwrap(), 9, 20_000, 4.0).unwrap();
    let b = simulate_ensemble(&Network::compile(&swapped).unwrap(), 10, 20_000, 4.0).unwrap();
    for j in 0..2 {
        let ks = ks_two(&a.spike_times(j), &b.spike_times(1 - j));
        assert!(ks < 0.02, "neuron {j}: {ks}");
    }
}

#[test]
fn restart_at_time_zero_matches_fresh_runs() {
    let net = Network::compile(&pif_pair(-0.2, -0.2, 1.0)).unwrap();
    let r = markov_restart_check(&net, 11, 10_000, 0.0, 4.0).unwrap();
    for j in 0..2 {
        let ks = ks_two(&r.continued.spike_times(j), &r.restarted.spike_times(j));
        assert!(ks < 0.025, "neuron {j}: {ks}");
    }
}

fn leaky_network(model: NeuronModel) -> NetworkSpec {
    let neurons = (0..2)
        .map(|_| {
            let mut n = NeuronSpec::new(model);
            n.sigma = 0.3;
            n.input = PiecewiseConstant::constant(1.5);
            n.refractory = 0.02;
            n
        })
        .collect();
    let synapses = vec![
        SynapseSpec { pre: 0, post: 1, weight: -0.3, delay: 0.05 },
        SynapseSpec { pre: 1, post: 0, weight: 0.2, delay: 0.05 },
    ];
    NetworkSpec::new(3.0, neurons, synapses).unwrap()
}

#[test]
fn leaky_and_filtered_networks_match_monte_carlo() {
    for model in [NeuronModel::LifInstant, NeuronModel::PifExpSynapse, NeuronModel::LifExpSynapse] {
        let spec = leaky_network(model);
        let ev = simulate_ensemble(&Network::compile(&spec).unwrap(), 12, 5_000, 3.0).unwrap();
        let cfg = McConfig { dt: 1e-3, n_paths: 5_000, scheme: Scheme::EulerGobet, seed: 13 };
        let mc = euler_run(&spec, None, &cfg).unwrap();
        for j in 0..2 {
            let ks = ks_two(&ev.spike_times(j), &mc.spike_times(j));
            assert!(ks < 0.03, "{}: neuron {j}: {ks}", model.name());
        }
    }
}

#[test]
fn same_seed_same_ensemble() {
    let net = Network::compile(&delayed_ring(3)).unwrap();
    let a = simulate_ensemble(&net, 14, 50, 6.0).unwrap();
    let b = simulate_ensemble(&net, 14, 50, 6.0).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, simulate_ensemble(&net, 15, 50, 6.0).unwrap());
}

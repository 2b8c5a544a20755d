//! Monte-Carlo baseline checked against closed forms and self-convergence.

mod common;

use countdown::mc::{bridge_crossing_time, euler_run, gobet_crossing, McConfig, Scheme};
use countdown::models::NetworkSpec;
use countdown::rng::stream_rng;

use common::{ig_cdf, ks_one, ks_two, simpson, single_pif};

fn first_spikes(spec: &NetworkSpec, dt: f64, paths: usize, scheme: Scheme, seed: u64) -> Vec<f64> {
    let cfg = McConfig { dt, n_paths: paths, scheme, seed };
    euler_run(spec, None, &cfg).unwrap().first_spike_times(0, 0.0)
}

#[test]
fn fine_euler_matches_inverse_gaussian() {
    let spec = single_pif(1.0, 3.0);
    let xs = first_spikes(&spec, 1e-4, 100_000, Scheme::Euler, 1);
    let ks = ks_one(&xs, |t| ig_cdf(t, 1.0, 1.0, 1.0) / ig_cdf(3.0, 1.0, 1.0, 1.0));
    assert!(ks < 0.02, "{ks}");
}

#[test]
fn halving_the_step_shrinks_successive_distances() {
    let spec = single_pif(1.0, 3.0);
    let runs: Vec<Vec<f64>> =
        [0.04, 0.02, 0.01, 0.005].iter().enumerate().map(|(k, &dt)| first_spikes(&spec, dt, 200_000, Scheme::Euler, 10 + k as u64)).collect();
    let d: Vec<f64> = runs.windows(2).map(|w| ks_two(&w[0], &w[1])).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

#[test]
fn bridge_correction_beats_grid_detection() {
    let spec = single_pif(1.0, 3.0);
    let cdf = |t: f64| ig_cdf(t, 1.0, 1.0, 1.0) / ig_cdf(3.0, 1.0, 1.0, 1.0);
    let euler = ks_one(&first_spikes(&spec, 0.01, 50_000, Scheme::Euler, 2), cdf);
    let gobet = ks_one(&first_spikes(&spec, 0.01, 50_000, Scheme::EulerGobet, 3), cdf);
    assert!(gobet < 0.01 && gobet < euler / 2.0, "gobet {gobet}, euler {euler}");
}

#[test]
fn noiseless_limit_is_deterministic() {
    let spec = single_pif(1e-9, 3.0);
    let cfg = McConfig { dt: 1e-3, n_paths: 20, scheme: Scheme::Euler, seed: 4 };
    let ens = euler_run(&spec, Some(&[0.25]), &cfg).unwrap();
    for k in 0..20 {
        let t = ens.train(k).times_of(0);
        assert!((t[0] - 0.75).abs() <= 1e-3 + 1e-12, "{t:?}");
        assert!(t.windows(2).all(|w| (w[1] - w[0] - 1.0).abs() <= 1e-3 + 1e-12), "{t:?}");
    }
}

#[test]
fn crossing_frequency_follows_bridge_maximum() {
    let mut rng = stream_rng(5, 0);
    let (lo, hi, theta, sigma, dt) = (0.8, 0.9, 1.0, 1.0, 0.05);
    let n = 200_000;
    let hits = (0..n).filter(|_| gobet_crossing(&mut rng, lo, hi, theta, sigma, dt)).count();
    let want = (-2.0 * 0.2 * 0.1 / 0.05f64).exp();
    assert!((hits as f64 / n as f64 - want).abs() < 0.005);
    assert!(gobet_crossing(&mut rng, 0.5, 1.1, theta, sigma, dt));
}

/// Density of the first passage of a Brownian bridge from `x` to `y` over
/// `[0, h]` through `theta`, up to normalization.
fn bridge_passage_density(s: f64, x: f64, y: f64, theta: f64, sigma: f64, h: f64) -> f64 {
    if s <= 0.0 || s >= h {
        return 0.0;
    }
    let a = theta - x;
    let b = theta - y;
    let v = sigma * sigma;
    a / s.powf(1.5) * (-a * a / (2.0 * v * s)).exp() * (-b * b / (2.0 * v * (h - s))).exp() / (h - s).sqrt()
}

#[test]
fn crossing_time_follows_bridge_passage_density() {
    for (x, y) in [(0.9, 0.95), (0.7, 0.98), (0.9, 1.3)] {
        let (theta, sigma, h) = (1.0, 1.0, 0.02);
        let f = |s: f64| bridge_passage_density(s, x, y, theta, sigma, h);
        let norm = simpson(f, 0.0, h, 4000);
        let cdf = |t: f64| simpson(f, 0.0, t.clamp(0.0, h), 400) / norm;
        let mut rng = stream_rng(6, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| bridge_crossing_time(&mut rng, x, y, theta, sigma, h)).collect();
        assert!(xs.iter().all(|&t| (0.0..=h).contains(&t)));
        let ks = ks_one(&xs, cdf);
        assert!(ks < 0.015, "({x}, {y}): KS {ks}");
    }
}

#[test]
fn rejects_bad_configurations() {
    let spec = single_pif(1.0, 3.0);
    for (dt, n) in [(0.0, 10), (5.0, 10), (0.01, 0)] {
        let cfg = McConfig { dt, n_paths: n, scheme: Scheme::Euler, seed: 0 };
        assert!(euler_run(&spec, None, &cfg).is_err(), "dt = {dt}, n = {n}");
    }
}

//! Independent oracles shared by the integration tests. Nothing here calls
//! the samplers or solvers under test.
#![allow(dead_code)]

use std::f64::consts::PI;

use countdown::models::{parse_network, NetworkSpec};

pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// First-passage density of `x + mu t + sigma W` through a barrier `a` above.
pub fn ig_pdf(t: f64, a: f64, mu: f64, sigma: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    a / (sigma * (2.0 * PI * t * t * t).sqrt()) * (-(a - mu * t).powi(2) / (2.0 * sigma * sigma * t)).exp()
}

/// Its CDF (defective when `mu < 0`).
pub fn ig_cdf(t: f64, a: f64, mu: f64, sigma: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let s = sigma * t.sqrt();
    phi((mu * t - a) / s) + (2.0 * mu * a / (sigma * sigma)).exp() * phi(-(mu * t + a) / s)
}

/// Composite Simpson rule of `f` on `[a, b]` with `n` (even) cells.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Sup distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_one(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - k as f64 / n).abs()).max(((k + 1) as f64 / n - f).abs());
    }
    d
}

/// Two-sample KS by merging sorted samples, written independently of the
/// library's version.
pub fn ks_two(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let mut all: Vec<f64> = a.iter().chain(&b).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let ecdf = |s: &[f64], x: f64| s.partition_point(|&v| v <= x) as f64 / s.len() as f64;
    all.iter().map(|&x| (ecdf(&a, x) - ecdf(&b, x)).abs()).fold(0.0, f64::max)
}

pub fn pif_pair(w01: f64, w10: f64, theta1: f64) -> NetworkSpec {
    parse_network(&format!(
        r#"
format_version = 1
horizon = 4.0

[[neurons]]
model = "pif_instant"
sigma = 0.2
theta = 1.0
v_reset = 0.0
input = 1.0

[[neurons]]
model = "pif_instant"
sigma = 0.2
theta = {theta1:?}
v_reset = 0.0
input = 1.0

[[synapses]]
pre = 0
post = 1
weight = {w01:?}

[[synapses]]
pre = 1
post = 0
weight = {w10:?}
"#
    ))
    .expect("valid two-neuron spec")
}

/// Single PIF neuron with the given noise and a long horizon.
pub fn single_pif(sigma: f64, horizon: f64) -> NetworkSpec {
    parse_network(&format!(
        "format_version = 1\nhorizon = {horizon:?}\n[[neurons]]\nmodel = \"pif_instant\"\nsigma = {sigma:?}\ntheta = 1.0\nv_reset = 0.0\ninput = 1.0\n"
    ))
    .expect("valid single-neuron spec")
}

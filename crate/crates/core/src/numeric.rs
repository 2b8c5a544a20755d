//! Small numerical helpers shared by the samplers.

use std::f64::consts::{PI, SQRT_2};

pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Gaussian density of `x` with the given mean and variance.
pub fn gauss_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-0.5 * d * d / var).exp() / (2.0 * PI * var).sqrt()
}

/// Log of the Gaussian density.
pub fn gauss_log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * d * d / var - 0.5 * var.ln() - LN_SQRT_2PI
}

/// `exp(b) * Phi(-x)` without overflow when `b` is large and `Phi(-x)` tiny.
pub fn exp_times_upper_tail(b: f64, x: f64) -> f64 {
    if x < 5.0 {
        b.exp() * norm_cdf(-x)
    } else {
        // Phi(-x) = phi(x) * R(x), Mills ratio by continued fraction.
        (b - 0.5 * x * x - LN_SQRT_2PI).exp() * mills_ratio(x)
    }
}

fn mills_ratio(x: f64) -> f64 {
    // Lentz-free backward evaluation, accurate for x >= 5.
    let mut f = 0.0;
    for k in (1..=60).rev() {
        f = k as f64 / (x + f);
    }
    1.0 / (x + f)
}

/// Composite trapezoid over an arbitrary grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Draws an offset in `[0, h]` from the density that is linear between `w0`
/// at 0 and `w1` at `h`, given a uniform variate `u`.
pub(crate) fn sample_linear_cell(w0: f64, w1: f64, h: f64, u: f64) -> f64 {
    let slope = (w1 - w0) / h;
    let mass = 0.5 * (w0 + w1) * h;
    if mass <= 0.0 {
        return u * h;
    }
    let target = u * mass;
    if slope.abs() * h < 1e-9 * (w0 + w1).max(f64::MIN_POSITIVE) {
        return if w0 > 0.0 { (target / w0).min(h) } else { u * h };
    }
    // w0 x + slope x^2 / 2 = target, stable root.
    let disc = (w0 * w0 + 2.0 * slope * target).max(0.0);
    let x = 2.0 * target / (w0 + disc.sqrt());
    x.clamp(0.0, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_tail_matches_direct_evaluation() {
        for &(b, x) in &[(0.0, 1.0), (3.0, 4.9), (2.0, 5.1), (10.0, 7.0)] {
            let direct = (b as f64).exp() * norm_cdf(-x);
            let r = exp_times_upper_tail(b, x);
            assert!((r - direct).abs() <= 1e-12 * direct.max(1e-300) + 1e-300, "{b} {x} {r} {direct}");
        }
        // far tail, where the direct product underflows before scaling
        let r = exp_times_upper_tail(400.0, 30.0);
        assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn linear_cell_sampling_inverts_the_cdf() {
        let (w0, w1, h) = (1.0, 3.0, 0.5);
        for &u in &[0.0, 0.1, 0.5, 0.9, 1.0] {
            let x = sample_linear_cell(w0, w1, h, u);
            let cdf = (w0 * x + 0.5 * (w1 - w0) / h * x * x) / (0.5 * (w0 + w1) * h);
            assert!((cdf - u).abs() < 1e-12);
        }
    }
}

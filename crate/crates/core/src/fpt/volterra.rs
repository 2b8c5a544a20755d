//! Second-kind Volterra equation for Gauss–Markov first-passage densities.
//!
//! For a diffusion with drift `A1(x, t)`, state-independent variance `A2(t)`
//! and a constant barrier `theta`, the first-passage density `g` from
//! `(x0, t0)` solves
//!
//! ```text
//! g(t) = 2 psi(t | x0, t0) - 2 \int_{t0}^{t} g(s) psi(t | theta, s) ds
//! psi(t | y, s) = f(theta, t | y, s) * (A1(theta, t) + A2 (theta - M) / V) / 2
//! ```
//!
//! where `f` is the Gaussian transition density with mean `M` and variance
//! `V`. The `A1` term makes `psi(t | theta, s)` vanish as `s -> t`, so the
//! diagonal of the quadrature drops out and the scheme is explicit.

use super::{FptError, FptTable, GaussMarkovSpec, ProcessKind};
use crate::numeric::gauss_pdf;

/// Relative grid on `[0, horizon]`: starts at `finest`, grows geometrically by
/// `ratio` until the spacing reaches `step`, then stays uniform. With
/// `finest >= step` the grid is uniform with `horizon / step` cells (rounded up).
pub fn geometric_uniform_grid(horizon: f64, step: f64, finest: f64, ratio: f64) -> Vec<f64> {
    if finest >= step || ratio <= 1.0 {
        let n = (horizon / step - 1e-9).ceil().max(1.0) as usize;
        let h = horizon / n as f64;
        return (0..=n).map(|k| k as f64 * h).collect();
    }
    let mut grid = vec![0.0];
    let mut t = finest;
    while t < horizon - 0.5 * step {
        grid.push(t);
        t += (t * (ratio - 1.0)).clamp(finest, step);
    }
    grid.push(horizon);
    grid
}

struct Kernel<'a> {
    process: &'a GaussMarkovSpec,
    theta: f64,
    a2: f64,
    homogeneous: bool,
    target: f64,
}

impl<'a> Kernel<'a> {
    fn new(process: &'a GaussMarkovSpec, theta: f64) -> Self {
        let a2 = process.noise_scale().powi(2);
        let homogeneous = process.is_time_homogeneous();
        let target = process.rest_mu + process.input.values()[0];
        Self { process, theta, a2, homogeneous, target }
    }

    fn mean(&self, y: f64, s: f64, t: f64) -> f64 {
        if !self.homogeneous {
            return self.process.mean_after(y, s, t);
        }
        match self.process.kind {
            ProcessKind::Brownian => y + self.process.input.values()[0] * (t - s),
            ProcessKind::OrnsteinUhlenbeck => {
                self.target + (y - self.target) * (-(t - s) / self.process.tau).exp()
            }
        }
    }

    /// `psi(t | y, s)` for absolute times `s < t`.
    fn psi(&self, y: f64, s: f64, t: f64) -> f64 {
        let m = self.mean(y, s, t);
        let v = self.process.variance_over(t - s);
        let a1 = self.process.drift(self.theta, t);
        0.5 * gauss_pdf(self.theta, m, v) * (a1 + self.a2 * (self.theta - m) / v)
    }
}

/// Solves the Volterra equation for several start values at once on a
/// relative time grid starting at 0. Returns one density vector per start.
///
/// `limit` bounds `|g|`; exceeding it (or producing NaN) is reported as a
/// solver failure.
pub fn volterra_on_grid(
    process: &GaussMarkovSpec,
    starts: &[f64],
    theta: f64,
    t_start: f64,
    grid: &[f64],
    limit: f64,
) -> Result<Vec<Vec<f64>>, FptError> {
    process.validate()?;
    if let Some(&x0) = starts.iter().find(|&&x| !(x < theta)) {
        return Err(FptError::Precondition(format!("start {x0} must lie below the barrier {theta}")));
    }
    if grid.len() < 2 || grid[0] != 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(FptError::InvalidParams("grid must start at 0 and increase strictly".into()));
    }
    let n = grid.len();
    let ns = starts.len();
    let kernel = Kernel::new(process, theta);
    let weights: Vec<f64> = (0..n)
        .map(|j| if j == 0 || j + 1 >= n { 0.0 } else { 0.5 * (grid[j + 1] - grid[j - 1]) })
        .collect();

    // On a uniform grid with homogeneous dynamics the kernel depends only on the lag.
    let h = grid[1];
    let uniform = grid.iter().enumerate().all(|(k, &t)| (t - k as f64 * h).abs() <= 1e-9 * t.max(h));
    let lag_kernel: Option<Vec<f64>> = (uniform && kernel.homogeneous).then(|| {
        let mut lag = vec![0.0; n];
        for (d, slot) in lag.iter_mut().enumerate().skip(1) {
            *slot = kernel.psi(theta, t_start, t_start + d as f64 * h);
        }
        lag
    });

    // g[k * ns + s] holds the density of start s at grid[k]
    let mut g = vec![0.0; n * ns];
    let mut acc = vec![0.0; ns];
    for k in 1..n {
        let tk = t_start + grid[k];
        for (a, &x0) in acc.iter_mut().zip(starts) {
            *a = 2.0 * kernel.psi(x0, t_start, tk);
        }
        for j in 1..k {
            let kern = match &lag_kernel {
                Some(lag) => lag[k - j],
                None => kernel.psi(theta, t_start + grid[j], tk),
            };
            let c = 2.0 * kern * weights[j];
            if c == 0.0 {
                continue;
            }
            let row = &g[j * ns..(j + 1) * ns];
            for (a, gj) in acc.iter_mut().zip(row) {
                *a -= c * gj;
            }
        }
        for (s, &a) in acc.iter().enumerate() {
            if !(a.abs() <= limit) {
                return Err(FptError::SolverFailure { time: grid[k], value: a });
            }
            g[k * ns + s] = a;
        }
    }
    Ok((0..ns).map(|s| (0..n).map(|k| g[k * ns + s].max(0.0)).collect()).collect())
}

/// First-passage table of `process` from `(x0, t_start)` to `theta` on a
/// uniform grid of `grid_step` covering `[0, horizon]` (relative time).
pub fn volterra_fpt(
    process: &GaussMarkovSpec,
    x0: f64,
    theta: f64,
    t_start: f64,
    grid_step: f64,
    horizon: f64,
) -> Result<FptTable, FptError> {
    if !(x0 < theta) {
        return Err(FptError::Precondition(format!("x0 = {x0} must lie below theta = {theta}")));
    }
    if !(grid_step > 0.0 && horizon.is_finite() && horizon >= grid_step) {
        return Err(FptError::InvalidParams(format!(
            "need 0 < grid_step <= horizon, got grid_step = {grid_step}, horizon = {horizon}"
        )));
    }
    let grid = geometric_uniform_grid(horizon, grid_step, grid_step, 2.0);
    let density = volterra_on_grid(process, &[x0], theta, t_start, &grid, 1e6)?.remove(0);
    FptTable::from_density(grid, density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpt::{ig_density, DriftedBmFptParams, PiecewiseConstant};

    #[test]
    fn brownian_case_reproduces_inverse_gaussian() {
        let p = GaussMarkovSpec::brownian(1.0, PiecewiseConstant::constant(1.0));
        let table = volterra_fpt(&p, 0.0, 1.0, 0.0, 1e-3, 4.0).unwrap();
        let ig = DriftedBmFptParams::new(1.0, 1.0, 1.0).unwrap();
        for (&t, &d) in table.grid().iter().zip(table.density()).skip(1) {
            assert!((d - ig_density(t, &ig).unwrap()).abs() < 1e-3, "t = {t}");
        }
    }

    #[test]
    fn grid_variants_agree() {
        let p = GaussMarkovSpec::ornstein_uhlenbeck(1.0, 1.0, 0.0, PiecewiseConstant::constant(1.5));
        let coarse = volterra_fpt(&p, 0.0, 1.0, 0.0, 2e-3, 3.0).unwrap();
        let grid = geometric_uniform_grid(3.0, 2e-3, 1e-6, 1.2);
        let fine = volterra_on_grid(&p, &[0.0], 1.0, 0.0, &grid, 1e6).unwrap().remove(0);
        let fine = FptTable::from_density(grid, fine).unwrap();
        for t in [0.1, 0.5, 1.0, 2.0, 3.0] {
            assert!((coarse.cdf_at(t) - fine.cdf_at(t)).abs() < 1e-4, "t = {t}");
        }
    }

    #[test]
    fn rejects_start_at_barrier() {
        let p = GaussMarkovSpec::brownian(1.0, PiecewiseConstant::constant(1.0));
        assert!(matches!(volterra_fpt(&p, 1.0, 1.0, 0.0, 1e-3, 1.0), Err(FptError::Precondition(_))));
    }

    #[test]
    fn ou_density_is_time_shift_invariant() {
        let p = GaussMarkovSpec::ornstein_uhlenbeck(0.5, 0.8, 0.2, PiecewiseConstant::constant(0.9));
        let a = volterra_fpt(&p, 0.0, 1.0, 0.0, 1e-2, 2.0).unwrap();
        let b = volterra_fpt(&p, 0.0, 1.0, 7.5, 1e-2, 2.0).unwrap();
        for (x, y) in a.density().iter().zip(b.density()) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

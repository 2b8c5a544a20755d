//! First-passage laws from an arbitrary start state, as used by the simulator.

use std::fmt::Debug;
use std::sync::Arc;

use rand::Rng;

use super::{
    geometric_uniform_grid, ig_sample, volterra_on_grid, DriftedBmFptParams, FptError, FptTable,
    GaussMarkovSpec, Passage, ProcessKind,
};
use crate::rng::SimRng;

/// Law of the first passage of a membrane process through `theta`, started
/// from value `x` at absolute time `t0`. Times returned or queried are
/// relative to `t0`. Starts at or above `theta` pass immediately.
pub trait FirstPassageLaw: Send + Sync + Debug {
    fn process(&self) -> &GaussMarkovSpec;

    fn theta(&self) -> f64;

    /// Log density of passing at relative time `s > 0`.
    fn log_density(&self, x: f64, t0: f64, s: f64) -> f64;

    /// Log probability of no passage during `[0, s]`.
    fn log_survival(&self, x: f64, t0: f64, s: f64) -> f64;

    /// Draws a passage time; `Never` if it exceeds `max_wait`.
    fn sample(&self, rng: &mut SimRng, x: f64, t0: f64, max_wait: f64) -> Passage;

    fn log_density_many(&self, xs: &[f64], t0: f64, s: f64) -> Vec<f64> {
        xs.iter().map(|&x| self.log_density(x, t0, s)).collect()
    }

    fn log_survival_many(&self, xs: &[f64], t0: f64, s: f64) -> Vec<f64> {
        xs.iter().map(|&x| self.log_survival(x, t0, s)).collect()
    }
}

/// Brownian motion with constant input: inverse-Gaussian law, sampled exactly.
#[derive(Debug, Clone)]
pub struct ClosedFormLaw {
    process: GaussMarkovSpec,
    theta: f64,
    mu: f64,
}

impl ClosedFormLaw {
    pub fn new(process: GaussMarkovSpec, theta: f64) -> Result<Self, FptError> {
        process.validate()?;
        if process.kind != ProcessKind::Brownian || !process.input.is_constant() {
            return Err(FptError::InvalidParams("closed form needs Brownian dynamics with constant input".into()));
        }
        let mu = process.input.values()[0];
        Ok(Self { process, theta, mu })
    }

    /// Hitting-time parameters from start `x < theta`.
    pub fn params(&self, x: f64) -> DriftedBmFptParams {
        DriftedBmFptParams { a: self.theta - x, mu: self.mu, sigma: self.process.sigma }
    }
}

impl FirstPassageLaw for ClosedFormLaw {
    fn process(&self) -> &GaussMarkovSpec {
        &self.process
    }

    fn theta(&self) -> f64 {
        self.theta
    }

    fn log_density(&self, x: f64, _t0: f64, s: f64) -> f64 {
        if x >= self.theta {
            return f64::NEG_INFINITY;
        }
        self.params(x).log_density(s)
    }

    fn log_survival(&self, x: f64, _t0: f64, s: f64) -> f64 {
        if x >= self.theta {
            return f64::NEG_INFINITY;
        }
        self.params(x).survival(s).ln()
    }

    fn sample(&self, rng: &mut SimRng, x: f64, _t0: f64, max_wait: f64) -> Passage {
        if x >= self.theta {
            return Passage::At(0.0);
        }
        ig_sample(rng, &self.params(x), max_wait)
    }
}

/// Grid resolution used by the Volterra-based laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtlasConfig {
    /// Number of start nodes between the lower bound and the barrier.
    pub nodes: usize,
    /// Uniform time steps covering the horizon.
    pub steps: usize,
    /// Ratio of the geometric refinement near time 0.
    pub ratio: f64,
}

impl Default for AtlasConfig {
    fn default() -> Self {
        Self { nodes: 96, steps: 2048, ratio: 1.1 }
    }
}

/// Any Gauss–Markov process: each query solves the Volterra equation afresh
/// from the query's own start time.
#[derive(Debug, Clone)]
pub struct VolterraLaw {
    process: GaussMarkovSpec,
    theta: f64,
    steps: usize,
    ratio: f64,
}

impl VolterraLaw {
    pub fn new(process: GaussMarkovSpec, theta: f64, config: AtlasConfig) -> Result<Self, FptError> {
        process.validate()?;
        Ok(Self { process, theta, steps: config.steps.max(16), ratio: config.ratio })
    }

    fn grid(&self, span: f64, xs: &[f64]) -> Vec<f64> {
        let step = span / self.steps as f64;
        let gap = xs.iter().map(|&x| self.theta - x).fold(f64::INFINITY, f64::min);
        let scale = self.process.noise_scale();
        let finest = (gap * gap / (scale * scale) / 20.0).clamp(1e-12, step);
        geometric_uniform_grid(span, step, finest, self.ratio)
    }

    fn solve(&self, xs: &[f64], t0: f64, span: f64) -> Vec<FptTable> {
        let below: Vec<f64> = xs.iter().map(|&x| x.min(self.theta - 1e-12)).collect();
        let grid = self.grid(span, &below);
        match volterra_on_grid(&self.process, &below, self.theta, t0, &grid, 1e12) {
            Ok(dens) => dens
                .into_iter()
                .map(|d| FptTable::from_density(grid.clone(), d).expect("solver output is a valid table"))
                .collect(),
            Err(_) => {
                let zero = FptTable::from_density(grid.clone(), vec![0.0; grid.len()]).expect("valid grid");
                vec![zero; xs.len()]
            }
        }
    }

    /// Table of the passage law from `(x, t0)` over `[0, span]`.
    pub fn table(&self, x: f64, t0: f64, span: f64) -> Result<FptTable, FptError> {
        if !(x < self.theta) {
            return Err(FptError::Precondition(format!("start {x} must lie below theta = {}", self.theta)));
        }
        let grid = self.grid(span, &[x]);
        let d = volterra_on_grid(&self.process, &[x], self.theta, t0, &grid, 1e12)?.remove(0);
        FptTable::from_density(grid, d)
    }
}

impl FirstPassageLaw for VolterraLaw {
    fn process(&self) -> &GaussMarkovSpec {
        &self.process
    }

    fn theta(&self) -> f64 {
        self.theta
    }

    fn log_density(&self, x: f64, t0: f64, s: f64) -> f64 {
        self.log_density_many(&[x], t0, s)[0]
    }

    fn log_survival(&self, x: f64, t0: f64, s: f64) -> f64 {
        self.log_survival_many(&[x], t0, s)[0]
    }

    fn sample(&self, rng: &mut SimRng, x: f64, t0: f64, max_wait: f64) -> Passage {
        if x >= self.theta {
            return Passage::At(0.0);
        }
        if !(max_wait > 0.0) {
            return Passage::Never;
        }
        match self.table(x, t0, max_wait) {
            Ok(t) => t.sample(rng),
            Err(_) => Passage::Never,
        }
    }

    fn log_density_many(&self, xs: &[f64], t0: f64, s: f64) -> Vec<f64> {
        if !(s > 0.0) {
            return vec![f64::NEG_INFINITY; xs.len()];
        }
        self.solve(xs, t0, s)
            .iter()
            .zip(xs)
            .map(|(t, &x)| if x >= self.theta { f64::NEG_INFINITY } else { t.density_at(s).ln() })
            .collect()
    }

    fn log_survival_many(&self, xs: &[f64], t0: f64, s: f64) -> Vec<f64> {
        if !(s > 0.0) {
            return xs.iter().map(|&x| if x >= self.theta { f64::NEG_INFINITY } else { 0.0 }).collect();
        }
        self.solve(xs, t0, s)
            .iter()
            .zip(xs)
            .map(|(t, &x)| if x >= self.theta { f64::NEG_INFINITY } else { (1.0 - t.hit_mass()).max(0.0).ln() })
            .collect()
    }
}

/// Time-homogeneous Ornstein–Uhlenbeck process: passage tables precomputed on
/// a set of start nodes, interpolated linearly in the start value.
///
/// Between two nodes the law is the mixture of the node laws with linear
/// weights; above the highest node the upper neighbour is the barrier itself,
/// i.e. an immediate passage. Nodes accumulate quadratically toward the
/// barrier, where the law changes fastest. Starts below the lowest node fall
/// back to an exact Volterra solve.
#[derive(Debug, Clone)]
pub struct OuAtlas {
    process: GaussMarkovSpec,
    theta: f64,
    horizon: f64,
    nodes: Vec<f64>,
    tables: Vec<FptTable>,
    fallback: VolterraLaw,
}

impl OuAtlas {
    /// Builds tables for starts in `[lower, theta)` over relative times
    /// `[0, horizon]`. `exact` start values get their own nodes.
    pub fn build(
        process: GaussMarkovSpec,
        theta: f64,
        lower: f64,
        horizon: f64,
        exact: &[f64],
        config: AtlasConfig,
    ) -> Result<Self, FptError> {
        process.validate()?;
        if process.kind != ProcessKind::OrnsteinUhlenbeck || !process.is_time_homogeneous() {
            return Err(FptError::InvalidParams("atlas needs a time-homogeneous OU process".into()));
        }
        if !(lower < theta) || !(horizon > 0.0 && horizon.is_finite()) {
            return Err(FptError::InvalidParams(format!(
                "atlas needs lower < theta and a finite horizon, got lower = {lower}, theta = {theta}, horizon = {horizon}"
            )));
        }
        let k = config.nodes.max(2);
        let span = theta - lower;
        let mut nodes: Vec<f64> = (1..=k).map(|j| theta - span * (j as f64 / k as f64).powi(2)).collect();
        nodes.extend(exact.iter().copied().filter(|&x| x >= lower && x < theta));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * span);

        let gap = theta - nodes.last().copied().unwrap_or(lower);
        let scale = process.noise_scale();
        let step = horizon / config.steps.max(16) as f64;
        let finest = (gap * gap / (scale * scale) / 20.0).clamp(1e-12, step);
        let grid = geometric_uniform_grid(horizon, step, finest, config.ratio);
        let dens = volterra_on_grid(&process, &nodes, theta, 0.0, &grid, 1e12)?;
        let tables = dens
            .into_iter()
            .map(|d| FptTable::from_density(grid.clone(), d))
            .collect::<Result<Vec<_>, _>>()?;
        let fallback = VolterraLaw::new(process.clone(), theta, config)?;
        Ok(Self { process, theta, horizon, nodes, tables, fallback })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Lower node, its table, the upper node's table (`None` = barrier) and
    /// the interpolation weight of the upper node.
    fn bracket(&self, x: f64) -> Option<(&FptTable, Option<&FptTable>, f64)> {
        if x < self.nodes[0] {
            return None;
        }
        let i = self.nodes.partition_point(|&n| n <= x) - 1;
        let lo = self.nodes[i];
        match self.nodes.get(i + 1) {
            Some(&hi) => Some((&self.tables[i], Some(&self.tables[i + 1]), (x - lo) / (hi - lo))),
            None => Some((&self.tables[i], None, (x - lo) / (self.theta - lo))),
        }
    }
}

impl FirstPassageLaw for OuAtlas {
    fn process(&self) -> &GaussMarkovSpec {
        &self.process
    }

    fn theta(&self) -> f64 {
        self.theta
    }

    fn log_density(&self, x: f64, t0: f64, s: f64) -> f64 {
        if x >= self.theta || !(s > 0.0) {
            return f64::NEG_INFINITY;
        }
        if s > self.horizon {
            return self.fallback.log_density(x, t0, s);
        }
        match self.bracket(x) {
            Some((a, b, lam)) => {
                let db = b.map_or(0.0, |b| b.density_at(s));
                ((1.0 - lam) * a.density_at(s) + lam * db).ln()
            }
            None => self.fallback.log_density(x, t0, s),
        }
    }

    fn log_survival(&self, x: f64, t0: f64, s: f64) -> f64 {
        if x >= self.theta {
            return f64::NEG_INFINITY;
        }
        if s > self.horizon {
            return self.fallback.log_survival(x, t0, s);
        }
        match self.bracket(x) {
            Some((a, b, lam)) => {
                let sb = b.map_or(0.0, |b| 1.0 - b.cdf_at(s));
                ((1.0 - lam) * (1.0 - a.cdf_at(s)) + lam * sb).max(0.0).ln()
            }
            None => self.fallback.log_survival(x, t0, s),
        }
    }

    fn sample(&self, rng: &mut SimRng, x: f64, t0: f64, max_wait: f64) -> Passage {
        if x >= self.theta {
            return Passage::At(0.0);
        }
        if max_wait > self.horizon {
            return self.fallback.sample(rng, x, t0, max_wait);
        }
        let p = match self.bracket(x) {
            Some((a, b, lam)) => {
                let pick_upper = lam > 0.0 && rng.random::<f64>() < lam;
                match (pick_upper, b) {
                    (true, None) => Passage::At(0.0),
                    (true, Some(b)) => b.sample(rng),
                    (false, _) => a.sample(rng),
                }
            }
            None => return self.fallback.sample(rng, x, t0, max_wait),
        };
        match p {
            Passage::At(t) if t <= max_wait => p,
            _ => Passage::Never,
        }
    }
}

/// Picks the cheapest exact-or-tabulated law for a process.
///
/// `lower` bounds the starts expected from the model (used for the atlas),
/// `exact` lists start values that deserve their own atlas nodes.
pub fn law_for(
    process: &GaussMarkovSpec,
    theta: f64,
    horizon: f64,
    lower: f64,
    exact: &[f64],
    config: AtlasConfig,
) -> Result<Arc<dyn FirstPassageLaw>, FptError> {
    match process.kind {
        ProcessKind::Brownian if process.input.is_constant() => {
            Ok(Arc::new(ClosedFormLaw::new(process.clone(), theta)?))
        }
        ProcessKind::OrnsteinUhlenbeck if process.is_time_homogeneous() => {
            Ok(Arc::new(OuAtlas::build(process.clone(), theta, lower, horizon, exact, config)?))
        }
        _ => Ok(Arc::new(VolterraLaw::new(process.clone(), theta, config)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpt::PiecewiseConstant;
    use crate::rng::stream_rng;

    fn ou() -> GaussMarkovSpec {
        GaussMarkovSpec::ornstein_uhlenbeck(1.0, 1.0, 0.0, PiecewiseConstant::constant(1.5))
    }

    #[test]
    fn atlas_matches_direct_solve_at_nodes_and_between() {
        let cfg = AtlasConfig { nodes: 48, steps: 1024, ratio: 1.15 };
        let atlas = OuAtlas::build(ou(), 1.0, -3.0, 4.0, &[0.0], cfg).unwrap();
        let direct = VolterraLaw::new(ou(), 1.0, cfg).unwrap();
        for &x in &[0.0, -0.37, 0.61, 0.95] {
            for &s in &[0.2, 0.8, 2.0] {
                let a = atlas.log_density(x, 0.0, s).exp();
                let d = direct.log_density(x, 0.0, s).exp();
                assert!((a - d).abs() < 0.02 * d.max(0.05), "x={x} s={s}: {a} vs {d}");
                let sa = atlas.log_survival(x, 0.0, s).exp();
                let sd = direct.log_survival(x, 0.0, s).exp();
                assert!((sa - sd).abs() < 5e-3, "x={x} s={s}: {sa} vs {sd}");
            }
        }
    }

    #[test]
    fn atlas_samples_are_capped_and_immediate_at_barrier() {
        let atlas = OuAtlas::build(ou(), 1.0, -3.0, 2.0, &[], AtlasConfig { nodes: 16, steps: 256, ratio: 1.3 }).unwrap();
        let mut rng = stream_rng(3, 0);
        assert_eq!(atlas.sample(&mut rng, 1.0, 0.0, 1.0), Passage::At(0.0));
        for _ in 0..200 {
            if let Passage::At(t) = atlas.sample(&mut rng, 0.0, 0.0, 0.5) {
                assert!((0.0..=0.5).contains(&t));
            }
        }
    }

    #[test]
    fn law_selection() {
        let b = GaussMarkovSpec::brownian(1.0, PiecewiseConstant::constant(1.0));
        let law = law_for(&b, 1.0, 4.0, -2.0, &[], AtlasConfig::default()).unwrap();
        let p = DriftedBmFptParams::new(1.0, 1.0, 1.0).unwrap();
        assert!((law.log_density(0.0, 3.0, 0.7) - p.log_density(0.7)).abs() < 1e-12);
    }
}

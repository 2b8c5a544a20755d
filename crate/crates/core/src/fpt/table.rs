//! Tabulated (possibly defective) first-passage laws.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{FptError, Passage};
use crate::numeric::sample_linear_cell;

/// First-passage density and CDF on a time grid relative to the start time.
///
/// The CDF is the cumulative trapezoid of the density, so `cdf[k]` is exactly
/// the mass the interpolated density puts on `[0, grid[k]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FptTable {
    grid: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
    hit_mass: f64,
}

impl FptTable {
    /// Builds a table from nonnegative density values on a grid starting at 0.
    /// A total mass above 1 (discretization error) is scaled back to 1.
    pub fn from_density(grid: Vec<f64>, mut density: Vec<f64>) -> Result<Self, FptError> {
        if grid.len() < 2 || grid.len() != density.len() {
            return Err(FptError::InvalidTable("grid and density need equal length >= 2".into()));
        }
        if grid[0] != 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FptError::InvalidTable("grid must start at 0 and increase strictly".into()));
        }
        if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(FptError::InvalidTable("density must be finite and nonnegative".into()));
        }
        let mut cdf = cumulative_trapezoid(&grid, &density);
        let mut hit_mass = *cdf.last().unwrap();
        if hit_mass > 1.0 {
            let scale = 1.0 / hit_mass;
            density.iter_mut().for_each(|d| *d *= scale);
            cdf = cumulative_trapezoid(&grid, &density);
            hit_mass = *cdf.last().unwrap();
        }
        Ok(Self { grid, density, cdf, hit_mass })
    }

    /// A table with a uniform step.
    pub fn from_uniform(step: f64, density: Vec<f64>) -> Result<Self, FptError> {
        let grid = (0..density.len()).map(|k| k as f64 * step).collect();
        Self::from_density(grid, density)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn hit_mass(&self) -> f64 {
        self.hit_mass
    }

    pub fn horizon(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    fn cell(&self, t: f64) -> usize {
        (self.grid.partition_point(|&g| g <= t).max(1) - 1).min(self.grid.len() - 2)
    }

    /// Interpolated density at relative time `t`; 0 outside the grid.
    pub fn density_at(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.horizon() {
            return 0.0;
        }
        let k = self.cell(t);
        let (t0, t1) = (self.grid[k], self.grid[k + 1]);
        let f = (t - t0) / (t1 - t0);
        self.density[k] * (1.0 - f) + self.density[k + 1] * f
    }

    /// Mass on `[0, t]` under the piecewise-linear density.
    pub fn cdf_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.horizon() {
            return self.hit_mass;
        }
        let k = self.cell(t);
        let h = t - self.grid[k];
        let d = self.density_at(t);
        self.cdf[k] + 0.5 * h * (self.density[k] + d)
    }

    /// Inverse-CDF draw; `Never` with probability `1 - hit_mass`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Passage {
        let u: f64 = rng.random();
        self.quantile(u)
    }

    /// Time at which the CDF reaches `u`, or `Never` if `u >= hit_mass`.
    pub fn quantile(&self, u: f64) -> Passage {
        if !(u < self.hit_mass) {
            return Passage::Never;
        }
        let k = (self.cdf.partition_point(|&c| c <= u).max(1) - 1).min(self.grid.len() - 2);
        let cell_mass = self.cdf[k + 1] - self.cdf[k];
        let h = self.grid[k + 1] - self.grid[k];
        let frac = if cell_mass > 0.0 { ((u - self.cdf[k]) / cell_mass).clamp(0.0, 1.0) } else { 0.5 };
        Passage::At(self.grid[k] + sample_linear_cell(self.density[k], self.density[k + 1], h, frac))
    }

    /// CSV with columns `t,density,cdf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,density,cdf\n");
        for k in 0..self.grid.len() {
            let _ = writeln!(out, "{},{},{}", self.grid[k], self.density[k], self.cdf[k]);
        }
        out
    }

    /// Parses the CSV produced by [`FptTable::to_csv`]; the CDF is rebuilt from
    /// the density and checked against the stored column.
    pub fn from_csv(text: &str) -> Result<Self, FptError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("t,density,cdf") {
            return Err(FptError::InvalidTable("missing `t,density,cdf` header".into()));
        }
        let (mut grid, mut density, mut cdf) = (Vec::new(), Vec::new(), Vec::new());
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cols: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            match cols.as_deref() {
                Ok([t, d, c]) => {
                    grid.push(*t);
                    density.push(*d);
                    cdf.push(*c);
                }
                _ => return Err(FptError::InvalidTable(format!("bad row {}: {line}", n + 2))),
            }
        }
        let table = Self::from_density(grid, density)?;
        if table.cdf.iter().zip(&cdf).any(|(a, b)| (a - b).abs() > 1e-9) {
            return Err(FptError::InvalidTable("cdf column disagrees with the density".into()));
        }
        Ok(table)
    }
}

fn cumulative_trapezoid(grid: &[f64], density: &[f64]) -> Vec<f64> {
    let mut cdf = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    cdf.push(0.0);
    for k in 1..grid.len() {
        acc += 0.5 * (grid[k] - grid[k - 1]) * (density[k] + density[k - 1]);
        cdf.push(acc);
    }
    cdf
}

/// Inverse-CDF sampling from a table.
pub fn table_sample<R: Rng + ?Sized>(rng: &mut R, table: &FptTable) -> Passage {
    table.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::trapezoid;
    use crate::rng::stream_rng;

    fn uniform() -> FptTable {
        FptTable::from_uniform(1.0 / 64.0, vec![1.0; 65]).unwrap()
    }

    #[test]
    fn uniform_table_invariants() {
        let t = uniform();
        assert_eq!(t.cdf()[0], 0.0);
        assert!((t.hit_mass() - 1.0).abs() < 1e-12);
        assert!((trapezoid(t.grid(), t.density()) - t.hit_mass()).abs() < 1e-9);
        assert!((t.cdf_at(0.3) - 0.3).abs() < 1e-12);
        assert_eq!(t.quantile(0.25), Passage::At(0.25));
    }

    #[test]
    fn zero_mass_table_never_fires() {
        let t = FptTable::from_uniform(0.1, vec![0.0; 11]).unwrap();
        let mut rng = stream_rng(1, 0);
        assert!((0..100).all(|_| t.sample(&mut rng) == Passage::Never));
    }

    #[test]
    fn excess_mass_is_rescaled() {
        let t = FptTable::from_uniform(0.5, vec![3.0; 3]).unwrap();
        assert!((t.hit_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(FptTable::from_density(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(FptTable::from_density(vec![0.1, 1.0], vec![1.0, 1.0]).is_err());
        assert!(FptTable::from_density(vec![0.0, 1.0], vec![-1.0, 1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = FptTable::from_uniform(0.25, vec![0.0, 0.5, 1.0, 0.5, 0.25]).unwrap();
        let back = FptTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(t, back);
        assert!(FptTable::from_csv("x,y\n").is_err());
    }
}

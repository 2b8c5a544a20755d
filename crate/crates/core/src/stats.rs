//! Distribution comparison.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("sample {0} is empty")]
    EmptySample(char),
    #[error("sample contains NaN")]
    NotANumber,
}

/// Two-sample Kolmogorov–Smirnov statistic: the largest distance between the
/// empirical CDFs of `a` and `b`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() {
        return Err(StatsError::EmptySample('a'));
    }
    if b.is_empty() {
        return Err(StatsError::EmptySample('b'));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(StatsError::NotANumber);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        // Step past every copy of the smaller value before comparing.
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// One-sample Kolmogorov–Smirnov distance between `samples` and a CDF.
pub fn ks_against_cdf(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::EmptySample('a'));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(StatsError::NotANumber);
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    Ok(s.iter().enumerate().fold(0.0f64, |d, (k, &x)| {
        let f = cdf(x);
        d.max((f - k as f64 / n).abs()).max(((k + 1) as f64 / n - f).abs())
    }))
}

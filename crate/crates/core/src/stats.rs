//! Small statistics helpers for the harness.

use rand::Rng;

use crate::rng;

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// One-sided percentile-bootstrap lower bound for the mean of `values` at
/// the given confidence (e.g. 0.95 gives the 5th percentile of resampled
/// means). Resampling is driven by `seed`, so the bound is reproducible.
pub fn bootstrap_mean_lower_bound(
    values: &[f64],
    confidence: f64,
    resamples: usize,
    seed: u64,
) -> Option<f64> {
    if values.is_empty() || resamples == 0 {
        return None;
    }
    let mut r = rng::stream(seed, &[values.len() as u64]);
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[r.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let idx = (((1.0 - confidence) * resamples as f64).floor() as usize).min(resamples - 1);
    Some(means[idx])
}

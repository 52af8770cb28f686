//! One-sample Kolmogorov–Smirnov statistic.

use crate::error::{domain, Result};

/// Asymptotic critical value `c(α)` of the Kolmogorov distribution at
/// `α = 0.01`, i.e. `sqrt(-ln(α/2) / 2)`.
pub const KS_CRITICAL_0_01: f64 = 1.6276;

/// `c(0.01) / √n`.
pub fn ks_threshold(n: usize) -> f64 {
    KS_CRITICAL_0_01 / (n as f64).sqrt()
}

/// `D = max_i max(|i/N - F(x_i)|, |(i-1)/N - F(x_i)|)` over ascending samples.
pub fn ks_statistic<F>(samples: &[f64], model_cdf: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if samples.is_empty() {
        return Err(domain("KS statistic needs at least one sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(domain("KS samples contain NaN"));
    }
    if samples.windows(2).any(|w| w[0] > w[1]) {
        return Err(domain("KS samples must be sorted ascending"));
    }
    let n = samples.len() as f64;
    let d = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = model_cdf(x);
            let above = ((i + 1) as f64 / n - f).abs();
            let below = (i as f64 / n - f).abs();
            above.max(below)
        })
        .fold(0.0, f64::max);
    Ok(d)
}

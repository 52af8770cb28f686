//! Confidence intervals from the dual distributions.
//!
//! For a Poisson count `n̂` an interval `(μ1, μ2)` at level `L` satisfies
//! `P(i <= n̂ | μ1) - P(i <= n̂ | μ2) = L`, which is the same statement as
//! "the dual Gamma `Γ(1, n̂+1)` puts mass `L` between `μ1` and `μ2`". That
//! condition leaves one degree of freedom; [`Policy`] picks it.
//!
//! For a Normal observation `x̂` with known `σ` the mean is `N(x̂, σ)`
//! distributed, and intervals are its quantiles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::distributions::{poisson_cdf_at, GammaModel};
use crate::error::{domain, Error, Result};
use crate::special::{
    gamma_density, gamma_quantile, inc_gamma_pair, std_normal_cdf, std_normal_quantile, ToleranceConfig,
};

/// How the free end of an interval is pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Equal probability `α/2` left out on each side.
    #[default]
    Central,
    /// Minimal width for the requested mass.
    Shortest,
    /// One-sided: `(lower support, q_L)`.
    UpperLimit,
    /// One-sided: `(q_α, +∞)`.
    LowerLimit,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::Central, Policy::Shortest, Policy::UpperLimit, Policy::LowerLimit];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Central => "central",
            Policy::Shortest => "shortest",
            Policy::UpperLimit => "upper_limit",
            Policy::LowerLimit => "lower_limit",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central" => Ok(Policy::Central),
            "shortest" => Ok(Policy::Shortest),
            "upper_limit" | "upper-limit" | "upper" => Ok(Policy::UpperLimit),
            "lower_limit" | "lower-limit" | "lower" => Ok(Policy::LowerLimit),
            other => Err(domain(format!("unknown interval policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    #[serde(with = "extended_real")]
    pub lower: f64,
    #[serde(with = "extended_real")]
    pub upper: f64,
    pub level: f64,
    pub policy: Policy,
    /// Mass actually enclosed, recomputed from the cdfs after construction.
    pub achieved: f64,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.lower && value <= self.upper
    }

    /// `lower <= other.lower` and `other.upper <= upper`.
    pub fn encloses(&self, other: &ConfidenceInterval) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }
}

/// Serde helper writing infinities as the tokens `"inf"` / `"-inf"`.
pub mod extended_real {
    use super::*;

    pub fn to_token(value: f64) -> Option<&'static str> {
        if value == f64::INFINITY {
            Some("inf")
        } else if value == f64::NEG_INFINITY {
            Some("-inf")
        } else {
            None
        }
    }

    pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match to_token(*value) {
            Some(token) => serializer.serialize_str(token),
            None => serializer.serialize_f64(*value),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Token(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => Ok(v),
            Repr::Token(t) => match t.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" | "−inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("expected a number or inf token, got '{other}'"))),
            },
        }
    }
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    Ok(())
}

/// Interval for the Poisson rate after observing `n_hat` events.
///
/// `Shortest` solves for equal dual-Gamma density at both ends; for
/// `n_hat = 0` the density peaks at zero, so the lower end is pinned there
/// and the interval coincides with `UpperLimit`.
pub fn poisson_interval(n_hat: u64, level: f64, policy: Policy) -> Result<ConfidenceInterval> {
    check_level(level)?;
    let shape = n_hat as f64 + 1.0;
    let alpha = 1.0 - level;
    let (lower, upper) = match policy {
        Policy::Central => (gamma_quantile(shape, 0.5 * alpha)?, gamma_quantile(shape, 1.0 - 0.5 * alpha)?),
        Policy::UpperLimit => (0.0, gamma_quantile(shape, level)?),
        Policy::LowerLimit => (gamma_quantile(shape, alpha)?, f64::INFINITY),
        Policy::Shortest if n_hat == 0 => (0.0, gamma_quantile(shape, level)?),
        Policy::Shortest => shortest_gamma_interval(n_hat, level)?,
    };
    let achieved = poisson_cdf_at(n_hat, lower) - poisson_cdf_at(n_hat, upper);
    Ok(ConfidenceInterval { lower, upper, level, policy, achieved })
}

/// Equal-density endpoints of the dual Gamma for `n_hat >= 1`.
///
/// For a lower end `μ1` the upper end is fixed by the mass condition,
/// `μ2 = Q⁻¹(P(μ1) + level)`. The width has derivative
/// `g(μ1)/g(μ2) - 1`, negative at `μ1 = 0` and non-negative at the mode, so
/// bisection on the sign of `ln g(μ1) - ln g(μ2)` over `[0, n_hat]` finds the
/// unique minimum.
fn shortest_gamma_interval(n_hat: u64, level: f64) -> Result<(f64, f64)> {
    let shape = n_hat as f64 + 1.0;
    let max_iter = ToleranceConfig::default().max_iter;
    let upper_for = |mu1: f64| -> Result<f64> {
        let target = inc_gamma_pair(shape, mu1, max_iter)?.0 + level;
        if target >= 1.0 {
            Ok(f64::INFINITY)
        } else {
            gamma_quantile(shape, target)
        }
    };
    let log_density = |mu: f64| {
        if mu.is_infinite() {
            f64::NEG_INFINITY
        } else {
            gamma_density(shape, mu).ln()
        }
    };

    let mut lo = 0.0;
    let mut hi = n_hat as f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let slope = log_density(mid) - log_density(upper_for(mid)?);
        if slope < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lower = 0.5 * (lo + hi);
    let upper = upper_for(lower)?;
    if !upper.is_finite() {
        return Err(Error::Numeric(format!("shortest interval search failed for n_hat={n_hat}, level={level}")));
    }
    Ok((lower, upper))
}

/// `[P(i <= n̂ | μ1) - P(i <= n̂ | μ2)] - level` for any interval with
/// `0 <= lower <= upper`; an infinite upper end contributes the limit 0.
pub fn interval_mass_residual(interval: &ConfidenceInterval, n_hat: u64) -> Result<f64> {
    let (lo, hi) = (interval.lower, interval.upper);
    if !(lo >= 0.0) || hi.is_nan() || lo.is_infinite() {
        return Err(domain(format!("Poisson interval needs 0 <= lower < inf, got {lo}")));
    }
    if hi < lo {
        return Err(domain(format!("interval bounds out of order: ({lo}, {hi})")));
    }
    Ok(poisson_cdf_at(n_hat, lo) - poisson_cdf_at(n_hat, hi) - interval.level)
}

/// Law of the Poisson rate given `n_hat` observed events, `Γ(1, n_hat + 1)`:
/// mean and variance `n_hat + 1`, mode `n_hat`.
pub fn parameter_error_distribution(n_hat: u64) -> GammaModel {
    GammaModel::dual_of_count(n_hat)
}

/// Interval for the Normal mean after observing `x_hat` with known `sigma`.
/// `Central` and `Shortest` coincide by symmetry.
pub fn normal_interval(x_hat: f64, sigma: f64, level: f64, policy: Policy) -> Result<ConfidenceInterval> {
    check_level(level)?;
    if !x_hat.is_finite() {
        return Err(domain(format!("observed value must be finite, got {x_hat}")));
    }
    if !(sigma > 0.0) || sigma.is_infinite() {
        return Err(domain(format!("sigma must be finite and > 0, got {sigma}")));
    }
    let (lower, upper) = match policy {
        Policy::Central | Policy::Shortest => {
            let half = std_normal_quantile(0.5 * (1.0 + level))? * sigma;
            (x_hat - half, x_hat + half)
        }
        Policy::UpperLimit => (f64::NEG_INFINITY, x_hat + std_normal_quantile(level)? * sigma),
        Policy::LowerLimit => (x_hat - std_normal_quantile(level)? * sigma, f64::INFINITY),
    };
    let achieved = std_normal_cdf((upper - x_hat) / sigma) - std_normal_cdf((lower - x_hat) / sigma);
    Ok(ConfidenceInterval { lower, upper, level, policy, achieved })
}

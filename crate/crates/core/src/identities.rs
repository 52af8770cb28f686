//! Residual evaluators for the duality identities.
//!
//! Each evaluator returns an [`IdentityReport`] holding every summand and the
//! signed residual `Σ terms - rhs`. A residual at rounding level is the
//! machine-checkable form of the duality statement.
//!
//! Integrals of Gamma and Normal densities are cdf differences, so a reversed
//! interval yields a negative term. Infinite Poisson tails are cdf
//! complements, never truncated sums.

use std::fmt;

use rand::Rng;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::distributions::{
    dual_gamma_cdf, poisson_cdf_at, poisson_sf_at, NegBinomialModel, NormalModel, PoissonModel,
};
use crate::error::{domain, Result};
use crate::special::reg_inc_beta;
use crate::stream::worker_stream;

/// Which identity a report checks. The serialized tokens are part of the
/// JSON interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentityId {
    /// Poisson sums against dual Gamma integrals for two counts `n < m`.
    #[serde(rename = "EQ5")]
    PoissonGammaExchange,
    /// Normal integral in the mean equals the integral in the observable.
    #[serde(rename = "EQ8")]
    NormalSelfDual,
    /// Beta cdf equals the negative binomial cdf.
    #[serde(rename = "EQ11")]
    NegBinomialBeta,
    /// Poisson upper tail, dual Gamma mass and Poisson head sum to one.
    #[serde(rename = "EQ12")]
    PoissonCoverage,
    /// Left tail, dual mass and right tail of one Normal sum to one.
    #[serde(rename = "EQ17")]
    NormalPartition,
    /// Shifted Normal tails plus the dual mass sum to one.
    #[serde(rename = "EQ18")]
    NormalShiftedPartition,
}

impl IdentityId {
    pub const ALL: [IdentityId; 6] = [
        IdentityId::PoissonGammaExchange,
        IdentityId::NormalSelfDual,
        IdentityId::NegBinomialBeta,
        IdentityId::PoissonCoverage,
        IdentityId::NormalPartition,
        IdentityId::NormalShiftedPartition,
    ];

    /// Stated right-hand side of the identity.
    pub fn rhs(self) -> f64 {
        match self {
            IdentityId::PoissonGammaExchange | IdentityId::NormalSelfDual | IdentityId::NegBinomialBeta => 0.0,
            IdentityId::PoissonCoverage | IdentityId::NormalPartition | IdentityId::NormalShiftedPartition => 1.0,
        }
    }

    /// Wire token, e.g. `"EQ12"`.
    pub fn token(self) -> &'static str {
        match self {
            IdentityId::PoissonGammaExchange => "EQ5",
            IdentityId::NormalSelfDual => "EQ8",
            IdentityId::NegBinomialBeta => "EQ11",
            IdentityId::PoissonCoverage => "EQ12",
            IdentityId::NormalPartition => "EQ17",
            IdentityId::NormalShiftedPartition => "EQ18",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Ordered list of named numbers, serialized as a flat JSON object.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labeled(pub Vec<(String, f64)>);

impl Labeled {
    fn from_pairs(pairs: &[(&str, f64)]) -> Self {
        Labeled(pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect())
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.0.iter().find(|(k, _)| k == label).map(|&(_, v)| v)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|&(_, v)| v)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut (String, f64)> {
        self.0.iter_mut()
    }
}

impl Serialize for Labeled {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Labeled {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct LabeledVisitor;

        impl<'de> Visitor<'de> for LabeledVisitor {
            type Value = Labeled;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map of labels to numbers")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Labeled, A::Error> {
                let mut pairs = Vec::with_capacity(access.size_hint().unwrap_or(0));
                while let Some((k, v)) = access.next_entry::<String, f64>()? {
                    pairs.push((k, v));
                }
                Ok(Labeled(pairs))
            }
        }

        deserializer.deserialize_map(LabeledVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity_id: IdentityId,
    pub inputs: Labeled,
    pub terms: Labeled,
    pub residual: f64,
}

impl IdentityReport {
    fn new(identity_id: IdentityId, inputs: &[(&str, f64)], terms: &[(&str, f64)]) -> Self {
        let terms = Labeled::from_pairs(terms);
        let residual = Self::resum(&terms) - identity_id.rhs();
        Self { identity_id, inputs: Labeled::from_pairs(inputs), terms, residual }
    }

    /// Left-to-right sum of the terms, the order used for the residual.
    fn resum(terms: &Labeled) -> f64 {
        terms.values().fold(0.0, |acc, t| acc + t)
    }

    /// Recompute the residual from the stored terms.
    pub fn recomputed_residual(&self) -> f64 {
        Self::resum(&self.terms) - self.identity_id.rhs()
    }

    pub fn within(&self, tol: f64) -> bool {
        self.residual.abs() <= tol
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || v.is_infinite() {
        return Err(domain(format!("{name} must be finite and >= 0, got {v}")));
    }
    Ok(())
}

fn finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(domain(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}

/// `Σ_{i=n+1}^{m} f(i; μ)`; the pmf is read at `μ = 0` by its limit.
fn poisson_window_sum(n: u64, m: u64, mu: f64) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let model = PoissonModel::new(mu).expect("validated rate");
    (n + 1..=m).map(|i| model.pmf(i)).sum()
}

/// Residual of
/// `∫_{μ1}^{μ2} g_m + Σ_{i=n+1}^{m} f(i;μ2) + ∫_{μ2}^{μ1} g_n - Σ_{i=n+1}^{m} f(i;μ1) = 0`
/// for counts `m > n` and rates `μ1, μ2 >= 0`.
pub fn poisson_gamma_exchange(mu1: f64, mu2: f64, n: u64, m: u64) -> Result<IdentityReport> {
    non_negative("mu1", mu1)?;
    non_negative("mu2", mu2)?;
    if m <= n {
        return Err(domain(format!("need m > n, got n={n}, m={m}")));
    }
    let gamma_m = dual_gamma_cdf(mu2, m)? - dual_gamma_cdf(mu1, m)?;
    let sum_at_mu2 = poisson_window_sum(n, m, mu2);
    let gamma_n = dual_gamma_cdf(mu1, n)? - dual_gamma_cdf(mu2, n)?;
    let sum_at_mu1 = -poisson_window_sum(n, m, mu1);
    Ok(IdentityReport::new(
        IdentityId::PoissonGammaExchange,
        &[("mu1", mu1), ("mu2", mu2), ("n", n as f64), ("m", m as f64)],
        &[
            ("gamma_m_mass", gamma_m),
            ("poisson_sum_mu2", sum_at_mu2),
            ("gamma_n_mass", gamma_n),
            ("neg_poisson_sum_mu1", sum_at_mu1),
        ],
    ))
}

/// Residual of
/// `Σ_{i>n̂} f(i;μ1) + ∫_{μ1}^{μ2} g_n̂ + Σ_{i<=n̂} f(i;μ2) = 1`.
/// The rates may come in either order; the middle term is then negative.
pub fn poisson_coverage(mu1: f64, mu2: f64, n_hat: u64) -> Result<IdentityReport> {
    non_negative("mu1", mu1)?;
    non_negative("mu2", mu2)?;
    let tail = poisson_sf_at(n_hat, mu1);
    let mass = dual_gamma_cdf(mu2, n_hat)? - dual_gamma_cdf(mu1, n_hat)?;
    let head = poisson_cdf_at(n_hat, mu2);
    Ok(IdentityReport::new(
        IdentityId::PoissonCoverage,
        &[("mu1", mu1), ("mu2", mu2), ("n_hat", n_hat as f64)],
        &[("poisson_tail_mu1", tail), ("gamma_mass", mass), ("poisson_head_mu2", head)],
    ))
}

/// Residual of `∫_c^d φ(a; b, σ) da - ∫_c^d φ(x; b, σ) dx = 0`: the first
/// integral runs over the mean with `b` observed, the second over the
/// observable with mean `b`.
pub fn normal_self_dual(b: f64, c: f64, d: f64, sigma: f64) -> Result<IdentityReport> {
    finite("b", b)?;
    finite("c", c)?;
    finite("d", d)?;
    let model = NormalModel::new(b, sigma)?;
    let over_mean = model.dual_cdf(d) - model.dual_cdf(c);
    let over_observable = model.cdf(d) - model.cdf(c);
    Ok(IdentityReport::new(
        IdentityId::NormalSelfDual,
        &[("b", b), ("c", c), ("d", d), ("sigma", sigma)],
        &[("mean_integral", over_mean), ("neg_observable_integral", -over_observable)],
    ))
}

/// Residual of `∫₀^p β(x; n, m) dx - Σ_{k=0}^{m} P(k; n, p) = 0`.
pub fn neg_binomial_beta(p: f64, n: u64, m: u64) -> Result<IdentityReport> {
    let model = NegBinomialModel::new(n, p)?;
    let beta_side = reg_inc_beta(n as f64 + 1.0, m as f64 + 1.0, p)?;
    let pascal_side: f64 = (0..=m).map(|k| model.pmf(k)).sum();
    Ok(IdentityReport::new(
        IdentityId::NegBinomialBeta,
        &[("p", p), ("n", n as f64), ("m", m as f64)],
        &[("beta_cdf", beta_side), ("neg_negbin_cdf", -pascal_side)],
    ))
}

/// Residual of
/// `∫_{-∞}^{x̂-c} φ(x;x̂,σ)dx + ∫_{x̂-c}^{x̂+d} φ(a;x̂,σ)da + ∫_{x̂+d}^{∞} φ(x;x̂,σ)dx = 1`
/// for any real `c`, `d`.
pub fn normal_partition(x_hat: f64, c: f64, d: f64, sigma: f64) -> Result<IdentityReport> {
    finite("x_hat", x_hat)?;
    finite("c", c)?;
    finite("d", d)?;
    let model = NormalModel::new(x_hat, sigma)?;
    let left = x_hat - c;
    let right = x_hat + d;
    let left_tail = model.cdf(left);
    let mass = model.dual_cdf(right) - model.dual_cdf(left);
    let right_tail = 1.0 - model.cdf(right);
    Ok(IdentityReport::new(
        IdentityId::NormalPartition,
        &[("x_hat", x_hat), ("c", c), ("d", d), ("sigma", sigma)],
        &[("left_tail", left_tail), ("mean_mass", mass), ("right_tail", right_tail)],
    ))
}

/// Residual of
/// `∫_{x̂}^{∞} φ(x;x̂-c,σ)dx + ∫_{x̂-c}^{x̂+d} φ(a;x̂,σ)da + ∫_{-∞}^{x̂} φ(x;x̂+d,σ)dx = 1`
/// for `c, d >= 0`.
pub fn normal_shifted_partition(x_hat: f64, c: f64, d: f64, sigma: f64) -> Result<IdentityReport> {
    finite("x_hat", x_hat)?;
    non_negative("c", c)?;
    non_negative("d", d)?;
    let observed = NormalModel::new(x_hat, sigma)?;
    let low_mean = NormalModel::new(x_hat - c, sigma)?;
    let high_mean = NormalModel::new(x_hat + d, sigma)?;
    let upper_tail = 1.0 - low_mean.cdf(x_hat);
    let mass = observed.dual_cdf(x_hat + d) - observed.dual_cdf(x_hat - c);
    let lower_tail = high_mean.cdf(x_hat);
    Ok(IdentityReport::new(
        IdentityId::NormalShiftedPartition,
        &[("x_hat", x_hat), ("c", c), ("d", d), ("sigma", sigma)],
        &[("upper_tail_low_mean", upper_tail), ("mean_mass", mass), ("lower_tail_high_mean", lower_tail)],
    ))
}

/// Per-identity outcome of a randomized sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub identity_id: IdentityId,
    pub evaluated: usize,
    pub max_abs_residual: f64,
    /// Report with the largest `|residual|`.
    pub worst: IdentityReport,
}

/// Evaluate one random tuple of `id`, drawn from the sweep ranges:
/// rates in `[0, 50]`, counts up to 60, locations and offsets in `[-20, 20]`
/// (`[0, 20]` where the identity needs `c, d >= 0`), `σ ∈ [0.1, 10]`,
/// `p ∈ [0, 1]`.
pub fn random_report<R: Rng + ?Sized>(id: IdentityId, rng: &mut R) -> Result<IdentityReport> {
    let sigma = |rng: &mut R| rng.random_range(0.1..=10.0);
    let loc = |rng: &mut R| rng.random_range(-20.0..=20.0);
    match id {
        IdentityId::PoissonGammaExchange => {
            let n = rng.random_range(0..60u64);
            let m = rng.random_range(n + 1..=60u64);
            poisson_gamma_exchange(rng.random_range(0.0..=50.0), rng.random_range(0.0..=50.0), n, m)
        }
        IdentityId::PoissonCoverage => {
            poisson_coverage(rng.random_range(0.0..=50.0), rng.random_range(0.0..=50.0), rng.random_range(0..=60u64))
        }
        IdentityId::NormalSelfDual => {
            let (b, c, d) = (loc(rng), loc(rng), loc(rng));
            normal_self_dual(b, c, d, sigma(rng))
        }
        IdentityId::NegBinomialBeta => {
            neg_binomial_beta(rng.random_range(0.0..=1.0), rng.random_range(0..=60u64), rng.random_range(0..=60u64))
        }
        IdentityId::NormalPartition => {
            let (x, c, d) = (loc(rng), loc(rng), loc(rng));
            normal_partition(x, c, d, sigma(rng))
        }
        IdentityId::NormalShiftedPartition => {
            let x = loc(rng);
            let c = rng.random_range(0.0..=20.0);
            let d = rng.random_range(0.0..=20.0);
            normal_shifted_partition(x, c, d, sigma(rng))
        }
    }
}

/// Evaluate `count` random tuples of every identity. Identity `i` draws from
/// stream `i` of `seed`, so results do not depend on evaluation order.
pub fn identity_sweep(count: usize, seed: u64) -> Result<Vec<SweepOutcome>> {
    if count == 0 {
        return Err(domain("sweep count must be at least 1"));
    }
    IdentityId::ALL
        .iter()
        .enumerate()
        .map(|(index, &id)| {
            let mut rng = worker_stream(seed, index as u64);
            let mut worst: Option<IdentityReport> = None;
            for _ in 0..count {
                let report = random_report(id, &mut rng)?;
                if worst.as_ref().is_none_or(|w| report.residual.abs() > w.residual.abs()) {
                    worst = Some(report);
                }
            }
            let worst = worst.expect("count >= 1");
            Ok(SweepOutcome { identity_id: id, evaluated: count, max_abs_residual: worst.residual.abs(), worst })
        })
        .collect()
}

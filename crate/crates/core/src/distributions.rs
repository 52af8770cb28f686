//! The five laws and their dual readings.
//!
//! `PoissonModel` and the unit-scale Gamma share one kernel,
//! `μⁿ e^{-μ} / n!`: read with `n` as the variable it is the Poisson pmf,
//! read with `μ` as the variable it is the Gamma density of shape `n + 1`.
//! [`poisson_pmf`] and [`dual_gamma_pdf`] both evaluate that kernel through
//! the same function, so the two readings agree bit for bit.
//!
//! All factorials go through `ln Γ`, which keeps the binomial coefficients of
//! the Beta and negative binomial laws finite far beyond `170!`.

use crate::error::{domain, Result};
use crate::special::{inc_gamma_pair, ln_gamma, reg_inc_beta, std_normal_cdf, ToleranceConfig};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Poisson law of a count `n` with rate `mu > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonModel {
    mu: f64,
}

impl PoissonModel {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0) || mu.is_infinite() {
            return Err(domain(format!("Poisson rate must be finite and > 0, got {mu}")));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn pmf(&self, n: u64) -> f64 {
        poisson_kernel(n, self.mu)
    }

    /// `ln f(n; μ)`, finite even where the pmf itself underflows.
    pub fn ln_pmf(&self, n: u64) -> f64 {
        ln_poisson_kernel(n, self.mu)
    }

    /// `P(i <= n | μ)`.
    pub fn cdf(&self, n: u64) -> f64 {
        poisson_cdf_at(n, self.mu)
    }
}

/// Gamma law in the rate form `a^s x^{s-1} e^{-a x} / Γ(s)`.
///
/// `scale` is the factor `a` multiplying the variable in the exponent (the
/// reciprocal of the conventional scale `β`), `shape` is `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaModel {
    scale: f64,
    shape: f64,
}

impl GammaModel {
    pub fn new(scale: f64, shape: f64) -> Result<Self> {
        if !(scale > 0.0) || scale.is_infinite() {
            return Err(domain(format!("Gamma scale must be finite and > 0, got {scale}")));
        }
        if !(shape > 0.0) || shape.is_infinite() {
            return Err(domain(format!("Gamma shape must be finite and > 0, got {shape}")));
        }
        Ok(Self { scale, shape })
    }

    /// The law of the Poisson rate given `n_hat` observed events: scale 1,
    /// shape `n_hat + 1`.
    pub fn dual_of_count(n_hat: u64) -> Self {
        Self { scale: 1.0, shape: n_hat as f64 + 1.0 }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(domain(format!("Gamma density requires x > 0, got {x}")));
        }
        Ok(self.ln_pdf_unchecked(x).exp())
    }

    fn ln_pdf_unchecked(&self, x: f64) -> f64 {
        self.shape * self.scale.ln() + (self.shape - 1.0) * x.ln() - self.scale * x - ln_gamma(self.shape)
    }

    /// `P(X <= x)`; zero for `x <= 0`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(domain("Gamma cdf of NaN"));
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        let t = self.scale * x;
        Ok(inc_gamma_pair(self.shape, t, ToleranceConfig::default().max_iter)?.0)
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.scale * self.scale)
    }

    /// Location of the density maximum; 0 when `shape <= 1`.
    pub fn mode(&self) -> f64 {
        ((self.shape - 1.0) / self.scale).max(0.0)
    }
}

/// Normal law with mean `a` and fixed `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModel {
    mean: f64,
    sigma: f64,
}

impl NormalModel {
    pub fn new(mean: f64, sigma: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(domain(format!("Normal mean must be finite, got {mean}")));
        }
        if !(sigma > 0.0) || sigma.is_infinite() {
            return Err(domain(format!("Normal sigma must be finite and > 0, got {sigma}")));
        }
        Ok(Self { mean, sigma })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Density of the observable `x` around the mean.
    pub fn pdf(&self, x: f64) -> f64 {
        normal_kernel(x - self.mean, self.sigma)
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        std_normal_cdf((x - self.mean) / self.sigma)
    }

    /// Exchanged reading: `self.mean()` is the observed value and `a` the
    /// unknown mean. Same formula as [`pdf`](Self::pdf).
    pub fn dual_pdf(&self, a: f64) -> f64 {
        normal_kernel(self.mean - a, self.sigma)
    }

    /// `P(A <= a)` for the mean `A` given the observation `self.mean()`,
    /// computed as the upper tail of the observable at the exchanged point.
    pub fn dual_cdf(&self, a: f64) -> f64 {
        1.0 - std_normal_cdf((self.mean - a) / self.sigma)
    }
}

/// Negative binomial law `C(n+k, k) p^{n+1} (1-p)^k` of the failure count `k`.
///
/// `p = 0` is accepted although the pmf is then identically zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegBinomialModel {
    n: u64,
    p: f64,
}

impl NegBinomialModel {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!("negative binomial p must lie in [0, 1], got {p}")));
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_degenerate(&self) -> bool {
        self.p == 0.0
    }

    pub fn pmf(&self, k: u64) -> f64 {
        let (n, p) = (self.n, self.p);
        if p == 0.0 {
            return 0.0;
        }
        if p == 1.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let nf = n as f64;
        let kf = k as f64;
        let ln_binom = ln_gamma(nf + kf + 1.0) - ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0);
        (ln_binom + (nf + 1.0) * p.ln() + kf * (-p).ln_1p()).exp()
    }
}

/// Beta law `(n+m+1)!/(n! m!) x^n (1-x)^m` on `0 < x < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BetaModel {
    n: u64,
    m: u64,
}

impl BetaModel {
    pub fn new(n: u64, m: u64) -> Self {
        Self { n, m }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(domain(format!("Beta density requires 0 < x < 1, got {x}")));
        }
        let nf = self.n as f64;
        let mf = self.m as f64;
        let ln_norm = ln_gamma(nf + mf + 2.0) - ln_gamma(nf + 1.0) - ln_gamma(mf + 1.0);
        Ok((ln_norm + nf * x.ln() + mf * (-x).ln_1p()).exp())
    }

    /// `∫₀^x` of the density, i.e. `I_x(n+1, m+1)`; endpoints by limits.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        reg_inc_beta(self.n as f64 + 1.0, self.m as f64 + 1.0, x)
    }
}

fn ln_poisson_kernel(n: u64, mu: f64) -> f64 {
    let nf = n as f64;
    let ln_power = if n == 0 { 0.0 } else { nf * mu.ln() };
    ln_power - mu - ln_gamma(nf + 1.0)
}

/// `μⁿ e^{-μ} / n!`, shared by the Poisson pmf and the dual Gamma density.
fn poisson_kernel(n: u64, mu: f64) -> f64 {
    ln_poisson_kernel(n, mu).exp()
}

fn normal_kernel(delta: f64, sigma: f64) -> f64 {
    let z = delta / sigma;
    (-0.5 * z * z - HALF_LN_2PI).exp() / sigma
}

/// `P(i <= n | μ)` for any `μ >= 0`, including `+∞` (limit 0).
pub(crate) fn poisson_cdf_at(n: u64, mu: f64) -> f64 {
    // Callers pass a validated non-negative mu; the pair cannot fail there.
    inc_gamma_pair(n as f64 + 1.0, mu, ToleranceConfig::default().max_iter).map(|(_, q)| q).unwrap_or(f64::NAN)
}

/// `P(i > n | μ)`, the complement of [`poisson_cdf_at`].
pub(crate) fn poisson_sf_at(n: u64, mu: f64) -> f64 {
    inc_gamma_pair(n as f64 + 1.0, mu, ToleranceConfig::default().max_iter).map(|(p, _)| p).unwrap_or(f64::NAN)
}

/// Probability of observing `n` events at rate `model.mu()`.
pub fn poisson_pmf(n: u64, model: &PoissonModel) -> f64 {
    model.pmf(n)
}

/// `Σ_{i=0}^{n_hat} f(i; μ)`, evaluated as `Q(n_hat + 1, μ)`.
pub fn poisson_cdf(n_hat: u64, model: &PoissonModel) -> f64 {
    model.cdf(n_hat)
}

pub fn gamma_pdf(x: f64, model: &GammaModel) -> Result<f64> {
    model.pdf(x)
}

/// Density of the Poisson rate `mu` given `n_hat` observed events.
///
/// Bit-identical to `poisson_pmf(n_hat, PoissonModel::new(mu))`. The limit
/// `mu → 0⁺` is finite (1 for `n_hat = 0`), but `mu <= 0` itself is rejected.
pub fn dual_gamma_pdf(mu: f64, n_hat: u64) -> Result<f64> {
    if !(mu > 0.0) || mu.is_infinite() {
        return Err(domain(format!("dual Gamma density requires finite mu > 0, got {mu}")));
    }
    Ok(poisson_kernel(n_hat, mu))
}

/// `∫₀^mu` of the dual Gamma density, `P(n_hat + 1, mu)`.
pub fn dual_gamma_cdf(mu: f64, n_hat: u64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(domain(format!("dual Gamma cdf requires mu >= 0, got {mu}")));
    }
    Ok(poisson_sf_at(n_hat, mu))
}

pub fn normal_pdf(x: f64, model: &NormalModel) -> f64 {
    model.pdf(x)
}

pub fn neg_binomial_pmf(k: u64, model: &NegBinomialModel) -> f64 {
    model.pmf(k)
}

pub fn beta_pdf(x: f64, model: &BetaModel) -> Result<f64> {
    model.pdf(x)
}

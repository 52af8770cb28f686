//! Scalar special functions.
//!
//! Everything a density, cdf or quantile in this crate needs: `ln Γ`, the
//! regularized incomplete gamma and beta functions, the standard normal cdf
//! and bracketed Newton solvers for the gamma and normal quantiles.
//!
//! Series and continued fractions always run to machine precision; the
//! [`ToleranceConfig`] only bounds their iteration count and sets the
//! acceptance thresholds of the quantile solvers.

use crate::error::{domain, Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const FPMIN: f64 = 1e-300;

/// Accuracy and iteration limits shared by the iterative routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Largest accepted `|F(x) - q|` for a quantile.
    pub abs_tol: f64,
    /// Relative step size below which a root search counts as converged.
    pub rel_tol: f64,
    /// Iteration budget of root searches, series and continued fractions.
    pub max_iter: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_iter: 200 }
    }
}

impl ToleranceConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        let tol = Self { abs_tol, rel_tol, max_iter };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_iter == 0 {
            return Err(domain(format!("tolerances must be positive and max_iter at least 1, got {self:?}")));
        }
        Ok(())
    }
}

/// `ln Γ(z)` for `z > 0`.
pub fn log_gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || z.is_infinite() {
        return Err(domain(format!("log_gamma requires finite z > 0, got {z}")));
    }
    Ok(ln_gamma(z))
}

/// Unchecked `ln Γ(z)`; callers guarantee `z > 0`.
pub(crate) fn ln_gamma(z: f64) -> f64 {
    // Small integers: exact factorial products, so ln Γ(1) = ln Γ(2) = 0.
    if z <= 30.0 && z == z.floor() {
        let mut prod = 1.0;
        let mut k = 2.0;
        while k < z {
            prod *= k;
            k += 1.0;
        }
        return prod.ln();
    }
    if z >= 10.0 {
        return stirling(z);
    }
    let mut shifted = z;
    let mut prod = 1.0;
    while shifted < 10.0 {
        prod *= shifted;
        shifted += 1.0;
    }
    stirling(shifted) - prod.ln()
}

/// Stirling series with Bernoulli corrections through `z^-15`; truncation
/// error is below 1e-16 for `z >= 10`.
fn stirling(z: f64) -> f64 {
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let w = 1.0 / (z * z);
    let series = C.iter().rev().fold(0.0, |acc, &c| acc * w + c) / z;
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn reg_lower_inc_gamma(a: f64, x: f64) -> Result<f64> {
    reg_lower_inc_gamma_with(a, x, &ToleranceConfig::default())
}

pub fn reg_lower_inc_gamma_with(a: f64, x: f64, tol: &ToleranceConfig) -> Result<f64> {
    check_inc_gamma_args(a, x)?;
    Ok(inc_gamma_pair(a, x, tol.max_iter)?.0)
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`, evaluated
/// directly so that small upper tails keep their relative accuracy.
pub fn reg_upper_inc_gamma(a: f64, x: f64) -> Result<f64> {
    check_inc_gamma_args(a, x)?;
    Ok(inc_gamma_pair(a, x, ToleranceConfig::default().max_iter)?.1)
}

fn check_inc_gamma_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || a.is_infinite() {
        return Err(domain(format!("incomplete gamma requires finite a > 0, got {a}")));
    }
    if !(x >= 0.0) {
        return Err(domain(format!("incomplete gamma requires x >= 0, got {x}")));
    }
    Ok(())
}

/// `(P(a, x), Q(a, x))`. One member is evaluated and the other is its
/// complement, so `P + Q` is 1 up to a single rounding.
///
/// Series below `x = a + 1`, Lentz continued fraction above. The iteration
/// budget is `max_iter` plus a `10√a` allowance since both expansions need
/// `O(√a)` terms near the switch point.
pub(crate) fn inc_gamma_pair(a: f64, x: f64, max_iter: usize) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let ln_prefactor = a * x.ln() - x - ln_gamma(a);
    let budget = max_iter + (10.0 * a.sqrt()) as usize;

    if x < a + 1.0 {
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut converged = false;
        for _ in 0..budget {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * f64::EPSILON {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!("incomplete gamma series did not converge for a={a}, x={x}")));
        }
        let p = (sum * ln_prefactor.exp()).clamp(0.0, 1.0);
        Ok((p, 1.0 - p))
    } else {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut converged = false;
        for i in 1..=budget {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b + an / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < f64::EPSILON {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "incomplete gamma continued fraction did not converge for a={a}, x={x}"
            )));
        }
        let q = (ln_prefactor.exp() * h).clamp(0.0, 1.0);
        Ok((1.0 - q, q))
    }
}

/// Density of the unit-scale Gamma law with shape `a`, i.e. `dP(a, x)/dx`.
pub(crate) fn gamma_density(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return if a == 1.0 && x == 0.0 {
            1.0
        } else if a < 1.0 && x == 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
    }
    ((a - 1.0) * x.ln() - x - ln_gamma(a)).exp()
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    reg_inc_beta_with(a, b, x, &ToleranceConfig::default())
}

pub fn reg_inc_beta_with(a: f64, b: f64, x: f64, tol: &ToleranceConfig) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) || a.is_infinite() || b.is_infinite() {
        return Err(domain(format!("incomplete beta requires finite a, b > 0, got a={a}, b={b}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(domain(format!("incomplete beta requires 0 <= x <= 1, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (-x).ln_1p();
    let front = ln_front.exp();
    let budget = tol.max_iter + (10.0 * a.max(b).sqrt()) as usize;
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x, budget)? / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x, budget)? / b
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64, budget: usize) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=budget {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            return Ok(h);
        }
    }
    Err(Error::Numeric(format!("incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}")))
}

/// `P(Z <= -t)` for `t >= 0`, via `erfc(t/√2) = Q(1/2, t²/2)`.
fn std_normal_lower_tail(t: f64) -> f64 {
    let x = 0.5 * t * t;
    // a = 1/2 converges in a handful of terms for every x; the budget cannot run out.
    0.5 * inc_gamma_pair(0.5, x, 400).map(|(_, q)| q).unwrap_or(0.0)
}

/// Standard normal cdf `Φ(z)`. Positive arguments are evaluated as the exact
/// complement of the negative ones, so `Φ(-z) = 1 - Φ(z)` to one rounding.
pub fn std_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < 0.0 {
        std_normal_lower_tail(-z)
    } else {
        1.0 - std_normal_lower_tail(z)
    }
}

pub(crate) fn std_normal_density(z: f64) -> f64 {
    (-0.5 * z * z - HALF_LN_2PI).exp()
}

/// Inverse of [`reg_lower_inc_gamma`] in `x`.
pub fn gamma_quantile(a: f64, q: f64) -> Result<f64> {
    gamma_quantile_with(a, q, &ToleranceConfig::default())
}

pub fn gamma_quantile_with(a: f64, q: f64, tol: &ToleranceConfig) -> Result<f64> {
    tol.validate()?;
    if !(a > 0.0) || a.is_infinite() {
        return Err(domain(format!("gamma_quantile requires finite a > 0, got {a}")));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(domain(format!("gamma_quantile requires 0 < q < 1, got {q}")));
    }
    let cdf = |x: f64| inc_gamma_pair(a, x, tol.max_iter).map(|(p, _)| p);

    let mut lo = 0.0;
    let mut hi = a + 10.0 * a.sqrt() + 30.0;
    let mut widenings = 0;
    while cdf(hi)? < q {
        lo = hi;
        hi *= 2.0;
        widenings += 1;
        if widenings > 64 {
            return Err(Error::Numeric(format!("gamma_quantile could not bracket q={q} for a={a}")));
        }
    }

    // Wilson-Hilferty starting point.
    let z = rough_normal_quantile(q);
    let wh = a * (1.0 - 1.0 / (9.0 * a) + z / (3.0 * a.sqrt())).powi(3);
    let start = if wh > lo && wh < hi { wh } else { 0.5 * (lo + hi) };

    let x = newton_in_bracket(start, lo, hi, q, tol, cdf, |x| gamma_density(a, x))?;
    let resid = cdf(x)? - q;
    if resid.abs() > tol.abs_tol {
        return Err(Error::Numeric(format!("gamma_quantile(a={a}, q={q}) stalled at x={x} with residual {resid:e}")));
    }
    Ok(x)
}

/// Inverse of [`std_normal_cdf`].
pub fn std_normal_quantile(q: f64) -> Result<f64> {
    std_normal_quantile_with(q, &ToleranceConfig::default())
}

pub fn std_normal_quantile_with(q: f64, tol: &ToleranceConfig) -> Result<f64> {
    tol.validate()?;
    if !(q > 0.0 && q < 1.0) {
        return Err(domain(format!("std_normal_quantile requires 0 < q < 1, got {q}")));
    }
    if q == 0.5 {
        return Ok(0.0);
    }
    // Solve in the lower tail only; the upper half follows by antisymmetry.
    let (p, sign) = if q < 0.5 { (q, 1.0) } else { (1.0 - q, -1.0) };
    let cdf = |z: f64| Ok(std_normal_cdf(z));
    let start = rough_normal_quantile(p).clamp(-39.0, 0.0);
    let z = newton_in_bracket(start, -40.0, 0.0, p, tol, cdf, std_normal_density)?;
    if (std_normal_cdf(z) - p).abs() > tol.abs_tol {
        return Err(Error::Numeric(format!("std_normal_quantile({q}) stalled at {z}")));
    }
    Ok(sign * z)
}

/// Rational approximation of the normal quantile (absolute error < 5e-4),
/// used only to seed the Newton iterations.
fn rough_normal_quantile(q: f64) -> f64 {
    let p = if q < 0.5 { q } else { 1.0 - q };
    let t = (-2.0 * p.ln()).sqrt();
    let num = 2.515_517 + t * (0.802_853 + t * 0.010_328);
    let den = 1.0 + t * (1.432_788 + t * (0.189_269 + t * 0.001_308));
    let z = t - num / den;
    if q < 0.5 {
        -z
    } else {
        z
    }
}

/// Newton iteration on `cdf(x) = target`, kept inside the shrinking bracket
/// `[lo, hi]` with bisection whenever a step would leave it.
fn newton_in_bracket<F, D>(
    start: f64,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    tol: &ToleranceConfig,
    cdf: F,
    density: D,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> f64,
{
    let mut x = start;
    for _ in 0..tol.max_iter {
        let f = cdf(x)? - target;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = density(x);
        let newton = x - f / slope;
        // Converged at the evaluated point: the correction is below one ulp,
        // or both the residual and the correction are negligible.
        let correction = (newton - x).abs();
        if correction <= f64::EPSILON * x.abs()
            || (f.abs() <= tol.abs_tol * 1e-3 && correction <= tol.rel_tol * x.abs())
        {
            return Ok(x);
        }
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - x).abs();
        x = next;
        if step <= 2.0 * f64::EPSILON * x.abs() || hi - lo <= 2.0 * f64::EPSILON * hi.abs() {
            return Ok(x);
        }
    }
    // Out of iterations: the caller's residual check decides.
    Ok(x)
}

//! Taylor re-expansion of a Dirichlet series around a center `τ > 0`, with explicit
//! certified remainder bounds.
//!
//! For positive exponents the coefficients are
//! `b_n = Σⱼ αⱼ e^{−λⱼτ} (−λⱼ)ⁿ / n!`, dominated by
//! `a_n = Σⱼ |αⱼ| e^{−λⱼτ} λⱼⁿ / n!`. Since `e^{−λτ} λⁿ ≤ (n/(eτ))ⁿ` for every `λ > 0`
//! and `n! ≥ √(2πn) (n/e)ⁿ`, we get `a_n ≤ S₀ / (τⁿ √(2πn))` with `S₀ = Σ|αⱼ|`.
//! Summing the geometric tail with the square-root factor frozen at `n + 1` gives,
//! for `r = |t − τ|/τ < 1`,
//!
//! ```text
//! |φ(t) − Σ_{k≤n} b_k (t−τ)^k| ≤ S₀ / √(2π(n+1)) · r^{n+1} / (1 − r).
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, CompensatedSum};
use crate::series::{DirichletSeries, SeriesValue};

/// Power-series expansion `Σ b_n (t − τ)ⁿ` of a Dirichlet series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaylorExpansion {
    pub center: f64,
    pub coeffs: Vec<f64>,
    /// `a_n`, including the tail's worst-case contribution.
    #[serde(rename = "bounds")]
    pub coeff_bounds: Vec<f64>,
    /// `S₀`: sum of absolute coefficients, tail bound included.
    pub sum_abs_alpha: f64,
    /// `Σ_{tail}|αⱼ|`; zero for finite series.
    #[serde(default)]
    pub tail_sum_bound: f64,
}

/// Bound on `|φ(t) − Σ_{k≤order} b_k (t−τ)^k|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderCertificate {
    pub order: usize,
    pub t: f64,
    pub bound: f64,
}

/// Taylor coefficients of `series` at `tau`, up to `order`.
pub fn expand(series: &DirichletSeries, tau: f64, order: usize) -> Result<TaylorExpansion> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("expansion center must be positive, got {tau}")));
    }
    if let Some(t) = series.terms().iter().find(|t| t.lambda <= 0.0) {
        return Err(Error::invalid(format!(
            "expansion needs positive exponents, found {}; shift-normalize first",
            t.lambda
        )));
    }

    let mut coeffs = vec![CompensatedSum::new(); order + 1];
    let mut bounds = vec![CompensatedSum::new(); order + 1];
    for term in series.terms() {
        if term.lambda * tau > 700.0 {
            // e^{−λτ} would underflow; go through logarithms instead.
            let ln_lambda = term.lambda.ln();
            let ln_alpha = term.alpha.abs().ln();
            for n in 0..=order {
                let magnitude =
                    (ln_alpha - term.lambda * tau + n as f64 * ln_lambda - ln_factorial(n)).exp();
                let sign = if n % 2 == 0 { term.alpha.signum() } else { -term.alpha.signum() };
                coeffs[n].add(sign * magnitude);
                bounds[n].add(magnitude);
            }
            continue;
        }
        // term_n = α e^{−λτ} (−λ)ⁿ / n!, updated in place to avoid factorials.
        let mut signed = term.alpha * (-term.lambda * tau).exp();
        let mut unsigned = signed.abs();
        for n in 0..=order {
            coeffs[n].add(signed);
            bounds[n].add(unsigned);
            let factor = term.lambda / (n + 1) as f64;
            signed *= -factor;
            unsigned *= factor;
        }
    }

    let tail_sum_bound = series.tail().map_or(0.0, |t| t.sum_bound());
    let mut coeffs: Vec<f64> = coeffs.iter().map(CompensatedSum::value).collect();
    coeffs[0] = series.evaluate(tau)?.value;
    let coeff_bounds = bounds
        .iter()
        .enumerate()
        .map(|(n, b)| b.value() + tail_coefficient_bound(tail_sum_bound, tau, n))
        .collect();

    Ok(TaylorExpansion {
        center: tau,
        coeffs,
        coeff_bounds,
        sum_abs_alpha: series.sum_abs_alpha(),
        tail_sum_bound,
    })
}

/// `sum_bound · (n/(eτ))ⁿ / n!`, the largest `n`-th coefficient any tail term can produce.
fn tail_coefficient_bound(sum_bound: f64, tau: f64, n: usize) -> f64 {
    if sum_bound == 0.0 {
        return 0.0;
    }
    if n == 0 {
        return sum_bound;
    }
    let nf = n as f64;
    sum_bound * (nf * (nf / (std::f64::consts::E * tau)).ln() - ln_factorial(n)).exp()
}

impl TaylorExpansion {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Ratio `|t − τ| / τ`, validated to lie in the convergence interval `(0, 2τ)`.
    fn ratio(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 2.0 * self.center) {
            return Err(Error::invalid(format!(
                "t = {t} lies outside the expansion interval (0, {})",
                2.0 * self.center
            )));
        }
        Ok((t - self.center).abs() / self.center)
    }

    fn certified_tail(&self, n: usize, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let scale = self.sum_abs_alpha / (2.0 * std::f64::consts::PI * (n + 1) as f64).sqrt();
        scale * r.powi((n + 1) as i32) / (1.0 - r)
    }

    /// Certified bound on the error of the degree-`n` partial sum at `t`.
    pub fn remainder_bound(&self, n: usize, t: f64) -> Result<RemainderCertificate> {
        if n == 0 {
            return Err(Error::invalid("remainder order must be at least 1"));
        }
        if n > self.order() {
            return Err(Error::invalid(format!(
                "remainder order {n} exceeds expansion order {}",
                self.order()
            )));
        }
        let r = self.ratio(t)?;
        Ok(RemainderCertificate {
            order: n,
            t,
            bound: self.certified_tail(n, r),
        })
    }

    /// `Σ_{k≤n} b_k (t−τ)^k` by Horner's rule; no domain check.
    pub fn partial_sum(&self, n: usize, t: f64) -> f64 {
        let h = t - self.center;
        self.coeffs[..=n.min(self.order())]
            .iter()
            .rev()
            .fold(0.0, |acc, &b| acc * h + b)
    }

    /// Evaluates the full expansion at `t`. The error bound covers the truncation
    /// remainder and, when a tail is present, the tail's share of the kept coefficients.
    pub fn evaluate(&self, t: f64) -> Result<SeriesValue> {
        let r = self.ratio(t)?;
        let order = self.order();
        let h = (t - self.center).abs();
        let tail_share: f64 = (0..=order)
            .map(|n| tail_coefficient_bound(self.tail_sum_bound, self.center, n) * h.powi(n as i32))
            .sum();
        Ok(SeriesValue {
            value: self.partial_sum(order, t),
            error_bound: self.certified_tail(order, r) + tail_share,
        })
    }
}

/// Smallest order `n ≥ 1` (up to `max_order`) whose certified remainder at `t` is at most
/// `tol`, for an expansion of `series` at `tau`. `None` if no order qualifies.
pub fn certified_order(
    series: &DirichletSeries,
    tau: f64,
    t: f64,
    tol: f64,
    max_order: usize,
) -> Result<Option<usize>> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    // The bound depends only on S₀, τ and t, so a zeroth-order expansion suffices.
    let probe = expand(series, tau, 0)?;
    let r = probe.ratio(t)?;
    Ok((1..=max_order).find(|&n| probe.certified_tail(n, r) <= tol))
}

//! Vanishing test for exponential sums on a finite horizon, and recovery of the
//! leading coefficients by sequential peeling.
//!
//! An exponential sum with strictly increasing exponents that vanishes on `[0, T]`
//! has all coefficients zero. Numerically that becomes a tolerance test on Chebyshev
//! nodes, and the inductive "divide by the slowest exponential and let `t → ∞`"
//! argument becomes a sequence of late-time least-squares fits.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::fmt_f64;
use crate::series::DirichletSeries;

/// Number of Chebyshev–Lobatto nodes used by [`is_identically_zero`].
pub const ZERO_TEST_NODES: usize = 129;

/// Samples of a real signal on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    times: Vec<f64>,
    values: Vec<f64>,
    horizon: f64,
}

impl SampledSignal {
    pub fn new(times: Vec<f64>, values: Vec<f64>, horizon: f64) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("a sampled signal needs at least one sample"));
        }
        if times.len() != values.len() {
            return Err(Error::invalid(format!(
                "{} sample times but {} values",
                times.len(),
                values.len()
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid("signal horizon must be positive"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("sample times must be strictly increasing"));
        }
        if times[0] < 0.0 || times[times.len() - 1] > horizon {
            return Err(Error::invalid(format!("sample times must lie in [0, {horizon}]")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("signal values must be finite"));
        }
        Ok(SampledSignal {
            times,
            values,
            horizon,
        })
    }

    /// Samples `f` on a uniform grid of `points` nodes over `[0, horizon]`.
    pub fn sample<F: Fn(f64) -> f64>(f: F, horizon: f64, points: usize) -> Result<Self> {
        let times = crate::numeric::linspace(0.0, horizon, points);
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values, horizon)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        crate::numeric::max_abs(&self.values)
    }

    /// Writes `t,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::invalid(format!("csv write failed: {e}"));
        w.write_record(["t", "value"]).map_err(io)?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([fmt_f64(*t), fmt_f64(*v)]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::invalid(format!("csv write failed: {e}")))?;
        Ok(())
    }

    /// Reads `t,value` rows. Lines starting with `#` are skipped; the horizon is the
    /// last sample time unless given.
    pub fn read_csv<R: Read>(input: R, horizon: Option<f64>) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::parse(format!("signal csv: {e}")))?;
            if rec.len() != 2 {
                return Err(Error::parse(format!("signal csv rows need 2 fields, got {}", rec.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::parse(format!("`{s}` is not a number")))
            };
            times.push(num(&rec[0])?);
            values.push(num(&rec[1])?);
        }
        let horizon = match horizon {
            Some(h) => h,
            None => *times.last().ok_or_else(|| Error::parse("signal csv has no rows"))?,
        };
        Self::new(times, values, horizon)
    }
}

/// Chebyshev–Lobatto nodes mapped onto `[0, horizon]`, in increasing order.
pub fn chebyshev_nodes(horizon: f64, count: usize) -> Vec<f64> {
    let m = (count.max(2) - 1) as f64;
    (0..count.max(2))
        .map(|k| {
            let x = -(std::f64::consts::PI * k as f64 / m).cos();
            0.5 * horizon * (1.0 + x)
        })
        .map(|t: f64| t.clamp(0.0, horizon))
        .collect()
}

/// True iff `max |φ(t)| + tail bound ≤ tol` over Chebyshev nodes of `[0, horizon]`.
/// The tolerance is absolute.
pub fn is_identically_zero(series: &DirichletSeries, horizon: f64, tol: f64) -> Result<bool> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid("horizon must be positive"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("zero-test tolerance must be positive"));
    }
    for t in chebyshev_nodes(horizon, ZERO_TEST_NODES) {
        let v = series.evaluate(t)?;
        if v.value.abs() + v.error_bound > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Coefficients recovered by [`peel_leading`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PeelResult {
    /// `(α̂ⱼ, λⱼ)` in increasing exponent order.
    pub recovered: Vec<(f64, f64)>,
    /// Max absolute residual over the samples after removing the recovered terms.
    pub residual_norm: f64,
    /// Set when two consecutive exponents are closer than `1/T`.
    pub ill_conditioned: bool,
}

/// Recovers `α₁..α_count` of a signal `Σ αⱼ e^{−λⱼ t}` with known exponents.
///
/// Step `i` fits the residual left by steps `< i` in the least squares sense against the
/// exponentials `λᵢ, λᵢ₊₁, …` still present, over every sample. Only `α̂ᵢ` is kept; its
/// term is subtracted before the next step. Restricting the fit to late samples where the
/// leading term dominates throws away most of the information on the slower-decaying
/// partners and amplifies noise by orders of magnitude, so the whole record is used.
pub fn peel_leading(signal: &SampledSignal, known_lambdas: &[f64], count: usize) -> Result<PeelResult> {
    if known_lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::invalid("exponents must be finite"));
    }
    if known_lambdas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("known exponents must be strictly increasing"));
    }
    if count > known_lambdas.len() {
        return Err(Error::invalid(format!(
            "cannot peel {count} coefficients from {} known exponents",
            known_lambdas.len()
        )));
    }
    if signal.len() < 2 * count {
        return Err(Error::invalid(format!(
            "peeling {count} coefficients needs at least {} samples, got {}",
            2 * count,
            signal.len()
        )));
    }

    let horizon = signal.horizon();
    let relevant = &known_lambdas[..(count + 1).min(known_lambdas.len())];
    let ill_conditioned = relevant.windows(2).any(|w| w[1] - w[0] < 1.0 / horizon);

    let times = signal.times();
    let mut residual = signal.values().to_vec();
    let mut recovered = Vec::with_capacity(count);
    for i in 0..count {
        let alpha = leading_fit(times, &residual, &known_lambdas[i..])?;
        let lambda = known_lambdas[i];
        for (r, &t) in residual.iter_mut().zip(times) {
            *r -= alpha * (-lambda * t).exp();
        }
        recovered.push((alpha, lambda));
    }

    Ok(PeelResult {
        recovered,
        residual_norm: crate::numeric::max_abs(&residual),
        ill_conditioned,
    })
}

/// Coefficient of the first column in the least-squares fit of `values` on `e^{−λt}`.
fn leading_fit(times: &[f64], values: &[f64], lambdas: &[f64]) -> Result<f64> {
    let rows = times.len();
    let cols = lambdas.len();
    let mut design = DMatrix::<f64>::zeros(rows, cols);
    for (r, &t) in times.iter().enumerate() {
        for (c, &lambda) in lambdas.iter().enumerate() {
            design[(r, c)] = (-lambda * t).exp();
        }
    }
    // Column equilibration keeps fast-decaying columns from vanishing numerically.
    let scales: Vec<f64> = (0..cols)
        .map(|c| {
            let n = design.column(c).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    for (c, s) in scales.iter().enumerate() {
        design.column_mut(c).scale_mut(1.0 / s);
    }
    let rhs = DVector::from_column_slice(values);
    let svd = design.svd(true, true);
    let eps = f64::EPSILON * rows.max(cols) as f64 * svd.singular_values.max();
    let sol = svd
        .solve(&rhs, eps)
        .map_err(|e| Error::invalid(format!("least-squares fit failed: {e}")))?;
    Ok(sol[0] / scales[0])
}

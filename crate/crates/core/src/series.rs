//! Exponential Dirichlet series `φ(t) = Σ αⱼ e^{−λⱼ t}`.
//!
//! A series is a finite list of explicit terms plus an optional [`TailModel`] that
//! certifies how much the omitted terms can contribute. All operations are pure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::parse_rational;
use crate::numeric::CompensatedSum;

/// One term `α e^{−λ t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub alpha: f64,
    pub lambda: f64,
}

impl Term {
    pub fn new(alpha: f64, lambda: f64) -> Self {
        Term { alpha, lambda }
    }
}

/// Certified bounds on the terms that were truncated away.
///
/// `sum_bound` bounds `Σ_{tail} |αⱼ|`, every tail exponent is at least `lambda_floor`,
/// and `weighted` optionally holds sharper bounds on `Σ_{tail} |αⱼ| / λⱼᵏ` for some `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailModel {
    sum_bound: f64,
    lambda_floor: f64,
    weighted: BTreeMap<u32, f64>,
}

impl TailModel {
    pub fn new(sum_bound: f64, lambda_floor: f64) -> Result<Self> {
        Self::with_weighted_bounds(sum_bound, lambda_floor, BTreeMap::new())
    }

    pub fn with_weighted_bounds(
        sum_bound: f64,
        lambda_floor: f64,
        mut weighted: BTreeMap<u32, f64>,
    ) -> Result<Self> {
        if !(sum_bound.is_finite() && sum_bound >= 0.0) {
            return Err(Error::invalid("tail sumBound must be finite and nonnegative"));
        }
        if !(lambda_floor.is_finite() && lambda_floor > 0.0) {
            return Err(Error::invalid("tail lambdaFloor must be finite and positive"));
        }
        if let Some(&b0) = weighted.get(&0) {
            if b0 != sum_bound {
                return Err(Error::invalid(format!(
                    "weightedBounds[0] = {b0} must equal sumBound = {sum_bound}"
                )));
            }
        }
        if weighted.values().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::invalid("weighted tail bounds must be finite and nonnegative"));
        }
        weighted.insert(0, sum_bound);
        Ok(TailModel {
            sum_bound,
            lambda_floor,
            weighted,
        })
    }

    pub fn sum_bound(&self) -> f64 {
        self.sum_bound
    }

    pub fn lambda_floor(&self) -> f64 {
        self.lambda_floor
    }

    /// Bound on `Σ_{tail} |αⱼ| / λⱼᵏ`: the best of the stored bounds pushed up to
    /// order `k` through `λⱼ ≥ lambda_floor`.
    pub fn weighted_sum_bound(&self, k: u32) -> f64 {
        self.weighted
            .range(..=k)
            .map(|(&m, &b)| b / self.lambda_floor.powi((k - m) as i32))
            .fold(f64::INFINITY, f64::min)
    }

    /// Explicitly stored weighted bounds, including order 0.
    pub fn weighted_bounds(&self) -> &BTreeMap<u32, f64> {
        &self.weighted
    }
}

/// A value together with a certified bound on what the tail may add.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeriesValue {
    pub value: f64,
    pub error_bound: f64,
}

/// Exponential Dirichlet series with strictly increasing exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSeries {
    terms: Vec<Term>,
    tail: Option<TailModel>,
}

impl DirichletSeries {
    /// Builds a finite series. Terms are sorted by exponent; duplicates are rejected.
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Result<Self> {
        let mut terms: Vec<Term> = terms.into_iter().collect();
        if terms.is_empty() {
            return Err(Error::invalid("a series needs at least one term"));
        }
        if let Some(t) = terms.iter().find(|t| !(t.alpha.is_finite() && t.lambda.is_finite())) {
            return Err(Error::invalid(format!(
                "non-finite term (alpha {}, lambda {})",
                t.alpha, t.lambda
            )));
        }
        terms.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        if let Some(w) = terms.windows(2).find(|w| w[0].lambda == w[1].lambda) {
            return Err(Error::invalid(format!(
                "duplicate exponent {}; use DirichletSeries::merge to combine terms",
                w[0].lambda
            )));
        }
        Ok(DirichletSeries { terms, tail: None })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(a, l)| Term::new(a, l)))
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn tail(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exponent(&self) -> f64 {
        self.terms[0].lambda
    }

    /// `Σ|αⱼ|` over explicit terms plus the tail bound.
    pub fn sum_abs_alpha(&self) -> f64 {
        let explicit: f64 = self.terms.iter().map(|t| t.alpha.abs()).collect::<CompensatedSum>().value();
        explicit + self.tail.as_ref().map_or(0.0, |t| t.sum_bound)
    }

    /// Sums the explicit terms of both series, adding coefficients of equal exponents.
    /// Tail bounds are added; the combined floor is the smaller one.
    pub fn merge(&self, other: &DirichletSeries) -> Result<DirichletSeries> {
        let mut map: BTreeMap<u64, Term> = BTreeMap::new();
        for t in self.terms.iter().chain(&other.terms) {
            map.entry(ordered_key(t.lambda))
                .and_modify(|e| e.alpha += t.alpha)
                .or_insert(*t);
        }
        let tail = match (&self.tail, &other.tail) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => Some(TailModel::new(
                a.sum_bound + b.sum_bound,
                a.lambda_floor.min(b.lambda_floor),
            )?),
        };
        let mut merged = DirichletSeries::new(map.into_values())?;
        merged.tail = tail;
        Ok(merged)
    }

    /// Evaluates the explicit terms at `t`, with the tail's certified contribution as
    /// `error_bound`. Accumulation runs from the fastest-decaying term to the slowest.
    pub fn evaluate(&self, t: f64) -> Result<SeriesValue> {
        if !t.is_finite() {
            return Err(Error::invalid(format!("evaluation point {t} is not finite")));
        }
        let error_bound = match &self.tail {
            Some(_) if t < 0.0 => {
                return Err(Error::invalid(format!(
                    "t < 0 with certified tail (t = {t}); tail bound holds only for t >= 0"
                )))
            }
            Some(tail) => tail.sum_bound * (-tail.lambda_floor * t).exp(),
            None => 0.0,
        };
        let value = self
            .terms
            .iter()
            .rev()
            .map(|term| term.alpha * (-term.lambda * t).exp())
            .collect::<CompensatedSum>()
            .value();
        Ok(SeriesValue { value, error_bound })
    }

    /// Shifts exponents so the smallest one becomes exactly 1.
    ///
    /// Returns `(shifted, shift)` with `φ(t) = e^{−shift·t} · shifted(t)` and
    /// `shift = λ₁ − 1`.
    pub fn shift_normalize(&self) -> Result<(DirichletSeries, f64)> {
        let lambda_min = self.min_exponent();
        let shift = lambda_min - 1.0;
        let terms = self
            .terms
            .iter()
            .map(|t| Term::new(t.alpha, (t.lambda - lambda_min) + 1.0));
        let mut shifted = DirichletSeries::new(terms)?;
        if let Some(tail) = &self.tail {
            let floor = tail.lambda_floor - shift;
            if !(floor > 0.0) {
                return Err(Error::invalid(format!(
                    "tail floor {} drops to {floor} after shifting by {shift}",
                    tail.lambda_floor
                )));
            }
            shifted.tail = Some(TailModel::new(tail.sum_bound, floor)?);
        }
        Ok((shifted, shift))
    }

    /// Divides every coefficient by `λⱼᵏ`. The result `ψ` satisfies `ψ⁽ᵏ⁾ = (−1)ᵏ φ`.
    ///
    /// The division is carried out one factor of `λⱼ` at a time, so reducing by `j`
    /// and then by `k` reproduces reducing by `j + k` bit for bit.
    pub fn antiderivative_reduce(&self, k: u32) -> Result<DirichletSeries> {
        if let Some(t) = self.terms.iter().find(|t| t.lambda <= 0.0) {
            return Err(Error::invalid(format!(
                "antiderivative reduction needs positive exponents, found {}; shift-normalize first",
                t.lambda
            )));
        }
        let terms = self.terms.iter().map(|t| {
            let mut alpha = t.alpha;
            for _ in 0..k {
                alpha /= t.lambda;
            }
            Term::new(alpha, t.lambda)
        });
        let mut reduced = DirichletSeries::new(terms)?;
        if let Some(tail) = &self.tail {
            let mut weighted: BTreeMap<u32, f64> = tail
                .weighted
                .iter()
                .filter(|(&m, _)| m > k)
                .map(|(&m, &b)| (m - k, b))
                .collect();
            let base = tail.weighted_sum_bound(k);
            weighted.remove(&0);
            reduced.tail = Some(TailModel::with_weighted_bounds(base, tail.lambda_floor, weighted)?);
        }
        Ok(reduced)
    }

    /// Parses the structured-text form
    /// `{"terms": [[alpha, lambda], ...], "tail": {...} | null}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: SeriesDocument =
            serde_json::from_str(s).map_err(|e| Error::parse(format!("series document: {e}")))?;
        doc.try_into()
    }

    pub fn to_document(&self) -> SeriesDocument {
        SeriesDocument {
            terms: self
                .terms
                .iter()
                .map(|t| [Value::from(t.alpha), Value::from(t.lambda)])
                .collect(),
            tail: self.tail.as_ref().map(|t| TailDocument {
                sum_bound: Value::from(t.sum_bound),
                lambda_floor: Value::from(t.lambda_floor),
                weighted_bounds: t
                    .weighted
                    .iter()
                    .map(|(k, b)| (k.to_string(), Value::from(*b)))
                    .collect(),
            }),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("series documents always serialize")
    }
}

fn ordered_key(x: f64) -> u64 {
    // Monotone map from finite f64 to u64 so BTreeMap orders by value.
    let bits = x.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

/// Serialized form of a [`DirichletSeries`]. Numbers may be JSON numbers or strings
/// holding a decimal or rational literal such as `"1/3"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub terms: Vec<[Value; 2]>,
    #[serde(default)]
    pub tail: Option<TailDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TailDocument {
    pub sum_bound: Value,
    pub lambda_floor: Value,
    #[serde(default)]
    pub weighted_bounds: BTreeMap<String, Value>,
}

/// Reads a JSON number or a rational/decimal string as `f64`.
pub fn number_from_value(v: &Value) -> Result<f64> {
    let x = match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::parse(format!("number {n} is not representable")))?,
        Value::String(s) => {
            use num_traits::ToPrimitive;
            parse_rational(s)?
                .to_f64()
                .ok_or_else(|| Error::parse(format!("`{s}` is out of range")))?
        }
        other => return Err(Error::parse(format!("expected a number, found {other}"))),
    };
    if !x.is_finite() {
        return Err(Error::parse(format!("{v} is not finite")));
    }
    Ok(x)
}

impl TryFrom<SeriesDocument> for DirichletSeries {
    type Error = Error;

    fn try_from(doc: SeriesDocument) -> Result<Self> {
        let terms = doc
            .terms
            .iter()
            .map(|[a, l]| Ok(Term::new(number_from_value(a)?, number_from_value(l)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut series = DirichletSeries::new(terms)?;
        if let Some(tail) = doc.tail {
            let weighted = tail
                .weighted_bounds
                .iter()
                .map(|(k, v)| {
                    let k: u32 = k
                        .parse()
                        .map_err(|_| Error::parse(format!("weightedBounds key `{k}` is not an order")))?;
                    Ok((k, number_from_value(v)?))
                })
                .collect::<Result<BTreeMap<_, _>>>()?;
            series.tail = Some(TailModel::with_weighted_bounds(
                number_from_value(&tail.sum_bound)?,
                number_from_value(&tail.lambda_floor)?,
                weighted,
            )?);
        }
        Ok(series)
    }
}

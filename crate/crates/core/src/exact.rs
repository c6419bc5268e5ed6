//! Exact numbers of the form `q₀ + q₁·ξ` with rational `q₀, q₁` and one named irrational `ξ`.
//!
//! Rationality of such a number is decidable without tolerance: it is rational exactly
//! when the coefficient of `ξ` vanishes. This is what the actuator zero-set analysis relies on.
//!
//! Literals follow the grammar `RAT ( '+' | '-' ) RAT '*' TAG`, where `RAT` is an integer,
//! `p/q`, or a decimal literal. A bare `RAT`, `RAT*TAG` or `TAG` is also accepted, and
//! decimals are read exactly (`"0.3"` is `3/10`).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A named irrational constant with a certified floating-point enclosure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IrrationalTag {
    /// `√n` for a positive integer `n` that is not a perfect square.
    Sqrt(u64),
    Pi,
    E,
}

impl IrrationalTag {
    /// Closest double to the constant. IEEE square root and the std constants are
    /// correctly rounded, so the true value lies within one ulp.
    pub fn value(&self) -> f64 {
        match self {
            IrrationalTag::Sqrt(n) => (*n as f64).sqrt(),
            IrrationalTag::Pi => std::f64::consts::PI,
            IrrationalTag::E => std::f64::consts::E,
        }
    }

    /// Interval `[lo, hi]` guaranteed to contain the constant.
    pub fn enclosure(&self) -> (f64, f64) {
        let v = self.value();
        (v.next_down(), v.next_up())
    }
}

impl fmt::Display for IrrationalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrationalTag::Sqrt(n) => write!(f, "sqrt{n}"),
            IrrationalTag::Pi => f.write_str("pi"),
            IrrationalTag::E => f.write_str("e"),
        }
    }
}

impl FromStr for IrrationalTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pi" => Ok(IrrationalTag::Pi),
            "e" => Ok(IrrationalTag::E),
            _ => {
                let digits = s
                    .strip_prefix("sqrt")
                    .ok_or_else(|| Error::parse(format!("unknown irrational tag `{s}`")))?;
                let n: u64 = digits
                    .parse()
                    .map_err(|_| Error::parse(format!("bad radicand in tag `{s}`")))?;
                let r = n.isqrt();
                if n == 0 || r * r == n {
                    return Err(Error::parse(format!(
                        "`{s}` is rational; only non-square radicands are irrational tags"
                    )));
                }
                Ok(IrrationalTag::Sqrt(n))
            }
        }
    }
}

/// `rat + irr·tag`, kept canonical: `tag` is `None` exactly when `irr == 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactReal {
    rat: BigRational,
    irr: BigRational,
    tag: Option<IrrationalTag>,
}

impl ExactReal {
    pub fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }

    pub fn from_rational(rat: BigRational) -> Self {
        ExactReal {
            rat,
            irr: BigRational::zero(),
            tag: None,
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `p/q`; panics on `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn new(rat: BigRational, irr: BigRational, tag: Option<IrrationalTag>) -> Result<Self> {
        if irr.is_zero() {
            return Ok(Self::from_rational(rat));
        }
        let tag = tag.ok_or_else(|| Error::invalid("nonzero irrational part needs a tag"))?;
        Ok(ExactReal {
            rat,
            irr,
            tag: Some(tag),
        })
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rat
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.irr
    }

    pub fn tag(&self) -> Option<IrrationalTag> {
        self.tag
    }

    /// Exact decision, no tolerance involved.
    pub fn is_rational(&self) -> bool {
        self.irr.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.irr.is_zero()
    }

    /// True iff the value is an even integer (in particular rational).
    pub fn is_even_integer(&self) -> bool {
        self.is_rational() && self.rat.is_integer() && self.rat.numer().is_even()
    }

    fn merge_tags(&self, other: &Self) -> Result<Option<IrrationalTag>> {
        match (self.tag, other.tag) {
            (Some(a), Some(b)) if a != b => Err(Error::TagMismatch {
                left: a.to_string(),
                right: b.to_string(),
            }),
            (a, b) => Ok(a.or(b)),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let tag = self.merge_tags(other)?;
        Self::new(&self.rat + &other.rat, &self.irr + &other.irr, tag)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let tag = self.merge_tags(other)?;
        Self::new(&self.rat - &other.rat, &self.irr - &other.irr, tag)
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self::new(&self.rat * factor, &self.irr * factor, self.tag).expect("tag is preserved")
    }

    pub fn scale_int(&self, factor: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(factor)))
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.rat.to_f64().unwrap_or(f64::NAN);
        match self.tag {
            None => r,
            Some(tag) => r + self.irr.to_f64().unwrap_or(f64::NAN) * tag.value(),
        }
    }

    /// Interval containing the exact value, accounting for the tag enclosure and
    /// the roundings in `to_f64`.
    pub fn enclosure(&self) -> (f64, f64) {
        let v = self.to_f64();
        let mut err = 2.0 * f64::EPSILON * v.abs();
        if let Some(tag) = self.tag {
            let (lo, hi) = tag.enclosure();
            let irr = self.irr.to_f64().unwrap_or(f64::NAN).abs();
            err += irr * (hi - lo) + 2.0 * f64::EPSILON * irr * hi;
        }
        err += f64::MIN_POSITIVE;
        (v - err, v + err)
    }

    /// Certified comparison; `None` only if the enclosure of the difference straddles zero.
    pub fn certified_cmp(&self, other: &Self) -> Result<Option<Ordering>> {
        let d = self.checked_sub(other)?;
        if d.is_rational() {
            return Ok(Some(d.rat.cmp(&BigRational::zero())));
        }
        let (lo, hi) = d.enclosure();
        Ok(if lo > 0.0 {
            Some(Ordering::Greater)
        } else if hi < 0.0 {
            Some(Ordering::Less)
        } else {
            None
        })
    }

    /// `cos(π·x)` with the rational part of `x` reduced modulo 2 in exact arithmetic,
    /// so that equal phases produce bit-identical results.
    pub fn cos_pi(&self) -> f64 {
        let two = BigRational::from_integer(BigInt::from(2));
        let mut r = &self.rat - (&self.rat / &two).floor() * &two;
        match self.tag {
            None => {
                if r > BigRational::one() {
                    r = &two - r;
                }
                (std::f64::consts::PI * r.to_f64().unwrap_or(f64::NAN)).cos()
            }
            Some(tag) => {
                let phase = r.to_f64().unwrap_or(f64::NAN)
                    + (self.irr.to_f64().unwrap_or(f64::NAN) * tag.value()).rem_euclid(2.0);
                (std::f64::consts::PI * phase).cos()
            }
        }
    }
}

impl Add for &ExactReal {
    type Output = Result<ExactReal>;
    fn add(self, rhs: Self) -> Self::Output {
        self.checked_add(rhs)
    }
}

impl Sub for &ExactReal {
    type Output = Result<ExactReal>;
    fn sub(self, rhs: Self) -> Self::Output {
        self.checked_sub(rhs)
    }
}

impl Neg for &ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        self.scale_int(-1)
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_rational(&self.rat))?;
        if let Some(tag) = self.tag {
            let sign = if self.irr.is_negative() { '-' } else { '+' };
            write!(f, "{sign}{}*{tag}", fmt_rational(&self.irr.abs()))?;
        }
        Ok(())
    }
}

/// Parses an exact rational literal: integer, `p/q` with `q > 0`, or a decimal.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::parse(format!("`{s}` is not a rational literal"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = parse_int(p.trim()).ok_or_else(bad)?;
        let q: BigInt = parse_int(q.trim()).ok_or_else(bad)?;
        if !q.is_positive() {
            return Err(Error::parse(format!("denominator in `{s}` must be positive")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (neg, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if (int_part.is_empty() && frac_part.is_empty())
        || !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Ok(if neg { -r } else { r })
}

fn parse_int(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix('-').or_else(|| s.strip_prefix('+')).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_term(term: &str) -> Result<ExactReal> {
    let term = term.trim();
    if let Some((coef, tag)) = term.split_once('*') {
        let irr = parse_rational(coef)?;
        let tag: IrrationalTag = tag.trim().parse()?;
        return ExactReal::new(BigRational::zero(), irr, Some(tag));
    }
    if term.starts_with(|c: char| c.is_ascii_alphabetic()) {
        let tag: IrrationalTag = term.parse()?;
        return ExactReal::new(BigRational::zero(), BigRational::one(), Some(tag));
    }
    Ok(ExactReal::from_rational(parse_rational(term)?))
}

impl FromStr for ExactReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::parse("empty exact-number literal"));
        }
        // Split on top-level signs, keeping each sign with its term. A sign directly
        // after '/' or '*' belongs to the following literal.
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut current = String::new();
        let mut negative = false;
        let mut prev: Option<char> = None;
        for c in compact.chars() {
            let is_split = (c == '+' || c == '-') && !matches!(prev, None | Some('/') | Some('*'));
            if is_split {
                terms.push((negative, std::mem::take(&mut current)));
                negative = c == '-';
            } else if (c == '+' || c == '-') && prev.is_none() {
                negative = c == '-';
            } else {
                current.push(c);
            }
            prev = Some(c);
        }
        terms.push((negative, current));

        let mut acc = ExactReal::zero();
        for (neg, body) in terms {
            if body.is_empty() {
                return Err(Error::parse(format!("malformed exact-number literal `{s}`")));
            }
            let mut t = parse_term(&body)?;
            if neg {
                t = -&t;
            }
            acc = acc.checked_add(&t)?;
        }
        Ok(acc)
    }
}

impl Serialize for ExactReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

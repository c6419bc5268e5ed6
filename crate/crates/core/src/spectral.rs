//! Dirichlet Laplacian on `(0, 1)` and the actuator analysis for `ω = (a, b)`.
//!
//! Eigenpairs are `φⱼ(x) = √2 sin(jπx)` with `μⱼ = −(jπ)²`. A lumped actuator `1_ω`
//! reaches mode `j` through `βⱼ = ∫_ω φⱼ = √2 (cos jπa − cos jπb)/(jπ)`, which vanishes
//! exactly when `j(b − a)` or `j(a + b)` is an even integer. Endpoints are [`ExactReal`]s
//! so that this test is decided without rounding.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ExactReal;

/// Default enumeration bound for blocked-mode prefixes.
pub const DEFAULT_JMAX: usize = 256;

/// `μⱼ = −(jπ)²`.
pub fn eigenvalue(j: usize) -> f64 {
    -decay_exponent(j)
}

/// `λⱼ = (jπ)²`.
pub fn decay_exponent(j: usize) -> f64 {
    let w = j as f64 * PI;
    w * w
}

/// `φⱼ(x) = √2 sin(jπx)`.
pub fn eigenfunction(j: usize, x: f64) -> f64 {
    SQRT_2 * (j as f64 * PI * x).sin()
}

/// Eigenvalues of the Dirichlet Laplacian on the rectangle `(0, w) × (0, h)` are all
/// simple exactly when `w/h` is irrational. Only the ratio test is provided.
pub fn rectangle_spectrum_is_simple(aspect_ratio: &ExactReal) -> bool {
    !aspect_ratio.is_rational()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActuatorKind {
    /// Control `u(x, t)` supported on `ω`.
    Distributed,
    /// Control `u(t)` entering through the profile `1_ω`.
    Lumped,
}

impl fmt::Display for ActuatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActuatorKind::Distributed => "distributed",
            ActuatorKind::Lumped => "lumped",
        })
    }
}

/// Actuator support `ω = (a, b)` with `0 ≤ a < b ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actuator {
    a: ExactReal,
    b: ExactReal,
    kind: ActuatorKind,
}

impl Actuator {
    pub fn new(a: ExactReal, b: ExactReal, kind: ActuatorKind) -> Result<Self> {
        use std::cmp::Ordering::*;
        let zero = ExactReal::zero();
        let one = ExactReal::from_integer(1);
        let undecided = || Error::invalid(format!("cannot certify the ordering of {a} and {b}"));
        if a == b {
            return Err(Error::invalid(format!("degenerate actuator: a = b = {a}")));
        }
        if a.certified_cmp(&b)?.ok_or_else(undecided)? != Less {
            return Err(Error::invalid(format!("actuator needs a < b, got a = {a}, b = {b}")));
        }
        if a.certified_cmp(&zero)?.ok_or_else(undecided)? == Less {
            return Err(Error::invalid(format!("actuator endpoint a = {a} is below 0")));
        }
        if b.certified_cmp(&one)?.ok_or_else(undecided)? == Greater {
            return Err(Error::invalid(format!("actuator endpoint b = {b} exceeds 1")));
        }
        Ok(Actuator { a, b, kind })
    }

    /// Parses both endpoints from the exact-number grammar.
    pub fn parse(a: &str, b: &str, kind: ActuatorKind) -> Result<Self> {
        Self::new(a.parse()?, b.parse()?, kind)
    }

    pub fn a(&self) -> &ExactReal {
        &self.a
    }

    pub fn b(&self) -> &ExactReal {
        &self.b
    }

    pub fn kind(&self) -> ActuatorKind {
        self.kind
    }

    pub fn with_kind(&self, kind: ActuatorKind) -> Self {
        Actuator { kind, ..self.clone() }
    }

    pub fn length(&self) -> f64 {
        self.b.checked_sub(&self.a).expect("tags checked at construction").to_f64()
    }

    fn difference(&self) -> ExactReal {
        self.b.checked_sub(&self.a).expect("tags checked at construction")
    }

    fn sum(&self) -> ExactReal {
        self.a.checked_add(&self.b).expect("tags checked at construction")
    }

    /// `∫_ω φⱼ φₖ dx`, the Gram matrix of the restricted eigenfunctions.
    pub fn product_overlap(&self, j: usize, k: usize) -> f64 {
        let (a, b) = (self.a.to_f64(), self.b.to_f64());
        // 2 sin(jπx) sin(kπx) = cos((j−k)πx) − cos((j+k)πx)
        let sin_term = |m: f64| ((m * PI * b).sin() - (m * PI * a).sin()) / (m * PI);
        let plus = sin_term((j + k) as f64);
        if j == k {
            (b - a) - plus
        } else {
            sin_term(j as f64 - k as f64) - plus
        }
    }
}

impl fmt::Display for Actuator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} omega = ({}, {})", self.kind, self.a, self.b)
    }
}

/// `βⱼ = ∫_ω φⱼ dx = √2 (cos jπa − cos jπb) / (jπ)`.
///
/// Phases are reduced modulo 2 exactly, so modes in the zero set evaluate to `0.0`
/// exactly when the endpoints are rational.
pub fn overlap(actuator: &Actuator, j: usize) -> f64 {
    assert!(j >= 1, "modes are numbered from 1");
    let ca = actuator.a.scale_int(j as i64).cos_pi();
    let cb = actuator.b.scale_int(j as i64).cos_pi();
    SQRT_2 * (ca - cb) / (j as f64 * PI)
}

/// Exact decision of `βⱼ = 0`, i.e. `j(b − a) ∈ 2ℤ` or `j(a + b) ∈ 2ℤ`.
pub fn overlap_is_zero(actuator: &Actuator, j: usize) -> bool {
    assert!(j >= 1, "modes are numbered from 1");
    let j = j as i64;
    actuator.difference().scale_int(j).is_even_integer() || actuator.sum().scale_int(j).is_even_integer()
}

/// `γⱼ = ∫_ω φⱼ² dx`, positive for every interval of positive length.
pub fn restricted_energy(actuator: &Actuator, j: usize) -> f64 {
    actuator.product_overlap(j, j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "controllable")]
    Controllable,
    #[serde(rename = "not-controllable")]
    NotControllable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Controllable => "controllable",
            Verdict::NotControllable => "not-controllable",
        })
    }
}

/// Modes `j` with `j mod modulus ∈ residues`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueClass {
    pub modulus: u64,
    pub residues: Vec<u64>,
}

impl ResidueClass {
    pub fn contains(&self, j: usize) -> bool {
        self.residues.contains(&(j as u64 % self.modulus))
    }
}

/// Blocked set `I = {j : βⱼ = 0}` of a lumped actuator and the controllable subspace
/// `V = span{φⱼ : j ∉ I}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ControllabilityReport {
    pub verdict: Verdict,
    pub blocked_prefix: Vec<usize>,
    /// `j ∈ I` iff `j` lies in one of these classes (exact, for all `j`).
    pub modulus_characterization: Vec<ResidueClass>,
    pub j_max: usize,
    pub subspace: String,
}

impl ControllabilityReport {
    pub fn is_blocked(&self, j: usize) -> bool {
        self.modulus_characterization.iter().any(|c| c.contains(j))
            || (j <= self.j_max && self.blocked_prefix.binary_search(&j).is_ok())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::parse(format!("controllability report: {e}")))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Residue class of the `j` with `j·p/q ∈ 2ℤ` (`p/q` in lowest terms, `p ≠ 0`).
fn even_multiple_class(d: &ExactReal) -> Option<ResidueClass> {
    if !d.is_rational() || d.is_zero() {
        return None;
    }
    let r = d.rational_part();
    let p = r.numer().abs();
    let q = r.denom().to_u64()?;
    let modulus = if p.is_odd() { 2 * q } else { q };
    Some(ResidueClass {
        modulus,
        residues: vec![0],
    })
}

/// Enumerates `I ∩ [1, j_max]` and derives the exact modular description of `I`.
pub fn blocked_set(actuator: &Actuator, j_max: usize) -> Result<ControllabilityReport> {
    if j_max == 0 {
        return Err(Error::invalid("jMax must be at least 1"));
    }
    let blocked_prefix: Vec<usize> = (1..=j_max).filter(|&j| overlap_is_zero(actuator, j)).collect();

    let mut classes: Vec<ResidueClass> = [actuator.difference(), actuator.sum()]
        .iter()
        .filter_map(even_multiple_class)
        .collect();
    classes.sort_by_key(|c| c.modulus);
    classes.dedup();
    // Multiples of m are already covered by any class whose modulus divides m.
    let moduli: Vec<u64> = classes.iter().map(|c| c.modulus).collect();
    classes.retain(|c| !moduli.iter().any(|&m| m != c.modulus && c.modulus % m == 0));

    let verdict = if classes.is_empty() {
        Verdict::Controllable
    } else {
        Verdict::NotControllable
    };
    let subspace = if classes.is_empty() {
        "V = H = span{phi_j : j >= 1}".to_string()
    } else {
        let conds: Vec<String> = classes.iter().map(|c| format!("j != 0 mod {}", c.modulus)).collect();
        format!("V = span{{phi_j : {}}}", conds.join(" and "))
    };
    Ok(ControllabilityReport {
        verdict,
        blocked_prefix,
        modulus_characterization: classes,
        j_max,
        subspace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWitness {
    pub mode: usize,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DistributedReport {
    pub verdict: Verdict,
    /// `γⱼ = ∫_ω φⱼ² dx > 0` for every checked mode.
    pub witnesses: Vec<EnergyWitness>,
    pub j_max: usize,
}

/// Distributed control on any interval of positive length is approximately
/// controllable, since `1_ω φⱼ ≢ 0` for every `j`; modes up to `j_max` are witnessed
/// by `γⱼ > 0`.
pub fn distributed_controllability(actuator: &Actuator, j_max: usize) -> Result<DistributedReport> {
    if actuator.kind() != ActuatorKind::Distributed {
        return Err(Error::invalid("distributed analysis needs a distributed actuator"));
    }
    let witnesses: Vec<EnergyWitness> = (1..=j_max)
        .map(|mode| EnergyWitness {
            mode,
            gamma: restricted_energy(actuator, mode),
        })
        .collect();
    if let Some(w) = witnesses.iter().find(|w| !(w.gamma > 0.0)) {
        return Err(Error::invalid(format!(
            "restricted energy of mode {} is not positive ({}); actuator too short to resolve",
            w.mode, w.gamma
        )));
    }
    Ok(DistributedReport {
        verdict: Verdict::Controllable,
        witnesses,
        j_max,
    })
}

//! Moment-method control synthesis for the heat equation on `(0, 1)`.
//!
//! In modal coordinates the terminal state of mode `j` under a lumped control is
//! `zⱼ(T) = e^{μⱼT} z0ⱼ + βⱼ ∫₀ᵀ e^{μⱼ(T−s)} u(s) ds`, so steering to `z1` amounts to
//! prescribing the moments `∫₀ᵀ e^{μⱼ(T−s)} u(s) ds = (z1ⱼ − e^{μⱼT} z0ⱼ)/βⱼ`. We look for
//! `u(s) = Σₖ cₖ e^{μₖ(T−s)}`, the minimum-norm form, which turns the moment problem into
//! the Gram system `G c = m`.
//!
//! The heat Gram matrix degrades quickly with the number of modes (condition number
//! around `1e9` at eight modes), so every solve reports its residual and condition
//! number, and a Tikhonov term can be added.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{exp_integral, fmt_f64};
use crate::spectral::{self, Actuator, ActuatorKind};

/// Largest lumped mode count accepted without regularization.
pub const DEFAULT_MODE_CAP: usize = 8;

/// Relative residual above which an unregularized solve is rejected.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;

pub type ControlKind = ActuatorKind;

/// Coordinates `z₁..z_N` of a state in the eigenbasis `{φⱼ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectralState {
    coeffs: Vec<f64>,
}

impl SpectralState {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("state coefficients must be finite"));
        }
        Ok(SpectralState { coeffs })
    }

    pub fn zeros(modes: usize) -> Self {
        SpectralState {
            coeffs: vec![0.0; modes],
        }
    }

    /// The eigenfunction `φⱼ` as a state with `modes` coordinates.
    pub fn eigenmode(j: usize, modes: usize) -> Self {
        assert!(j >= 1 && j <= modes, "mode {j} outside 1..={modes}");
        let mut s = Self::zeros(modes);
        s.coeffs[j - 1] = 1.0;
        s
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    /// Coordinate of mode `j` (1-based); zero beyond the stored range.
    pub fn mode(&self, j: usize) -> f64 {
        self.coeffs.get(j - 1).copied().unwrap_or(0.0)
    }

    /// `‖z‖ = (Σ zⱼ²)^{1/2}` by Parseval.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Copy truncated or zero-padded to `modes` coordinates.
    pub fn resized(&self, modes: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(modes, 0.0);
        SpectralState { coeffs }
    }

    /// `‖self − other‖` over the union of their mode ranges.
    pub fn distance(&self, other: &SpectralState) -> f64 {
        let n = self.modes().max(other.modes());
        (1..=n)
            .map(|j| (self.mode(j) - other.mode(j)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Free evolution `zⱼ ↦ e^{μⱼt} zⱼ`.
    pub fn evolve_free(&self, t: f64) -> Self {
        SpectralState {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (spectral::eigenvalue(i + 1) * t).exp() * c)
                .collect(),
        }
    }
}

impl FromStr for SpectralState {
    type Err = Error;

    /// Accepts `0`, a JSON array of coordinates, or a sum such as `phi1`, `phi3+0.5*phi4`.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.starts_with('[') {
            let coeffs: Vec<f64> =
                serde_json::from_str(&compact).map_err(|e| Error::parse(format!("state `{s}`: {e}")))?;
            return Self::new(coeffs);
        }
        let bad = || Error::parse(format!("malformed state expression `{s}`"));
        let mut coeffs: Vec<f64> = Vec::new();
        let mut rest = compact.as_str();
        if rest.is_empty() {
            return Err(bad());
        }
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'-' => (-1.0, &rest[1..]),
                b'+' => (1.0, &rest[1..]),
                _ => (1.0, rest),
            };
            let end = body
                .char_indices()
                .skip(1)
                .find(|&(i, c)| (c == '+' || c == '-') && !body[..i].ends_with(['e', 'E', '*']))
                .map_or(body.len(), |(i, _)| i);
            let term = &body[..end];
            rest = &body[end..];
            let (coef, basis) = match term.split_once('*') {
                Some((c, b)) => (c.parse::<f64>().map_err(|_| bad())?, b),
                None if term.starts_with("phi") => (1.0, term),
                None => {
                    let v: f64 = term.parse().map_err(|_| bad())?;
                    if v != 0.0 {
                        return Err(bad());
                    }
                    continue;
                }
            };
            let j: usize = basis
                .strip_prefix("phi")
                .and_then(|d| d.parse().ok())
                .filter(|&j| j >= 1)
                .ok_or_else(bad)?;
            if coeffs.len() < j {
                coeffs.resize(j, 0.0);
            }
            coeffs[j - 1] += sign * coef;
        }
        Self::new(coeffs)
    }
}

impl fmt::Display for SpectralState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(&self.coeffs).expect("finite floats serialize"))
    }
}

/// Exponential-sum control.
///
/// Lumped: `u(s) = Σₖ cₖ e^{μₖ(T−s)}`. Distributed: `u(x, s) = Σₖ cₖ e^{μₖ(T−s)} ψₖ(x)`
/// with spatial profiles `ψₖ = 1_ω Σₗ profiles[k][l] φₗ₊₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlFunction {
    pub kind: ControlKind,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub exponents: Vec<f64>,
    pub coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub profiles: Vec<Vec<f64>>,
}

impl ControlFunction {
    pub fn lumped(horizon: f64, exponents: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        let c = ControlFunction {
            kind: ControlKind::Lumped,
            horizon,
            exponents,
            coeffs,
            profiles: Vec::new(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn distributed(
        horizon: f64,
        exponents: Vec<f64>,
        coeffs: Vec<f64>,
        profiles: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let c = ControlFunction {
            kind: ControlKind::Distributed,
            horizon,
            exponents,
            coeffs,
            profiles,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn zero(kind: ControlKind, horizon: f64) -> Self {
        ControlFunction {
            kind,
            horizon,
            exponents: Vec::new(),
            coeffs: Vec::new(),
            profiles: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::invalid("control horizon must be positive"));
        }
        if self.exponents.len() != self.coeffs.len() {
            return Err(Error::invalid(format!(
                "{} exponents but {} coefficients",
                self.exponents.len(),
                self.coeffs.len()
            )));
        }
        if self.exponents.iter().chain(&self.coeffs).any(|v| !v.is_finite()) {
            return Err(Error::invalid("control exponents and coefficients must be finite"));
        }
        match self.kind {
            ControlKind::Lumped if !self.profiles.is_empty() => {
                Err(Error::invalid("lumped controls carry no spatial profiles"))
            }
            ControlKind::Distributed => {
                if self.profiles.len() != self.coeffs.len() {
                    return Err(Error::invalid(format!(
                        "{} profiles for {} control components",
                        self.profiles.len(),
                        self.coeffs.len()
                    )));
                }
                let width = self.profile_width();
                if self.profiles.iter().any(|p| p.len() != width || p.iter().any(|v| !v.is_finite())) {
                    return Err(Error::invalid("profiles must be finite and of equal length"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Number of eigenfunctions the spatial profiles are expanded in.
    pub fn profile_width(&self) -> usize {
        self.profiles.first().map_or(0, Vec::len)
    }

    /// Temporal amplitude `cₖ e^{μₖ(T−s)}` of component `k`.
    pub fn amplitude(&self, k: usize, s: f64) -> f64 {
        self.coeffs[k] * (self.exponents[k] * (self.horizon - s)).exp()
    }

    /// `u(s)` for a lumped control; the sum of temporal amplitudes otherwise.
    pub fn value(&self, s: f64) -> f64 {
        (0..self.coeffs.len()).map(|k| self.amplitude(k, s)).sum()
    }

    /// `u(x, s)` on the actuator support for a distributed control.
    pub fn field_on_support(&self, x: f64, s: f64) -> f64 {
        (0..self.coeffs.len())
            .map(|k| {
                let psi: f64 = self.profiles[k]
                    .iter()
                    .enumerate()
                    .map(|(l, p)| p * spectral::eigenfunction(l + 1, x))
                    .sum();
                self.amplitude(k, s) * psi
            })
            .sum()
    }

    /// The same control seen from time `from` on: a control on `[0, T − from]`.
    pub fn restrict(&self, from: f64) -> Result<Self> {
        if !(from >= 0.0 && from < self.horizon) {
            return Err(Error::invalid(format!(
                "restriction point {from} outside [0, {})",
                self.horizon
            )));
        }
        Ok(ControlFunction {
            horizon: self.horizon - from,
            ..self.clone()
        })
    }

    /// `‖u‖²_{L²(0,T)} = cᵀ G c` for a lumped control.
    pub fn energy(&self) -> Result<f64> {
        if self.coeffs.is_empty() {
            return Ok(0.0);
        }
        let g = gram_matrix(&self.exponents, self.horizon)?;
        let c = DVector::from_column_slice(&self.coeffs);
        Ok(c.dot(&(&g * &c)))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: ControlFunction =
            serde_json::from_str(s).map_err(|e| Error::parse(format!("control document: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("controls always serialize")
    }

    /// `s,u(s)` rows for lumped controls; `s,amp_1,..,amp_K` for distributed ones.
    pub fn write_csv<W: std::io::Write>(&self, out: W, points: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::invalid(format!("csv write failed: {e}"));
        let grid = crate::numeric::linspace(0.0, self.horizon, points.max(2));
        match self.kind {
            ControlKind::Lumped => {
                w.write_record(["s", "u"]).map_err(err)?;
                for s in grid {
                    w.write_record([fmt_f64(s), fmt_f64(self.value(s))]).map_err(err)?;
                }
            }
            ControlKind::Distributed => {
                let mut header = vec!["s".to_string()];
                header.extend((1..=self.coeffs.len()).map(|k| format!("amp_{k}")));
                w.write_record(&header).map_err(err)?;
                for s in grid {
                    let mut row = vec![fmt_f64(s)];
                    row.extend((0..self.coeffs.len()).map(|k| fmt_f64(self.amplitude(k, s))));
                    w.write_record(&row).map_err(err)?;
                }
            }
        }
        w.flush().map_err(|e| Error::invalid(format!("csv write failed: {e}")))
    }
}

/// `G_{jk} = ∫₀ᵀ e^{(μⱼ+μₖ)(T−s)} ds = (e^{(μⱼ+μₖ)T} − 1)/(μⱼ+μₖ)`, with the limit `T`
/// when `μⱼ + μₖ` vanishes.
pub fn gram_matrix(exponents: &[f64], horizon: f64) -> Result<DMatrix<f64>> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
    }
    if exponents.iter().any(|e| !e.is_finite()) {
        return Err(Error::invalid("exponents must be finite"));
    }
    for (i, a) in exponents.iter().enumerate() {
        if exponents[i + 1..].contains(a) {
            return Err(Error::invalid(format!("duplicate exponent {a} makes the Gram matrix singular")));
        }
    }
    let n = exponents.len();
    Ok(DMatrix::from_fn(n, n, |j, k| exp_integral(exponents[j] + exponents[k], horizon)))
}

/// `λ_max / λ_min` of a symmetric matrix; infinite if it is not positive definite.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Moments `m_j` to be matched by `∫₀ᵀ e^{μⱼ(T−s)} u(s) ds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProblem {
    pub exponents: Vec<f64>,
    pub moments: Vec<f64>,
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl MomentProblem {
    pub fn new(exponents: Vec<f64>, moments: Vec<f64>, horizon: f64) -> Result<Self> {
        if exponents.len() != moments.len() {
            return Err(Error::invalid("one moment per exponent is required"));
        }
        if exponents.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::invalid("moment exponents must be strictly decreasing"));
        }
        if moments.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("moments must be finite"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid("horizon must be positive"));
        }
        Ok(MomentProblem {
            exponents,
            moments,
            horizon,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MomentSolution {
    pub control: ControlFunction,
    /// `‖G c − m‖∞` against the unregularized Gram matrix.
    pub moment_residual: f64,
    pub energy: f64,
    pub condition_number: f64,
}

/// Solves `(G + reg·I) c = m` by Cholesky with one step of iterative refinement.
///
/// Without regularization, a residual above `1e-6·‖m‖∞` is reported as a conditioning
/// failure.
pub fn solve_moment_problem(problem: &MomentProblem, regularization: f64) -> Result<MomentSolution> {
    if !(regularization.is_finite() && regularization >= 0.0) {
        return Err(Error::invalid("regularization must be nonnegative"));
    }
    let n = problem.exponents.len();
    let g = gram_matrix(&problem.exponents, problem.horizon)?;
    let m = DVector::from_column_slice(&problem.moments);
    let m_norm = m.amax();
    let threshold = RESIDUAL_TOLERANCE * m_norm;
    let a = &g + DMatrix::identity(n, n) * regularization;
    let chol = a.clone().cholesky().ok_or(Error::Conditioning {
        residual: f64::INFINITY,
        threshold,
    })?;
    let mut c = chol.solve(&m);
    let correction = chol.solve(&(&m - &a * &c));
    c += correction;

    let residual = if n == 0 { 0.0 } else { (&g * &c - &m).amax() };
    if regularization == 0.0 && residual > threshold {
        return Err(Error::Conditioning { residual, threshold });
    }
    let energy = c.dot(&(&g * &c));
    Ok(MomentSolution {
        control: ControlFunction::lumped(problem.horizon, problem.exponents.clone(), c.as_slice().to_vec())?,
        moment_residual: residual,
        energy,
        condition_number: condition_number(&g),
    })
}

/// Horizon, mode count, target accuracy and Tikhonov weight for a synthesis run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisParams {
    pub horizon: f64,
    pub modes: usize,
    pub eps: f64,
    pub regularization: f64,
}

impl SynthesisParams {
    pub fn new(horizon: f64, modes: usize, eps: f64) -> Self {
        SynthesisParams {
            horizon,
            modes,
            eps,
            regularization: 0.0,
        }
    }

    pub fn with_regularization(mut self, regularization: f64) -> Self {
        self.regularization = regularization;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::invalid(format!("horizon T must be positive, got {}", self.horizon)));
        }
        if self.modes == 0 {
            return Err(Error::invalid("at least one mode must be synthesized"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::invalid("eps must be positive"));
        }
        if !(self.regularization.is_finite() && self.regularization >= 0.0) {
            return Err(Error::invalid("regularization must be nonnegative"));
        }
        Ok(())
    }
}

/// Gap `z1ⱼ − e^{μⱼT} z0ⱼ` that the control has to close in mode `j`.
fn modal_gap(z0: &SpectralState, z1: &SpectralState, j: usize, horizon: f64) -> f64 {
    z1.mode(j) - (spectral::eigenvalue(j) * horizon).exp() * z0.mode(j)
}

fn tail_energy(z0: &SpectralState, z1: &SpectralState, from: usize, horizon: f64) -> f64 {
    let dim = z0.modes().max(z1.modes());
    (from..=dim).map(|j| modal_gap(z0, z1, j, horizon).powi(2)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LumpedSynthesis {
    pub control: ControlFunction,
    /// `√(retained mismatch² + skipped blocked gaps² + Σ_{j>N} gapⱼ²)`.
    pub predicted_error: f64,
    pub within_tolerance: bool,
    pub retained_modes: Vec<usize>,
    /// Blocked modes whose gap was at most `eps` and were left to free dynamics.
    pub skipped_blocked_modes: Vec<usize>,
    pub moment_residual: f64,
    pub energy: f64,
    pub gram_condition: f64,
}

/// Lumped control steering `z0` towards `z1` in modes `1..=N`.
///
/// Modes with `βⱼ = 0` cannot be influenced. If such a mode still has a gap larger than
/// `eps` the request fails with [`Error::BlockedMode`]; project the target onto the
/// controllable subspace first. Smaller gaps are left to free dynamics and counted in
/// the predicted error.
pub fn synthesize_lumped(
    z0: &SpectralState,
    z1: &SpectralState,
    actuator: &Actuator,
    params: &SynthesisParams,
) -> Result<LumpedSynthesis> {
    params.validate()?;
    if actuator.kind() != ActuatorKind::Lumped {
        return Err(Error::invalid("lumped synthesis needs a lumped actuator"));
    }
    if params.modes > DEFAULT_MODE_CAP && params.regularization == 0.0 {
        return Err(Error::invalid(format!(
            "{} modes exceed the cap of {DEFAULT_MODE_CAP} for an unregularized solve; pass a regularization",
            params.modes
        )));
    }
    let horizon = params.horizon;
    let mut retained = Vec::new();
    let mut skipped = Vec::new();
    let mut skipped_energy = 0.0;
    let mut exponents = Vec::new();
    let mut moments = Vec::new();
    let mut betas = Vec::new();
    for j in 1..=params.modes {
        let gap = modal_gap(z0, z1, j, horizon);
        if spectral::overlap_is_zero(actuator, j) {
            if gap.abs() > params.eps {
                return Err(Error::BlockedMode {
                    mode: j,
                    actuator: actuator.to_string(),
                    gap,
                });
            }
            skipped.push(j);
            skipped_energy += gap * gap;
            continue;
        }
        let beta = spectral::overlap(actuator, j);
        retained.push(j);
        exponents.push(spectral::eigenvalue(j));
        moments.push(gap / beta);
        betas.push(beta);
    }

    let problem = MomentProblem::new(exponents, moments, horizon)?;
    let solution = solve_moment_problem(&problem, params.regularization)?;
    let g = gram_matrix(&problem.exponents, horizon)?;
    let c = DVector::from_column_slice(&solution.control.coeffs);
    let achieved = &g * &c;
    let mismatch: f64 = betas
        .iter()
        .enumerate()
        .map(|(i, beta)| (beta * (achieved[i] - problem.moments[i])).powi(2))
        .sum();
    let predicted_error =
        (mismatch + skipped_energy + tail_energy(z0, z1, params.modes + 1, horizon)).sqrt();

    Ok(LumpedSynthesis {
        control: solution.control,
        predicted_error,
        within_tolerance: predicted_error <= params.eps,
        retained_modes: retained,
        skipped_blocked_modes: skipped,
        moment_residual: solution.moment_residual,
        energy: solution.energy,
        gram_condition: solution.condition_number,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DistributedSynthesis {
    pub control: ControlFunction,
    /// `√(retained mismatch² + Σ_{j>N} gapⱼ²)`.
    pub predicted_error: f64,
    pub within_tolerance: bool,
    pub energy: f64,
    /// Condition number of `C_{jk} = ∫_ω φⱼ φₖ`.
    pub profile_condition: f64,
}

/// Distributed control steering `z0` towards `z1` in modes `1..=N`, one decoupled
/// component per mode.
///
/// Component `i` uses the profile `ψᵢ ∈ span{1_ω φₖ}` dual to the modes,
/// `∫_ω ψᵢ φₘ = δᵢₘ` for `m ≤ N`, so it forces mode `i` alone among the retained modes.
/// Its amplitude `dᵢ e^{μᵢ(T−s)}` with `dᵢ = gapᵢ / ∫₀ᵀ e^{2μᵢ(T−s)} ds` closes that gap.
/// Modes above `N` receive spillover, visible only in simulation.
pub fn synthesize_distributed(
    z0: &SpectralState,
    z1: &SpectralState,
    actuator: &Actuator,
    params: &SynthesisParams,
) -> Result<DistributedSynthesis> {
    params.validate()?;
    if actuator.kind() != ActuatorKind::Distributed {
        return Err(Error::invalid("distributed synthesis needs a distributed actuator"));
    }
    let n = params.modes;
    let horizon = params.horizon;
    let overlaps = DMatrix::from_fn(n, n, |j, k| actuator.product_overlap(j + 1, k + 1));
    let profile_condition = condition_number(&overlaps);
    let duals = overlaps
        .clone()
        .cholesky()
        .ok_or(Error::Conditioning {
            residual: f64::INFINITY,
            threshold: RESIDUAL_TOLERANCE,
        })?
        .inverse();

    let exponents: Vec<f64> = (1..=n).map(spectral::eigenvalue).collect();
    let gaps: Vec<f64> = (1..=n).map(|j| modal_gap(z0, z1, j, horizon)).collect();
    let g = gram_matrix(&exponents, horizon)?;
    let coeffs: Vec<f64> = (0..n).map(|i| gaps[i] / g[(i, i)]).collect();
    let profiles: Vec<Vec<f64>> = (0..n).map(|i| duals.column(i).iter().copied().collect()).collect();

    // Forcing that component i delivers to mode m is (C·P)_{mi}.
    let coupling = &overlaps * &duals;
    let mismatch: f64 = (0..n)
        .map(|m| {
            let achieved: f64 = (0..n).map(|i| coeffs[i] * g[(m, i)] * coupling[(m, i)]).sum();
            (achieved - gaps[m]).powi(2)
        })
        .sum();
    let energy: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |l| (i, l)))
        .map(|(i, l)| coeffs[i] * coeffs[l] * g[(i, l)] * duals[(i, l)])
        .sum();
    let predicted_error = (mismatch + tail_energy(z0, z1, n + 1, horizon)).sqrt();

    Ok(DistributedSynthesis {
        control: ControlFunction::distributed(horizon, exponents, coeffs, profiles)?,
        predicted_error,
        within_tolerance: predicted_error <= params.eps,
        energy,
        profile_condition,
    })
}

//! Modal simulator for `z' = Δz + 1_ω u` on `(0, 1)` with Dirichlet conditions.
//!
//! The generator is diagonal in `{φⱼ}`, so the mild solution
//! `z(t) = S(t) z₀ + ∫₀ᵗ S(t−s) B u(s) ds` splits into independent scalar equations.
//! Exponential-sum controls are convolved in closed form; arbitrary lumped signals
//! go through adaptive Gauss–Legendre quadrature.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moment::{ControlFunction, ControlKind, SpectralState};
use crate::numeric::{exp_integral, fmt_f64, linspace};
use crate::quadrature;
use crate::series::{DirichletSeries, Term};
use crate::spectral::{self, Actuator, ActuatorKind, ControllabilityReport};
use crate::uniqueness::SampledSignal;

/// Smallest accepted number of time steps.
pub const MIN_STEPS: usize = 16;

/// Quadrature tolerance for signals without a closed-form convolution.
pub const SIGNAL_QUADRATURE_TOL: f64 = 1e-10;

/// What acts on the system during propagation.
#[derive(Clone, Copy)]
pub enum Drive<'a> {
    Free,
    Control(&'a ControlFunction),
    /// Lumped signal `u(s)` given pointwise.
    Signal(&'a dyn Fn(f64) -> f64),
}

impl std::fmt::Debug for Drive<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Drive::Free => f.write_str("Free"),
            Drive::Control(c) => f.debug_tuple("Control").field(c).finish(),
            Drive::Signal(_) => f.write_str("Signal(..)"),
        }
    }
}

/// States on a uniform grid of `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal_error: Option<f64>,
}

impl Trajectory {
    pub fn terminal_state(&self) -> &SpectralState {
        self.states.last().expect("trajectories are never empty")
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("trajectories are never empty")
    }

    /// Records `‖z(T) − z1‖`.
    pub fn with_target(mut self, z1: &SpectralState) -> Self {
        self.terminal_error = Some(self.terminal_state().distance(z1));
        self
    }

    /// `t,z_1..z_M` rows, followed by a `terminalError,<value>` row when a target was set.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let modes = self.terminal_state().modes();
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        let err = |e: csv::Error| Error::invalid(format!("csv write failed: {e}"));
        let mut header = vec!["t".to_string()];
        header.extend((1..=modes).map(|j| format!("z_{j}")));
        w.write_record(&header).map_err(err)?;
        for (t, z) in self.times.iter().zip(&self.states) {
            let mut row = vec![fmt_f64(*t)];
            row.extend(z.coeffs().iter().map(|&v| fmt_f64(v)));
            w.write_record(&row).map_err(err)?;
        }
        if let Some(e) = self.terminal_error {
            w.write_record(["terminalError".to_string(), fmt_f64(e)]).map_err(err)?;
        }
        w.flush().map_err(|e| Error::invalid(format!("csv write failed: {e}")))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let width = r
            .headers()
            .map_err(|e| Error::parse(format!("trajectory csv: {e}")))?
            .len();
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(format!("`{s}` is not a number")))
        };
        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut terminal_error = None;
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::parse(format!("trajectory csv: {e}")))?;
            if &rec[0] == "terminalError" {
                terminal_error = Some(num(rec.get(1).unwrap_or(""))?);
                continue;
            }
            if rec.len() != width {
                return Err(Error::parse(format!("trajectory rows need {width} fields, got {}", rec.len())));
            }
            times.push(num(&rec[0])?);
            let z = rec.iter().skip(1).map(num).collect::<Result<Vec<_>>>()?;
            states.push(SpectralState::new(z)?);
        }
        if times.is_empty() {
            return Err(Error::parse("trajectory csv has no rows"));
        }
        Ok(Trajectory {
            times,
            states,
            terminal_error,
        })
    }
}

/// Forcing weights `w_{mk}` of control component `k` on mode `m` (1-based `m`).
fn forcing_weights(control: &ControlFunction, actuator: &Actuator, modes: usize) -> Vec<Vec<f64>> {
    (1..=modes)
        .map(|m| match control.kind {
            ControlKind::Lumped => vec![spectral::overlap(actuator, m); control.coeffs.len()],
            ControlKind::Distributed => control
                .profiles
                .iter()
                .map(|p| {
                    p.iter()
                        .enumerate()
                        .map(|(l, pl)| pl * actuator.product_overlap(m, l + 1))
                        .sum()
                })
                .collect(),
        })
        .collect()
}

/// Propagates `z0` over `[0, T]` on a grid of `steps + 1` points. The mode count is
/// that of `z0`; pad it to watch spillover into higher modes.
pub fn propagate(
    z0: &SpectralState,
    drive: Drive<'_>,
    actuator: &Actuator,
    horizon: f64,
    steps: usize,
) -> Result<Trajectory> {
    if steps < MIN_STEPS {
        return Err(Error::invalid(format!("at least {MIN_STEPS} steps are required, got {steps}")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid(format!("horizon T must be positive, got {horizon}")));
    }
    if z0.modes() == 0 {
        return Err(Error::invalid("the initial state needs at least one mode"));
    }
    let modes = z0.modes();
    let times = linspace(0.0, horizon, steps + 1);
    let mu: Vec<f64> = (1..=modes).map(spectral::eigenvalue).collect();
    let free = |t: f64| -> Vec<f64> { (0..modes).map(|i| (mu[i] * t).exp() * z0.coeffs()[i]).collect() };

    let states: Vec<Vec<f64>> = match drive {
        Drive::Free => times.iter().map(|&t| free(t)).collect(),
        Drive::Control(control) => {
            control.validate()?;
            if horizon > control.horizon * (1.0 + 1e-12) {
                return Err(Error::invalid(format!(
                    "propagation horizon {horizon} exceeds the control horizon {}",
                    control.horizon
                )));
            }
            let expected = match actuator.kind() {
                ActuatorKind::Lumped => ControlKind::Lumped,
                ActuatorKind::Distributed => ControlKind::Distributed,
            };
            if control.kind != expected {
                return Err(Error::invalid(format!(
                    "{} control cannot drive a {} actuator",
                    control.kind,
                    actuator.kind()
                )));
            }
            let weights = forcing_weights(control, actuator, modes);
            times
                .iter()
                .map(|&t| {
                    let mut z = free(t);
                    for (i, zi) in z.iter_mut().enumerate() {
                        // ∫₀ᵗ e^{μ(t−s)} c e^{ν(T_c−s)} ds = c e^{ν(T_c−t)} ∫₀ᵗ e^{(μ+ν)σ} dσ
                        *zi += (0..control.coeffs.len())
                            .map(|k| {
                                let nu = control.exponents[k];
                                weights[i][k]
                                    * control.coeffs[k]
                                    * (nu * (control.horizon - t)).exp()
                                    * exp_integral(mu[i] + nu, t)
                            })
                            .sum::<f64>();
                    }
                    z
                })
                .collect()
        }
        Drive::Signal(u) => {
            if actuator.kind() != ActuatorKind::Lumped {
                return Err(Error::invalid("pointwise signals drive lumped actuators only"));
            }
            let beta: Vec<f64> = (1..=modes).map(|j| spectral::overlap(actuator, j)).collect();
            let mut conv = vec![0.0; modes];
            let mut out = vec![free(0.0)];
            for w in times.windows(2) {
                let (t0, t1) = (w[0], w[1]);
                for i in 0..modes {
                    let piece =
                        quadrature::integrate(|s| (mu[i] * (t1 - s)).exp() * u(s), t0, t1, SIGNAL_QUADRATURE_TOL)?;
                    conv[i] = (mu[i] * (t1 - t0)).exp() * conv[i] + piece;
                }
                let mut z = free(t1);
                for i in 0..modes {
                    z[i] += beta[i] * conv[i];
                }
                out.push(z);
            }
            out
        }
    };

    let states = states.into_iter().map(SpectralState::new).collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        times,
        states,
        terminal_error: None,
    })
}

/// `t ↦ B* S*(t) y = Σⱼ e^{μⱼt} yⱼ βⱼ` as a Dirichlet series with `λⱼ = (jπ)²`.
/// Every mode of `y` contributes a term, blocked ones with coefficient exactly zero.
pub fn observability_series(y: &SpectralState, actuator: &Actuator) -> Result<DirichletSeries> {
    if actuator.kind() != ActuatorKind::Lumped {
        return Err(Error::invalid("the scalar observation functional needs a lumped actuator"));
    }
    if y.modes() == 0 {
        return DirichletSeries::new([Term::new(0.0, spectral::decay_exponent(1))]);
    }
    let terms = y
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &yj)| Term::new(yj * spectral::overlap(actuator, i + 1), spectral::decay_exponent(i + 1)));
    DirichletSeries::new(terms)
}

/// [`observability_series`] sampled on a uniform grid of `[0, T]`.
pub fn observability_signal(
    y: &SpectralState,
    actuator: &Actuator,
    horizon: f64,
    samples: usize,
) -> Result<SampledSignal> {
    if samples < 2 {
        return Err(Error::invalid("at least two samples are required"));
    }
    let series = observability_series(y, actuator)?;
    let times = linspace(0.0, horizon, samples);
    let values = times
        .iter()
        .map(|&t| series.evaluate(t).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    SampledSignal::new(times, values, horizon)
}

/// Orthogonal projection onto `V`: zeroes the coordinates of blocked modes.
pub fn project_onto_v(y: &SpectralState, report: &ControllabilityReport) -> SpectralState {
    let coeffs = y
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| if report.is_blocked(i + 1) { 0.0 } else { c })
        .collect();
    SpectralState::new(coeffs).expect("projection keeps finite coordinates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment::{synthesize_distributed, synthesize_lumped, SynthesisParams};
    use crate::spectral::blocked_set;
    use std::f64::consts::PI;

    fn act(a: &str, b: &str, kind: ActuatorKind) -> Actuator {
        Actuator::parse(a, b, kind).unwrap()
    }

    #[test]
    fn free_decay_of_first_mode() {
        let a = act("0", "1", ActuatorKind::Lumped);
        let z0 = SpectralState::eigenmode(1, 3);
        let tr = propagate(&z0, Drive::Free, &a, 1.0, 16).unwrap();
        let z = tr.terminal_state();
        assert!((z.mode(1) - (-PI * PI).exp()).abs() < 1e-18);
        assert!((z.mode(1) - 5.1723e-5).abs() < 1e-8);
        assert_eq!(z.mode(2), 0.0);
        assert_eq!(tr.times.len(), 17);
        assert_eq!(tr.horizon(), 1.0);
    }

    #[test]
    fn steps_and_horizon_are_validated() {
        let a = act("0", "1", ActuatorKind::Lumped);
        let z0 = SpectralState::eigenmode(1, 1);
        assert!(propagate(&z0, Drive::Free, &a, 1.0, 15).is_err());
        assert!(propagate(&z0, Drive::Free, &a, -1.0, 16).is_err());
    }

    #[test]
    fn lumped_steering_kills_first_mode() {
        let a = act("0", "1", ActuatorKind::Lumped);
        let z0 = SpectralState::eigenmode(1, 1);
        let z1 = SpectralState::zeros(1);
        let s = synthesize_lumped(&z0, &z1, &a, &SynthesisParams::new(1.0, 1, 1e-6)).unwrap();
        let tr = propagate(&z0, Drive::Control(&s.control), &a, 1.0, 32)
            .unwrap()
            .with_target(&z1);
        assert!(tr.terminal_error.unwrap() < 1e-8);
    }

    #[test]
    fn closed_form_matches_quadrature_path() {
        let a = act("1/5", "3/5", ActuatorKind::Lumped);
        let c = ControlFunction::lumped(1.0, vec![-PI * PI, -4.0 * PI * PI], vec![3.0, -7.0]).unwrap();
        let z0: SpectralState = "[0.3, -0.2, 0.1, 0.05]".parse().unwrap();
        let exact = propagate(&z0, Drive::Control(&c), &a, 1.0, 16).unwrap();
        let u = |s: f64| c.value(s);
        let quad = propagate(&z0, Drive::Signal(&u), &a, 1.0, 16).unwrap();
        for (x, y) in exact.states.iter().zip(&quad.states) {
            assert!(x.distance(y) < 1e-10);
        }
    }

    #[test]
    fn semigroup_property() {
        let a = act("1/10", "7/10", ActuatorKind::Lumped);
        let c = ControlFunction::lumped(1.0, vec![-PI * PI, -9.0 * PI * PI], vec![2.0, 5.0]).unwrap();
        let z0: SpectralState = "[1, 0.5, -0.25, 0.125]".parse().unwrap();
        let full = propagate(&z0, Drive::Control(&c), &a, 1.0, 16).unwrap();
        let half = propagate(&z0, Drive::Control(&c), &a, 0.5, 16).unwrap();
        let rest = c.restrict(0.5).unwrap();
        let second = propagate(half.terminal_state(), Drive::Control(&rest), &a, 0.5, 16).unwrap();
        for j in 1..=4 {
            assert!((full.terminal_state().mode(j) - second.terminal_state().mode(j)).abs() < 1e-10);
        }
    }

    #[test]
    fn free_energy_decreases() {
        let a = act("0", "1", ActuatorKind::Lumped);
        let z0: SpectralState = "[0, 1, -2, 0.5]".parse().unwrap();
        let tr = propagate(&z0, Drive::Free, &a, 0.1, 32).unwrap();
        for w in tr.states.windows(2) {
            assert!(w[1].norm() < w[0].norm());
        }
    }

    #[test]
    fn blocked_and_free_subspaces_are_invariant() {
        let a = act("0", "1/2", ActuatorKind::Lumped);
        let report = blocked_set(&a, 16).unwrap();
        let in_m: SpectralState = "phi4 + 2*phi8".parse().unwrap();
        let tr = propagate(&in_m.resized(12), Drive::Free, &a, 0.01, 16).unwrap();
        for z in &tr.states {
            assert_eq!(project_onto_v(z, &report).norm(), 0.0);
        }
    }

    #[test]
    fn observability_of_blocked_mode_vanishes() {
        let a = act("0", "1/2", ActuatorKind::Lumped);
        let y = SpectralState::eigenmode(4, 4);
        let sig = observability_signal(&y, &a, 1.0, 64).unwrap();
        assert_eq!(sig.max_abs(), 0.0);
        let full = act("0", "1", ActuatorKind::Lumped);
        let sig = observability_signal(&SpectralState::eigenmode(1, 1), &full, 1.0, 3).unwrap();
        let beta = 2.0 * std::f64::consts::SQRT_2 / PI;
        assert!((sig.values()[2] - beta * (-PI * PI).exp()).abs() < 1e-15);
    }

    #[test]
    fn projection_examples() {
        let a = act("0", "1/2", ActuatorKind::Lumped);
        let report = blocked_set(&a, 12).unwrap();
        let y: SpectralState = "phi3 + phi4".parse().unwrap();
        assert_eq!(project_onto_v(&y, &report).coeffs(), &[0.0, 0.0, 1.0, 0.0]);
        let p = project_onto_v(&y, &report);
        assert_eq!(project_onto_v(&p, &report), p);
    }

    #[test]
    fn distributed_steering_kills_first_mode() {
        let a = act("3/10", "7/10", ActuatorKind::Distributed);
        let z0 = SpectralState::eigenmode(1, 1);
        let z1 = SpectralState::zeros(1);
        let s = synthesize_distributed(&z0, &z1, &a, &SynthesisParams::new(1.0, 1, 1e-6)).unwrap();
        let tr = propagate(&z0.resized(2), Drive::Control(&s.control), &a, 1.0, 16).unwrap();
        assert!(tr.terminal_state().mode(1).abs() < 1e-8);
    }

    #[test]
    fn trajectory_csv_round_trip() {
        let a = act("0", "1", ActuatorKind::Lumped);
        let tr = propagate(&SpectralState::eigenmode(2, 3), Drive::Free, &a, 0.5, 16)
            .unwrap()
            .with_target(&SpectralState::zeros(3));
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        assert_eq!(Trajectory::read_csv(buf.as_slice()).unwrap(), tr);
    }
}

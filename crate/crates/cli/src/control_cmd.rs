use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use dirheat_core::sim::Drive;
use dirheat_core::spectral::DEFAULT_JMAX;
use dirheat_core::{
    blocked_set, distributed_controllability, is_identically_zero, observability_series, observability_signal,
    project_onto_v, propagate, synthesize_distributed, synthesize_lumped, Actuator, ActuatorKind, ControlFunction,
    SpectralState, SynthesisParams,
};

use crate::output::{apply_config, need, parse_json, read_file, CliError, CliResult};
use crate::Context;

#[derive(Subcommand, Debug)]
pub enum ControlCommand {
    /// Blocked modes and controllability verdict of an actuator
    Analyze(AnalyzeArgs),
    /// Moment-method control steering z0 towards z1
    Synthesize(SynthesizeArgs),
    /// Propagate a synthesized control and report the terminal error
    Simulate(SimulateArgs),
    /// Sample the observation functional of a state
    Observability(ObservabilityArgs),
    /// Project a state onto the controllable subspace
    Project(ProjectArgs),
    /// Tabulate a control on a uniform time grid
    Tabulate(TabulateArgs),
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Lumped,
    Distributed,
}

impl From<KindArg> for ActuatorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Lumped => ActuatorKind::Lumped,
            KindArg::Distributed => ActuatorKind::Distributed,
        }
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct ActuatorArgs {
    /// Left endpoint, e.g. `0`, `3/10`, `1/4+1/100*sqrt2`
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Right endpoint
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
}

impl ActuatorArgs {
    fn build(&self, default_kind: KindArg) -> CliResult<Actuator> {
        let (Some(a), Some(b)) = (&self.a, &self.b) else {
            return Err(CliError::Usage("actuator endpoints --a and --b are required".into()));
        };
        Ok(Actuator::parse(a, b, self.kind.unwrap_or(default_kind).into())?)
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub actuator: ActuatorArgs,
    #[arg(long, default_value_t = DEFAULT_JMAX)]
    pub jmax: usize,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct SynthesizeArgs {
    /// `Z0->Z1`, each a state such as `phi1`, `0`, `0.5*phi2+phi3` or `[1,0.5]`
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub actuator: ActuatorArgs,
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Number of synthesized modes
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub modes: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Tikhonov weight added to the Gram matrix
    #[arg(long, default_value_t = 0.0)]
    pub reg: f64,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct SimulateArgs {
    /// Synthesis document, or a bare control document together with --a/--b/--z0
    #[arg(long)]
    pub control: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub actuator: ActuatorArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub z1: Option<String>,
    /// Simulated modes; defaults to twice the synthesized ones
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub steps: usize,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct ObservabilityArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub actuator: ActuatorArgs,
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T")]
    pub horizon: f64,
    #[arg(long, default_value_t = 129)]
    pub samples: usize,
    /// Absolute tolerance of the zero test
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct ProjectArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub actuator: ActuatorArgs,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct TabulateArgs {
    #[arg(long)]
    pub control: Option<PathBuf>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

/// Output of `control synthesize`; carries everything `control simulate` needs.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct SynthesisDocument {
    pub actuator: Actuator,
    pub z0: SpectralState,
    pub z1: SpectralState,
    pub modes: usize,
    pub control: ControlFunction,
    pub predicted_error: f64,
    pub within_tolerance: bool,
    pub energy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram_condition: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retained_modes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped_blocked_modes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_condition: Option<f64>,
}

fn parse_state(s: &str) -> CliResult<SpectralState> {
    Ok(s.parse::<SpectralState>()?)
}

fn parse_target(target: &str) -> CliResult<(SpectralState, SpectralState)> {
    let (z0, z1) = target
        .split_once("->")
        .ok_or_else(|| CliError::Usage(format!("target `{target}` is not of the form Z0->Z1")))?;
    Ok((parse_state(z0)?, parse_state(z1)?))
}

fn revalidate(actuator: &Actuator) -> CliResult<Actuator> {
    Ok(Actuator::new(actuator.a().clone(), actuator.b().clone(), actuator.kind())?)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ProjectionDocument {
    y: SpectralState,
    projected: SpectralState,
    blocked_modes: Vec<usize>,
}

pub fn run(command: ControlCommand, ctx: &Context) -> CliResult<()> {
    let config = ctx.config.as_deref();
    match command {
        ControlCommand::Analyze(args) => {
            let args = apply_config(args, config)?;
            let actuator = args.actuator.build(KindArg::Lumped)?;
            let sink = ctx.sink("control analyze", &args);
            match actuator.kind() {
                ActuatorKind::Lumped => sink.json(&blocked_set(&actuator, args.jmax)?),
                ActuatorKind::Distributed => sink.json(&distributed_controllability(&actuator, args.jmax)?),
            }
        }
        ControlCommand::Synthesize(args) => {
            let args = apply_config(args, config)?;
            let actuator = args.actuator.build(KindArg::Lumped)?;
            let (z0, z1) = parse_target(&need(&args.target, "target")?)?;
            let modes = need(&args.modes, "N")?;
            let params = SynthesisParams::new(args.horizon, modes, args.eps).with_regularization(args.reg);
            let doc = match actuator.kind() {
                ActuatorKind::Lumped => {
                    let s = synthesize_lumped(&z0, &z1, &actuator, &params)?;
                    SynthesisDocument {
                        actuator,
                        z0,
                        z1,
                        modes,
                        control: s.control,
                        predicted_error: s.predicted_error,
                        within_tolerance: s.within_tolerance,
                        energy: s.energy,
                        gram_condition: Some(s.gram_condition),
                        moment_residual: Some(s.moment_residual),
                        retained_modes: Some(s.retained_modes),
                        skipped_blocked_modes: Some(s.skipped_blocked_modes),
                        profile_condition: None,
                    }
                }
                ActuatorKind::Distributed => {
                    let s = synthesize_distributed(&z0, &z1, &actuator, &params)?;
                    SynthesisDocument {
                        actuator,
                        z0,
                        z1,
                        modes,
                        control: s.control,
                        predicted_error: s.predicted_error,
                        within_tolerance: s.within_tolerance,
                        energy: s.energy,
                        gram_condition: None,
                        moment_residual: None,
                        retained_modes: None,
                        skipped_blocked_modes: None,
                        profile_condition: Some(s.profile_condition),
                    }
                }
            };
            let sink = ctx.sink("control synthesize", &args);
            sink.json(&doc)?;
            sink.summary(&format!("predictedError={:?}", doc.predicted_error));
            Ok(())
        }
        ControlCommand::Simulate(args) => {
            let args = apply_config(args, config)?;
            let text = read_file(&need(&args.control, "control")?)?;
            let value: serde_json::Value = parse_json(&text, "control document")?;
            let (control, actuator, z0, z1, modes) = if value.get("control").is_some() {
                let doc: SynthesisDocument = parse_json(&text, "synthesis document")?;
                doc.control.validate()?;
                let actuator = if args.actuator.a.is_some() || args.actuator.b.is_some() {
                    args.actuator.build(KindArg::Lumped)?
                } else {
                    revalidate(&doc.actuator)?
                };
                let z0 = args.z0.as_deref().map(parse_state).transpose()?.unwrap_or(doc.z0);
                let z1 = args.z1.as_deref().map(parse_state).transpose()?.unwrap_or(doc.z1);
                (doc.control, actuator, z0, Some(z1), doc.modes)
            } else {
                let control = ControlFunction::from_json_str(&text)?;
                let kind = match control.kind {
                    ActuatorKind::Lumped => KindArg::Lumped,
                    ActuatorKind::Distributed => KindArg::Distributed,
                };
                let actuator = args.actuator.build(kind)?;
                let z0 = parse_state(
                    args.z0
                        .as_deref()
                        .ok_or_else(|| CliError::Usage("--z0 is required with a bare control".into()))?,
                )?;
                let z1 = args.z1.as_deref().map(parse_state).transpose()?;
                let modes = control.coeffs.len().max(z0.modes());
                (control, actuator, z0, z1, modes)
            };
            let modes = args.modes.unwrap_or(2 * modes).max(z0.modes()).max(1);
            let mut trajectory = propagate(
                &z0.resized(modes),
                Drive::Control(&control),
                &actuator,
                control.horizon,
                args.steps,
            )?;
            if let Some(z1) = &z1 {
                trajectory = trajectory.with_target(z1);
            }
            let sink = ctx.sink("control simulate", &args);
            sink.csv(|buf| trajectory.write_csv(buf))?;
            if let Some(e) = trajectory.terminal_error {
                sink.summary(&format!("terminalError={e:?}"));
            }
            Ok(())
        }
        ControlCommand::Observability(args) => {
            let args = apply_config(args, config)?;
            let actuator = args.actuator.build(KindArg::Lumped)?;
            let y = parse_state(&need(&args.y, "y")?)?;
            let signal = observability_signal(&y, &actuator, args.horizon, args.samples)?;
            let zero = is_identically_zero(&observability_series(&y, &actuator)?, args.horizon, args.tol)?;
            let sink = ctx.sink("control observability", &args);
            sink.csv(|buf| signal.write_csv(buf))?;
            sink.summary(&format!("identicallyZero={zero}"));
            Ok(())
        }
        ControlCommand::Project(args) => {
            let args = apply_config(args, config)?;
            let actuator = args.actuator.build(KindArg::Lumped)?;
            let y = parse_state(&need(&args.y, "y")?)?;
            let report = blocked_set(&actuator, y.modes().max(1))?;
            let projected = project_onto_v(&y, &report);
            ctx.sink("control project", &args).json(&ProjectionDocument {
                blocked_modes: report.blocked_prefix.clone(),
                y,
                projected,
            })
        }
        ControlCommand::Tabulate(args) => {
            let args = apply_config(args, config)?;
            let text = read_file(&need(&args.control, "control")?)?;
            let value: serde_json::Value = parse_json(&text, "control document")?;
            let control = match value.get("control") {
                Some(c) => ControlFunction::from_json_str(&c.to_string())?,
                None => ControlFunction::from_json_str(&text)?,
            };
            ctx.sink("control tabulate", &args)
                .csv(|buf| control.write_csv(buf, args.points))
        }
    }
}

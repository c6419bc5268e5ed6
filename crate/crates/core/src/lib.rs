//! Exponential Dirichlet series with certified Taylor re-expansion, exact zero-set
//! analysis of heat-equation actuators, and moment-method control synthesis.
//!
//! The crate is organised bottom-up:
//!
//! - [`series`]: Dirichlet series, evaluation with tail bounds, shift normalization and
//!   antiderivative reduction.
//! - [`taylor`]: power-series re-expansion around any positive center with explicit
//!   remainder certificates.
//! - [`uniqueness`]: vanishing test on `[0, T]` and sequential leading-coefficient peeling.
//! - [`exact`]: numbers `q₀ + q₁·ξ` for exact rationality decisions.
//! - [`spectral`]: Dirichlet Laplacian on `(0, 1)`, actuator overlaps and blocked modes.
//! - [`moment`]: Gram matrices and lumped/distributed control synthesis.
//! - [`sim`]: modal propagation, observability signals and subspace projection.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod moment;
pub mod numeric;
pub mod quadrature;
pub mod series;
pub mod sim;
pub mod spectral;
pub mod taylor;
pub mod uniqueness;

pub use error::{Error, Result};
pub use exact::{ExactReal, IrrationalTag};
pub use moment::{
    gram_matrix, solve_moment_problem, synthesize_distributed, synthesize_lumped, ControlFunction,
    ControlKind, DistributedSynthesis, LumpedSynthesis, MomentProblem, MomentSolution,
    SpectralState, SynthesisParams,
};
pub use series::{DirichletSeries, SeriesValue, TailModel, Term};
pub use sim::{observability_series, observability_signal, project_onto_v, propagate, Drive, Trajectory};
pub use spectral::{
    blocked_set, distributed_controllability, overlap, overlap_is_zero, Actuator, ActuatorKind,
    ControllabilityReport, ResidueClass, Verdict,
};
pub use taylor::{certified_order, expand, RemainderCertificate, TaylorExpansion};
pub use uniqueness::{is_identically_zero, peel_leading, PeelResult, SampledSignal};

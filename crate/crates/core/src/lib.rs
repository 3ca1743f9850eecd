//! Pre-flight certification of inverse-module transfer between SISO LTI
//! systems.
//!
//! Given a target system and a fleet of source systems whose inverse
//! dynamics modules could be reused, this crate answers, before any
//! closed-loop test: does pre-cascading a source inverse to the target
//! provably reduce the l2 tracking error on a given trajectory?
//!
//! The pipeline:
//! 1. [`lti`] represents plants exactly and simulates them (zero-order-hold
//!    state space).
//! 2. [`probe`] runs sinusoidal experiments on simulated baseline systems
//!    and extracts magnitude/phase at single frequencies.
//! 3. [`gp`] fits Gaussian-process models to the probed objective
//!    `f(omega) = |G_s^-1(j omega) G_t(j omega) - 1|`.
//! 4. [`bo`] drives expected-improvement Bayesian optimization to estimate
//!    the peak of `f` over a frequency window, inflated by three posterior
//!    standard deviations.
//! 5. [`analysis`] turns the estimates into tracking-error bounds,
//!    positive-transfer verdicts, and nu-gap asymmetry reports.
//! 6. [`catalog`] loads plant catalogs and trajectory suites for
//!    reproducible experiment campaigns.

pub mod analysis;
pub mod bo;
pub mod catalog;
pub mod gp;
pub mod lti;
mod poly;
pub mod probe;
pub mod seeding;
pub mod signal;

pub use analysis::{
    first_order_transfer_error, nu_gap_report, tracking_error_bound, verdict,
    verdict_with_margin, AnalysisError, AsymmetryReport, AxisBound, BoundCertificate,
    TransferVerdict,
};
pub use bo::{
    expected_improvement, run_campaign, BoCampaign, BoError, BoundEstimate, CampaignOutcome,
    ConvergencePolicy, IterationRecord, NamedPlant,
};
pub use catalog::{Axis, Catalog, CatalogError, RobotSpec, TrajectorySpec, TrajectorySuite};
pub use gp::{GpError, GpHyperParams, GpModel};
pub use lti::{error_tf, FrequencyPoint, LtiError, RationalTransferFunction};
pub use probe::{
    estimate_inverse_response, evaluate_objective, probe_system, probe_system_seeded, ProbeConfig,
    ProbeError, ProbeResult,
};
pub use signal::{SampledSignal, SignalError};

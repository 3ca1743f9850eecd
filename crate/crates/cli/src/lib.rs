//! Harness library behind the `invcert` binary: configuration, the four
//! campaign commands, and deterministic artifact writing. The binary is a
//! thin argument-parsing layer over [`pipeline`].

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::HarnessConfig;
pub use pipeline::{
    default_suite, run_asymmetry, run_estimate, run_oracle, run_verify, AsymmetryArtifacts,
    EstimateArtifacts, RunContext, VerifyArtifacts,
};

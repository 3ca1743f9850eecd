//! Certificates: tracking-error bounds, positive-transfer verdicts, and
//! the nu-gap view of transfer asymmetry.
//!
//! The chain from estimate to guarantee: the l2 tracking error under a
//! transferred inverse satisfies `||e|| <= sup_w |E(jw)| * ||y_d||`, so an
//! estimate `e_star` of the sup yields the per-axis bound
//! `e_star * ||y_d||`; axes combine by root-sum-square, and transfer is
//! guaranteed positive when the combined bound undercuts the measured
//! baseline error.

use num_complex::Complex64;

use crate::catalog::Axis;
use crate::lti::{LtiError, RationalTransferFunction};
use crate::signal::{SampledSignal, SignalError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("bound estimate must be non-negative, got {0}")]
    NegativeEstimate(f64),
    #[error("baseline error must be non-negative, got {0}")]
    NegativeBaseline(f64),
    #[error("axis {0} appears more than once in the certificate inputs")]
    DuplicateAxis(Axis),
    #[error("time constants must be positive, got source {tau_source}, target {tau_target}")]
    NonPositiveTimeConstant { tau_source: f64, tau_target: f64 },
    #[error("{which} system must be BIBO stable")]
    NotStable { which: &'static str },
    #[error("{which} system must be minimum phase")]
    NotMinimumPhase { which: &'static str },
    #[error("second system vanishes at {omega} rad/s; aggressiveness factor undefined")]
    VanishingResponse { omega: f64 },
    #[error("frequency grid must be non-empty")]
    EmptyGrid,
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// Upper bound on the l2 tracking error over trajectory `yd` given an
/// estimate `e_star` of the error-system infinity norm.
pub fn tracking_error_bound(e_star: f64, yd: &SampledSignal) -> Result<f64, AnalysisError> {
    if !(e_star.is_finite() && e_star >= 0.0) {
        return Err(AnalysisError::NegativeEstimate(e_star));
    }
    Ok(e_star * yd.l2_norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TransferVerdict {
    /// The combined bound is strictly below the measured baseline error;
    /// transfer is guaranteed to improve tracking.
    Positive,
    /// No guarantee. This does not assert negative transfer, only the
    /// absence of a certificate.
    NotGuaranteed,
}

impl std::fmt::Display for TransferVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransferVerdict::Positive => write!(f, "positive"),
            TransferVerdict::NotGuaranteed => write!(f, "not_guaranteed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AxisBound {
    pub axis: Axis,
    pub e_star: f64,
    pub yd_norm: f64,
    pub bound: f64,
}

/// A per-source certificate: per-axis bounds, their root-sum-square, the
/// measured baseline error, and the resulting verdict.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundCertificate {
    pub source_name: String,
    pub per_axis: Vec<AxisBound>,
    pub combined_bound: f64,
    pub baseline_error: f64,
    /// Factor applied to the combined bound in the comparison (1 = none).
    pub safety_margin: f64,
    pub verdict: TransferVerdict,
}

/// Assembles a certificate from per-axis estimates and the measured
/// baseline error, with the default safety margin of 1.
pub fn verdict(
    source_name: &str,
    per_axis: &[(Axis, f64, &SampledSignal)],
    baseline_error: f64,
) -> Result<BoundCertificate, AnalysisError> {
    verdict_with_margin(source_name, per_axis, baseline_error, 1.0)
}

/// Like [`verdict`] but scales the combined bound by `safety_margin`
/// (values above 1 are more conservative) before the strict comparison
/// against the baseline error.
pub fn verdict_with_margin(
    source_name: &str,
    per_axis: &[(Axis, f64, &SampledSignal)],
    baseline_error: f64,
    safety_margin: f64,
) -> Result<BoundCertificate, AnalysisError> {
    if !(baseline_error.is_finite() && baseline_error >= 0.0) {
        return Err(AnalysisError::NegativeBaseline(baseline_error));
    }
    let mut bounds = Vec::with_capacity(per_axis.len());
    for (i, (axis, e_star, yd)) in per_axis.iter().enumerate() {
        if per_axis[..i].iter().any(|(a, _, _)| a == axis) {
            return Err(AnalysisError::DuplicateAxis(*axis));
        }
        let yd_norm = yd.l2_norm();
        let bound = tracking_error_bound(*e_star, yd)?;
        bounds.push(AxisBound {
            axis: *axis,
            e_star: *e_star,
            yd_norm,
            bound,
        });
    }
    let combined_bound = bounds
        .iter()
        .map(|b| b.bound * b.bound)
        .sum::<f64>()
        .sqrt();
    let verdict = if combined_bound * safety_margin < baseline_error {
        TransferVerdict::Positive
    } else {
        TransferVerdict::NotGuaranteed
    };
    Ok(BoundCertificate {
        source_name: source_name.to_string(),
        per_axis: bounds,
        combined_bound,
        baseline_error,
        safety_margin,
        verdict,
    })
}

/// Simulates the first-order transfer experiment: the baseline tracking
/// error of the target `1/(tau_target s + 1)` and the tracking error with
/// the source inverse `(tau_source s + 1)` pre-cascaded. Returns
/// `(e_transfer, e_baseline)`.
pub fn first_order_transfer_error(
    tau_source: f64,
    tau_target: f64,
    yd: &SampledSignal,
) -> Result<(SampledSignal, SampledSignal), AnalysisError> {
    if !(tau_source > 0.0 && tau_target > 0.0)
        || !tau_source.is_finite()
        || !tau_target.is_finite()
    {
        return Err(AnalysisError::NonPositiveTimeConstant {
            tau_source,
            tau_target,
        });
    }
    let target = RationalTransferFunction::first_order_lag(tau_target)?;
    let source = RationalTransferFunction::first_order_lag(tau_source)?;
    let baseline_output = target.simulate(yd)?;
    let e_baseline = baseline_output.sub(yd)?;
    let composed = source.invert()?.series(&target)?;
    let transfer_output = composed.simulate(yd)?;
    let e_transfer = transfer_output.sub(yd)?;
    Ok((e_transfer, e_baseline))
}

/// Pointwise-in-frequency decomposition of the transfer error magnitude
/// into a symmetric distance and a direction-dependent factor, plus the
/// nu-gap (the grid supremum of the chordal distance).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AsymmetryReport {
    pub omega_grid: Vec<f64>,
    /// Chordal distance psi(G1(jw), G2(jw)) on the Riemann sphere;
    /// symmetric in the two systems.
    pub chordal: Vec<f64>,
    /// Direction factor Psi = sqrt(1 + |G1|^2) / psi(G2, 0); not symmetric.
    pub asym_factor: Vec<f64>,
    /// |E_12(jw)| = |G1(jw)/G2(jw) - 1|, the error magnitude when the
    /// inverse of G2 drives G1.
    pub error_mag: Vec<f64>,
    /// Grid supremum of the chordal distance, restricted to the window.
    pub nu_gap: f64,
    /// Whether |G2(-jw) G1(jw)| < 1 held at every grid point (the validity
    /// condition for reading the nu-gap off the chordal distance).
    pub winding_condition_ok: bool,
}

fn chordal_distance(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
}

/// Evaluates the decomposition `|E_12| = psi * Psi` over a frequency grid
/// for two stable, minimum-phase systems. `g1` is the system being driven
/// (the target of the transfer); `g2` supplies the inverse.
pub fn nu_gap_report(
    g1: &RationalTransferFunction,
    g2: &RationalTransferFunction,
    grid: &[f64],
) -> Result<AsymmetryReport, AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    if !g1.is_bibo_stable()? {
        return Err(AnalysisError::NotStable { which: "first" });
    }
    if !g2.is_bibo_stable()? {
        return Err(AnalysisError::NotStable { which: "second" });
    }
    if !g1.is_minimum_phase()? {
        return Err(AnalysisError::NotMinimumPhase { which: "first" });
    }
    if !g2.is_minimum_phase()? {
        return Err(AnalysisError::NotMinimumPhase { which: "second" });
    }

    let n = grid.len();
    let mut chordal = Vec::with_capacity(n);
    let mut asym_factor = Vec::with_capacity(n);
    let mut error_mag = Vec::with_capacity(n);
    let mut winding_ok = true;
    for &omega in grid {
        let a = g1.freq_response(omega)?;
        let b = g2.freq_response(omega)?;
        let aggressiveness = chordal_distance(b, Complex64::new(0.0, 0.0));
        if aggressiveness == 0.0 {
            return Err(AnalysisError::VanishingResponse { omega });
        }
        chordal.push(chordal_distance(a, b));
        asym_factor.push((1.0 + a.norm_sqr()).sqrt() / aggressiveness);
        error_mag.push((a / b - 1.0).norm());
        if a.norm() * b.norm() >= 1.0 {
            winding_ok = false;
        }
    }
    let nu_gap = chordal.iter().cloned().fold(0.0f64, f64::max);
    Ok(AsymmetryReport {
        omega_grid: grid.to_vec(),
        chordal,
        asym_factor,
        error_mag,
        nu_gap,
        winding_condition_ok: winding_ok,
    })
}

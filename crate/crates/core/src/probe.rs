//! Single-frequency sinusoidal probing of simulated baseline systems.
//!
//! A probe drives a plant with `A sin(omega t)`, discards the leading
//! settle periods, and least-squares fits `a sin + b cos` to the remaining
//! measurement window. That yields a magnitude/phase estimate of
//! `G(j omega)` without assuming anything about the plant's structure,
//! which is exactly the information the bound estimator needs.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::lti::{FrequencyPoint, LtiError, RationalTransferFunction};
use crate::signal::SampledSignal;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProbeError {
    #[error("probe frequency {omega} outside window [{omega_min}, {omega_max}]")]
    FrequencyOutsideWindow {
        omega: f64,
        omega_min: f64,
        omega_max: f64,
    },
    #[error("sample period {sample_period} too coarse for {omega} rad/s; need >= {min_per_period} samples per period")]
    SamplePeriodTooCoarse {
        omega: f64,
        sample_period: f64,
        min_per_period: usize,
    },
    #[error("probed system has zero response magnitude at {omega} rad/s")]
    ZeroMagnitude { omega: f64 },
    #[error("frequency mismatch between points: {left} vs {right} rad/s")]
    FrequencyMismatch { left: f64, right: f64 },
    #[error("invalid probe configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Signal(#[from] crate::signal::SignalError),
}

/// Minimum samples per probe period for a trustworthy sinusoid fit.
const MIN_SAMPLES_PER_PERIOD: usize = 16;

/// Configuration of the probing experiments and the frequency window of
/// interest.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    /// Reference amplitude, in output units.
    pub amplitude: f64,
    /// Periods discarded before measuring.
    pub settle_periods: u32,
    /// Periods used for the least-squares fit.
    pub measure_periods: u32,
    pub sample_period: f64,
    /// Standard deviation of additive Gaussian measurement noise applied to
    /// the simulated output (0 disables noise).
    pub noise_std: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            omega_min: 0.05,
            omega_max: 10.0,
            amplitude: 0.25,
            settle_periods: 5,
            measure_periods: 3,
            sample_period: 1e-3,
            noise_std: 0.0,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<(), ProbeError> {
        let mut problems = Vec::new();
        if !(self.omega_min.is_finite() && self.omega_min > 0.0) {
            problems.push(format!("omega_min must be > 0, got {}", self.omega_min));
        }
        if !(self.omega_max.is_finite() && self.omega_max > self.omega_min) {
            problems.push(format!(
                "omega_max must exceed omega_min, got [{}, {}]",
                self.omega_min, self.omega_max
            ));
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            problems.push(format!("amplitude must be > 0, got {}", self.amplitude));
        }
        if self.settle_periods < 3 {
            problems.push(format!(
                "settle_periods must be >= 3, got {}",
                self.settle_periods
            ));
        }
        if self.measure_periods < 2 {
            problems.push(format!(
                "measure_periods must be >= 2, got {}",
                self.measure_periods
            ));
        }
        if !(self.sample_period.is_finite() && self.sample_period > 0.0) {
            problems.push(format!(
                "sample_period must be > 0, got {}",
                self.sample_period
            ));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            problems.push(format!("noise_std must be >= 0, got {}", self.noise_std));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ProbeError::InvalidConfig(problems.join("; ")))
        }
    }
}

/// One probing round at a single frequency: responses of every source and
/// the target, plus the per-source objective values
/// `|G_sn^-1(j omega) G_t(j omega) - 1|`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ProbeResult {
    pub omega: f64,
    pub source_responses: Vec<FrequencyPoint>,
    pub target_response: FrequencyPoint,
    pub objective_values: Vec<f64>,
}

impl ProbeResult {
    pub fn new(
        source_responses: Vec<FrequencyPoint>,
        target_response: FrequencyPoint,
    ) -> Result<Self, ProbeError> {
        let objective_values = evaluate_objective(&source_responses, &target_response)?;
        Ok(Self {
            omega: target_response.omega,
            source_responses,
            target_response,
            objective_values,
        })
    }
}

/// Probes `g` at `omega` with a noise-free experiment.
pub fn probe_system(
    g: &RationalTransferFunction,
    omega: f64,
    cfg: &ProbeConfig,
) -> Result<FrequencyPoint, ProbeError> {
    probe_impl(g, omega, cfg, None::<&mut rand_chacha::ChaCha8Rng>)
}

/// Probes `g` at `omega`, adding Gaussian measurement noise of standard
/// deviation `cfg.noise_std` drawn from `rng` (no draws when the std is 0).
pub fn probe_system_seeded<R: Rng>(
    g: &RationalTransferFunction,
    omega: f64,
    cfg: &ProbeConfig,
    rng: &mut R,
) -> Result<FrequencyPoint, ProbeError> {
    probe_impl(g, omega, cfg, Some(rng))
}

fn probe_impl<R: Rng>(
    g: &RationalTransferFunction,
    omega: f64,
    cfg: &ProbeConfig,
    rng: Option<&mut R>,
) -> Result<FrequencyPoint, ProbeError> {
    cfg.validate()?;
    if !(omega >= cfg.omega_min && omega <= cfg.omega_max) {
        return Err(ProbeError::FrequencyOutsideWindow {
            omega,
            omega_min: cfg.omega_min,
            omega_max: cfg.omega_max,
        });
    }
    let period = 2.0 * std::f64::consts::PI / omega;
    let samples_per_period = period / cfg.sample_period;
    if samples_per_period < MIN_SAMPLES_PER_PERIOD as f64 {
        return Err(ProbeError::SamplePeriodTooCoarse {
            omega,
            sample_period: cfg.sample_period,
            min_per_period: MIN_SAMPLES_PER_PERIOD,
        });
    }

    let duration = period * f64::from(cfg.settle_periods + cfg.measure_periods);
    let reference = SampledSignal::sine(cfg.amplitude, omega, duration, cfg.sample_period)?;
    let mut output = g.simulate(&reference)?;
    if cfg.noise_std > 0.0 {
        if let Some(rng) = rng {
            let normal = Normal::new(0.0, cfg.noise_std)
                .map_err(|e| ProbeError::InvalidConfig(e.to_string()))?;
            let noisy: Vec<f64> = output
                .samples()
                .iter()
                .map(|y| y + normal.sample(rng))
                .collect();
            output = SampledSignal::new(noisy, cfg.sample_period)?;
        }
    }

    let n_settle = (f64::from(cfg.settle_periods) * samples_per_period).ceil() as usize;
    let tail = &output.samples()[n_settle.min(output.len() - 1)..];
    let (a, b) = fit_sin_cos(tail, omega, cfg.sample_period, n_settle);

    let magnitude = (a * a + b * b).sqrt() / cfg.amplitude;
    let phase = b.atan2(a);
    Ok(FrequencyPoint::new(
        omega,
        Complex64::from_polar(magnitude, phase),
    )?)
}

/// Least-squares fit of `y ~ a sin(omega t) + b cos(omega t)` on samples
/// starting at index `offset` (so phases stay referenced to t = 0).
fn fit_sin_cos(samples: &[f64], omega: f64, dt: f64, offset: usize) -> (f64, f64) {
    let (mut ss, mut sc, mut cc, mut sy, mut cy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, y) in samples.iter().enumerate() {
        let t = (offset + k) as f64 * dt;
        let (s, c) = (omega * t).sin_cos();
        ss += s * s;
        sc += s * c;
        cc += c * c;
        sy += s * y;
        cy += c * y;
    }
    let det = ss * cc - sc * sc;
    let a = (cc * sy - sc * cy) / det;
    let b = (ss * cy - sc * sy) / det;
    (a, b)
}

/// `G^-1(j omega)` from a probed `G(j omega)`: reciprocal magnitude,
/// negated phase.
pub fn estimate_inverse_response(p: &FrequencyPoint) -> Result<FrequencyPoint, ProbeError> {
    let m = p.magnitude();
    if m <= 0.0 {
        return Err(ProbeError::ZeroMagnitude { omega: p.omega });
    }
    Ok(FrequencyPoint::new(
        p.omega,
        Complex64::from_polar(1.0 / m, -p.phase()),
    )?)
}

/// Per-source objective values `|G_sn^-1(j omega) G_t(j omega) - 1|` from
/// probed responses taken at the same frequency.
pub fn evaluate_objective(
    sources: &[FrequencyPoint],
    target: &FrequencyPoint,
) -> Result<Vec<f64>, ProbeError> {
    sources
        .iter()
        .map(|s| {
            if s.omega != target.omega {
                return Err(ProbeError::FrequencyMismatch {
                    left: s.omega,
                    right: target.omega,
                });
            }
            let inv = estimate_inverse_response(s)?;
            Ok((inv.response * target.response - 1.0).norm())
        })
        .collect()
}

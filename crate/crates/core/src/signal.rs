//! Uniformly sampled finite-horizon signals and their l2 norm.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignalError {
    #[error("signal must contain at least one sample")]
    Empty,
    #[error("sample period must be finite and > 0, got {0}")]
    InvalidSamplePeriod(f64),
    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },
    #[error("signals have mismatched shapes: {left} samples at {left_dt} s vs {right} at {right_dt} s")]
    ShapeMismatch {
        left: usize,
        left_dt: f64,
        right: usize,
        right_dt: f64,
    },
}

/// A real time series sampled at a fixed period. Immutable after
/// construction; all samples are finite, so the l2 norm is finite too.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SampledSignal {
    samples: Vec<f64>,
    sample_period: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, sample_period: f64) -> Result<Self, SignalError> {
        if samples.is_empty() {
            return Err(SignalError::Empty);
        }
        if !sample_period.is_finite() || sample_period <= 0.0 {
            return Err(SignalError::InvalidSamplePeriod(sample_period));
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SignalError::NonFiniteSample { index });
        }
        Ok(Self {
            samples,
            sample_period,
        })
    }

    /// Samples `f(k * dt)` for `k = 0 .. ceil(duration/dt)`.
    pub fn from_fn(
        duration: f64,
        sample_period: f64,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, SignalError> {
        if !sample_period.is_finite() || sample_period <= 0.0 {
            return Err(SignalError::InvalidSamplePeriod(sample_period));
        }
        if !duration.is_finite() || duration <= 0.0 {
            return Err(SignalError::Empty);
        }
        let n = (duration / sample_period).ceil() as usize;
        let samples: Vec<f64> = (0..n).map(|k| f(k as f64 * sample_period)).collect();
        Self::new(samples, sample_period)
    }

    pub fn sine(
        amplitude: f64,
        omega: f64,
        duration: f64,
        sample_period: f64,
    ) -> Result<Self, SignalError> {
        Self::from_fn(duration, sample_period, |t| amplitude * (omega * t).sin())
    }

    pub fn cosine(
        amplitude: f64,
        omega: f64,
        duration: f64,
        sample_period: f64,
    ) -> Result<Self, SignalError> {
        Self::from_fn(duration, sample_period, |t| amplitude * (omega * t).cos())
    }

    pub fn step(height: f64, duration: f64, sample_period: f64) -> Result<Self, SignalError> {
        Self::from_fn(duration, sample_period, |_| height)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty() // construction forbids this
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.sample_period
    }

    /// Riemann approximation of the continuous l2 norm:
    /// sqrt(sum x_k^2 * dt).
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.samples.iter().map(|x| x * x).sum();
        (sum * self.sample_period).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| x * factor).collect(),
            sample_period: self.sample_period,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SignalError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SignalError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, SignalError> {
        if self.samples.len() != other.samples.len() || self.sample_period != other.sample_period {
            return Err(SignalError::ShapeMismatch {
                left: self.samples.len(),
                left_dt: self.sample_period,
                right: other.samples.len(),
                right_dt: other.sample_period,
            });
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(Self {
            samples,
            sample_period: self.sample_period,
        })
    }
}

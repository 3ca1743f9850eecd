//! Proper SISO LTI systems as rational transfer functions, with exact
//! composition, frequency-response evaluation, and zero-order-hold
//! simulation.
//!
//! A system is `n(s)/d(s)` with real coefficients stored in descending
//! powers. Construction canonicalizes: the denominator is made monic and
//! leading zeros are stripped. Improper systems (bare inverses of strictly
//! proper plants) are representable through [`RationalTransferFunction::invert`]
//! so they can participate in series composition, but they refuse to
//! simulate.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::poly;
use crate::signal::SampledSignal;

/// Poles with real part above `-STABILITY_MARGIN * max(1, |pole|)` are not
/// considered strictly stable; this keeps marginal poles (e.g. at +/- j)
/// classified as unstable despite rounding in the eigenvalue solve.
const STABILITY_MARGIN: f64 = 1e-9;

/// Relative distance below which a numerator/denominator root pair cancels
/// during series composition. Chosen so that G * G^-1 collapses to the
/// identity exactly enough for downstream null tests.
const CANCELLATION_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LtiError {
    #[error("denominator polynomial is zero")]
    ZeroDenominator,
    #[error("numerator polynomial is zero; system has no inverse")]
    ZeroNumerator,
    #[error("coefficients must be finite")]
    NonFiniteCoefficient,
    #[error("system is improper (relative degree {relative_degree}); expected deg n <= deg d")]
    Improper { relative_degree: isize },
    #[error(
        "composition G_s^-1 G_t is improper: source relative degree {source_degree} exceeds target {target_degree}"
    )]
    ImproperComposition {
        source_degree: isize,
        target_degree: isize,
    },
    #[error("denominator vanishes at s = j{omega}; pole on the imaginary axis")]
    PoleOnImaginaryAxis { omega: f64 },
    #[error("system is not BIBO stable; refusing to simulate")]
    Unstable,
    #[error("frequency must be finite and non-negative, got {omega}")]
    InvalidFrequency { omega: f64 },
    #[error(transparent)]
    RootFinding(#[from] poly::RootFindingError),
}

/// A SISO LTI system `n(s)/d(s)`, canonicalized to a monic denominator.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RationalTransferFunction {
    numerator: Vec<f64>,
    denominator: Vec<f64>,
}

impl RationalTransferFunction {
    /// Builds a proper transfer function. Coefficients are descending in s.
    pub fn new(numerator: &[f64], denominator: &[f64]) -> Result<Self, LtiError> {
        let tf = Self::new_allowing_improper(numerator, denominator)?;
        if !tf.is_proper() {
            return Err(LtiError::Improper {
                relative_degree: tf.relative_degree(),
            });
        }
        Ok(tf)
    }

    /// Builds a transfer function that may be improper. Bare inverses of
    /// strictly proper systems need this; they are flagged by
    /// [`Self::is_proper`] and rejected by [`Self::simulate`].
    pub fn new_allowing_improper(
        numerator: &[f64],
        denominator: &[f64],
    ) -> Result<Self, LtiError> {
        if numerator.iter().chain(denominator.iter()).any(|c| !c.is_finite()) {
            return Err(LtiError::NonFiniteCoefficient);
        }
        if denominator.is_empty() || numerator.is_empty() {
            return Err(LtiError::ZeroDenominator);
        }
        let den = poly::trim_leading(denominator);
        if poly::is_zero(&den) {
            return Err(LtiError::ZeroDenominator);
        }
        let num = poly::trim_leading(numerator);
        if poly::is_zero(&num) {
            // Canonical zero system.
            return Ok(Self {
                numerator: vec![0.0],
                denominator: vec![1.0],
            });
        }
        let lead = den[0];
        Ok(Self {
            numerator: poly::scale(&num, 1.0 / lead),
            denominator: poly::scale(&den, 1.0 / lead),
        })
    }

    /// The constant system `k`.
    pub fn constant(k: f64) -> Self {
        Self::new(&[k], &[1.0]).expect("constant system is always valid")
    }

    /// First-order lag `1 / (tau s + 1)`.
    pub fn first_order_lag(tau: f64) -> Result<Self, LtiError> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(LtiError::NonFiniteCoefficient);
        }
        Self::new(&[1.0], &[tau, 1.0])
    }

    pub fn numerator(&self) -> &[f64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    pub fn is_zero(&self) -> bool {
        poly::is_zero(&self.numerator)
    }

    /// deg d - deg n. Non-negative exactly when the system is proper.
    pub fn relative_degree(&self) -> isize {
        poly::degree(&self.denominator) as isize - poly::degree(&self.numerator) as isize
    }

    pub fn is_proper(&self) -> bool {
        self.relative_degree() >= 0
    }

    /// Denominator roots.
    pub fn poles(&self) -> Result<Vec<Complex64>, LtiError> {
        Ok(poly::roots(&self.denominator)?)
    }

    /// Numerator roots. Errors on the zero system.
    pub fn zeros(&self) -> Result<Vec<Complex64>, LtiError> {
        if self.is_zero() {
            return Err(LtiError::ZeroNumerator);
        }
        Ok(poly::roots(&self.numerator)?)
    }

    /// True iff every pole has strictly negative real part.
    pub fn is_bibo_stable(&self) -> Result<bool, LtiError> {
        let poles = self.poles()?;
        Ok(poles
            .iter()
            .all(|p| p.re < -STABILITY_MARGIN * p.norm().max(1.0)))
    }

    /// True iff every zero has strictly negative real part, i.e. the inverse
    /// dynamics are stable. Errors on the zero system (no inverse exists).
    pub fn is_minimum_phase(&self) -> Result<bool, LtiError> {
        let zeros = self.zeros()?;
        Ok(zeros
            .iter()
            .all(|z| z.re < -STABILITY_MARGIN * z.norm().max(1.0)))
    }

    /// d(s)/n(s), renormalized. The result may be improper.
    pub fn invert(&self) -> Result<Self, LtiError> {
        if self.is_zero() {
            return Err(LtiError::ZeroNumerator);
        }
        Self::new_allowing_improper(&self.denominator, &self.numerator)
    }

    /// Series composition `self * other` with pole-zero cancellation of
    /// root pairs matching within a relative distance of 1e-8.
    pub fn series(&self, other: &Self) -> Result<Self, LtiError> {
        let num = poly::mul(&self.numerator, &other.numerator);
        let den = poly::mul(&self.denominator, &other.denominator);
        if poly::is_zero(&num) {
            return Self::new_allowing_improper(&[0.0], &[1.0]);
        }
        let mut num_roots = poly::roots(&num)?;
        let mut den_roots = poly::roots(&den)?;
        cancel_common_roots(&mut num_roots, &mut den_roots);
        let num = poly::from_roots(&num_roots, num[0]);
        let den = poly::from_roots(&den_roots, den[0]);
        Self::new_allowing_improper(&num, &den)
    }

    /// Evaluates n(j omega) / d(j omega).
    pub fn freq_response(&self, omega: f64) -> Result<Complex64, LtiError> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(LtiError::InvalidFrequency { omega });
        }
        let s = Complex64::new(0.0, omega);
        let d = poly::eval(&self.denominator, s);
        let n = poly::eval(&self.numerator, s);
        let r = n / d;
        if d.norm() == 0.0 || !r.re.is_finite() || !r.im.is_finite() {
            return Err(LtiError::PoleOnImaginaryAxis { omega });
        }
        Ok(r)
    }

    /// Simulates the zero-state response to `input` via a controllable
    /// canonical state-space realization discretized with a zero-order hold
    /// at the input's sample period (exact matrix exponential). Refuses
    /// improper or unstable systems.
    pub fn simulate(&self, input: &SampledSignal) -> Result<SampledSignal, LtiError> {
        if !self.is_proper() {
            return Err(LtiError::Improper {
                relative_degree: self.relative_degree(),
            });
        }
        if !self.is_zero() && !self.is_bibo_stable()? {
            return Err(LtiError::Unstable);
        }
        let dt = input.sample_period();
        let u = input.samples();
        let n = poly::degree(&self.denominator);

        if n == 0 {
            // Static gain (denominator is 1 after canonicalization).
            let k = self.numerator[0];
            let y: Vec<f64> = u.iter().map(|ui| k * ui).collect();
            return Ok(SampledSignal::new(y, dt).expect("same shape as input"));
        }

        // Monic denominator: s^n + a1 s^(n-1) + ... + an.
        let a: Vec<f64> = self.denominator[1..].to_vec();
        // Numerator padded to length n+1: b0 s^n + ... + bn.
        let mut b = vec![0.0; n + 1 - self.numerator.len()];
        b.extend_from_slice(&self.numerator);
        let d_term = b[0];
        // Strictly proper remainder after pulling out the feedthrough.
        let c_desc: Vec<f64> = (0..n).map(|i| b[i + 1] - d_term * a[i]).collect();

        // Controllable canonical form.
        let mut a_mat = DMatrix::<f64>::zeros(n, n);
        for i in 0..n - 1 {
            a_mat[(i, i + 1)] = 1.0;
        }
        for j in 0..n {
            a_mat[(n - 1, j)] = -a[n - 1 - j];
        }

        // ZOH discretization through the block-matrix exponential
        // exp([[A, B], [0, 0]] dt) = [[Ad, Bd], [0, I]].
        let mut block = DMatrix::<f64>::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                block[(i, j)] = a_mat[(i, j)] * dt;
            }
        }
        block[(n - 1, n)] = dt; // B = e_n
        let e = block.exp();

        // Flatten for the hot loop.
        let mut ad = vec![0.0; n * n];
        let mut bd = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                ad[i * n + j] = e[(i, j)];
            }
            bd[i] = e[(i, n)];
        }
        let c: Vec<f64> = (0..n).map(|j| c_desc[n - 1 - j]).collect();

        let mut x = vec![0.0; n];
        let mut x_next = vec![0.0; n];
        let mut y = Vec::with_capacity(u.len());
        for &uk in u {
            let mut yk = d_term * uk;
            for j in 0..n {
                yk += c[j] * x[j];
            }
            y.push(yk);
            for i in 0..n {
                let row = &ad[i * n..(i + 1) * n];
                let mut acc = bd[i] * uk;
                for j in 0..n {
                    acc += row[j] * x[j];
                }
                x_next[i] = acc;
            }
            std::mem::swap(&mut x, &mut x_next);
        }
        Ok(SampledSignal::new(y, dt).expect("same shape as input"))
    }
}

impl std::fmt::Display for RationalTransferFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn poly_str(c: &[f64]) -> String {
            let n = c.len() - 1;
            let terms: Vec<String> = c
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| match n - i {
                    0 => format!("{v}"),
                    1 => format!("{v}*s"),
                    p => format!("{v}*s^{p}"),
                })
                .collect();
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            }
        }
        write!(
            f,
            "({}) / ({})",
            poly_str(&self.numerator),
            poly_str(&self.denominator)
        )
    }
}

/// The error transfer function `G_s^-1 G_t - 1` mapping the desired output
/// to the tracking error when the source inverse is pre-cascaded to the
/// target. Requires the target's relative degree to be at least the
/// source's so the composition stays proper.
pub fn error_tf(
    source: &RationalTransferFunction,
    target: &RationalTransferFunction,
) -> Result<RationalTransferFunction, LtiError> {
    if source.is_zero() {
        return Err(LtiError::ZeroNumerator);
    }
    let (r_s, r_t) = (source.relative_degree(), target.relative_degree());
    if r_t < r_s {
        return Err(LtiError::ImproperComposition {
            source_degree: r_s,
            target_degree: r_t,
        });
    }
    // G_s^-1 G_t - 1 = (d_s n_t - n_s d_t) / (n_s d_t)
    let num = poly::sub(
        &poly::mul(source.denominator(), target.numerator()),
        &poly::mul(source.numerator(), target.denominator()),
    );
    let den = poly::mul(source.numerator(), target.denominator());
    if poly::is_zero(&num) {
        return RationalTransferFunction::new(&[0.0], &[1.0]);
    }
    let mut num_roots = poly::roots(&num)?;
    let mut den_roots = poly::roots(&den)?;
    cancel_common_roots(&mut num_roots, &mut den_roots);
    RationalTransferFunction::new(
        &poly::from_roots(&num_roots, num[0]),
        &poly::from_roots(&den_roots, den[0]),
    )
}

fn cancel_common_roots(num_roots: &mut Vec<Complex64>, den_roots: &mut Vec<Complex64>) {
    let mut i = 0;
    while i < num_roots.len() {
        let zn = num_roots[i];
        let mut best: Option<(usize, f64)> = None;
        for (j, zd) in den_roots.iter().enumerate() {
            let dist = (zn - zd).norm();
            if best.is_none_or(|(_, d)| dist < d) {
                best = Some((j, dist));
            }
        }
        match best {
            Some((j, dist))
                if dist <= CANCELLATION_REL_TOL * zn.norm().max(den_roots[j].norm()).max(1.0) =>
            {
                num_roots.remove(i);
                den_roots.remove(j);
            }
            _ => i += 1,
        }
    }
}

/// A single frequency-response sample `G(j omega)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrequencyPoint {
    pub omega: f64,
    pub response: Complex64,
}

impl FrequencyPoint {
    pub fn new(omega: f64, response: Complex64) -> Result<Self, LtiError> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(LtiError::InvalidFrequency { omega });
        }
        if !response.re.is_finite() || !response.im.is_finite() {
            return Err(LtiError::NonFiniteCoefficient);
        }
        Ok(Self { omega, response })
    }

    pub fn magnitude(&self) -> f64 {
        self.response.norm()
    }

    pub fn phase(&self) -> f64 {
        self.response.arg()
    }
}

//! Gaussian-process regression over scalar frequency inputs.
//!
//! The model works in log10(omega): frequency responses of rational
//! systems vary on a log scale, so a squared-exponential length scale
//! measured in decades stays meaningful across the whole probe window.
//! All public interfaces take and return linear omega.
//!
//! Posterior mean and variance follow the standard noisy-observation
//! form: with K the Gram matrix of the dataset, k* the cross-covariance
//! vector and mu the constant prior mean,
//!
//! ```text
//! mean(w*) = mu + k*^T (K + sigma_n^2 I)^-1 (f - mu)
//! var(w*)  = k(w*, w*) - k*^T (K + sigma_n^2 I)^-1 k*
//! ```

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GpError {
    #[error("dataset must be non-empty")]
    EmptyDataset,
    #[error("dataset frequencies must be finite and positive, got {omega}")]
    InvalidInput { omega: f64 },
    #[error("duplicate frequency {omega} requires noise_variance > 0")]
    DuplicateInput { omega: f64 },
    #[error("kernel hyperparameters must be strictly positive: {0}")]
    InvalidHyperParams(String),
    #[error("Gram matrix factorization failed even with jitter {max_jitter}")]
    FactorizationFailed { max_jitter: f64 },
    #[error("hyperparameter fitting needs at least 3 points, got {n}")]
    TooFewPoints { n: usize },
}

/// Squared-exponential kernel hyperparameters. The length scale lives in
/// log10(omega) units (decades).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GpHyperParams {
    pub signal_variance: f64,
    pub length_scale: f64,
}

impl Default for GpHyperParams {
    fn default() -> Self {
        // One decade of correlation at unit signal variance.
        Self {
            signal_variance: 1.0,
            length_scale: 1.0,
        }
    }
}

impl GpHyperParams {
    fn validate(&self) -> Result<(), GpError> {
        if !(self.signal_variance.is_finite() && self.signal_variance > 0.0) {
            return Err(GpError::InvalidHyperParams(format!(
                "signal_variance = {}",
                self.signal_variance
            )));
        }
        if !(self.length_scale.is_finite() && self.length_scale > 0.0) {
            return Err(GpError::InvalidHyperParams(format!(
                "length_scale = {}",
                self.length_scale
            )));
        }
        Ok(())
    }
}

/// Search box for [`GpModel::fit_hyperparameters`].
#[derive(Debug, Clone, Copy)]
pub struct HyperSearchBounds {
    pub length_scale_min: f64,
    pub length_scale_max: f64,
    /// Signal-variance bounds as multiples of the dataset variance.
    pub variance_factor_min: f64,
    pub variance_factor_max: f64,
}

impl Default for HyperSearchBounds {
    fn default() -> Self {
        // The length scale is capped at one decade: rational frequency
        // responses have features about a decade wide, and longer fitted
        // scales oversmooth interior peaks when only a handful of samples
        // exist, starving the acquisition of exploration.
        Self {
            length_scale_min: 0.05,
            length_scale_max: 1.0,
            variance_factor_min: 1e-3,
            variance_factor_max: 1e3,
        }
    }
}

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

/// Serializable snapshot of a model (the factorization is rebuilt on load).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GpSnapshot {
    pub dataset: Vec<(f64, f64)>,
    pub prior_mean_constant: f64,
    pub hyper: GpHyperParams,
    pub noise_variance: f64,
    pub degenerate: bool,
}

/// An immutable GP posterior over `f(omega)`, factorized eagerly so that
/// posterior queries are cheap and pure.
#[derive(Debug, Clone)]
pub struct GpModel {
    dataset: Vec<(f64, f64)>,
    inputs_log: Vec<f64>,
    prior_mean_constant: f64,
    hyper: GpHyperParams,
    noise_variance: f64,
    degenerate: bool,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter_used: f64,
}

impl GpModel {
    /// Builds a model over `(omega, value)` observations.
    pub fn new(
        dataset: Vec<(f64, f64)>,
        prior_mean_constant: f64,
        hyper: GpHyperParams,
        noise_variance: f64,
    ) -> Result<Self, GpError> {
        Self::build(dataset, prior_mean_constant, hyper, noise_variance, false)
    }

    fn build(
        dataset: Vec<(f64, f64)>,
        prior_mean_constant: f64,
        hyper: GpHyperParams,
        noise_variance: f64,
        degenerate: bool,
    ) -> Result<Self, GpError> {
        hyper.validate()?;
        if dataset.is_empty() {
            return Err(GpError::EmptyDataset);
        }
        if !(noise_variance.is_finite() && noise_variance >= 0.0) {
            return Err(GpError::InvalidHyperParams(format!(
                "noise_variance = {noise_variance}"
            )));
        }
        for (omega, value) in &dataset {
            if !(omega.is_finite() && *omega > 0.0) || !value.is_finite() {
                return Err(GpError::InvalidInput { omega: *omega });
            }
        }
        if noise_variance == 0.0 {
            let mut seen = dataset.iter().map(|(w, _)| *w).collect::<Vec<_>>();
            seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
                return Err(GpError::DuplicateInput { omega: w[0] });
            }
        }

        let inputs_log: Vec<f64> = dataset.iter().map(|(w, _)| w.log10()).collect();
        let n = dataset.len();
        let kernel = |xi: f64, xj: f64| {
            let d = xi - xj;
            hyper.signal_variance * (-d * d / (2.0 * hyper.length_scale * hyper.length_scale)).exp()
        };
        let base = DMatrix::from_fn(n, n, |i, j| {
            kernel(inputs_log[i], inputs_log[j]) + if i == j { noise_variance } else { 0.0 }
        });

        // Jittered Cholesky: bounded escalation so failures surface instead
        // of silently degrading.
        let mut jitter = 0.0;
        let chol = loop {
            let mut m = base.clone();
            if jitter > 0.0 {
                for i in 0..n {
                    m[(i, i)] += jitter;
                }
            }
            match Cholesky::new(m) {
                Some(c) => break c,
                None => {
                    jitter = if jitter == 0.0 {
                        JITTER_START
                    } else {
                        jitter * 10.0
                    };
                    if jitter > JITTER_MAX {
                        return Err(GpError::FactorizationFailed {
                            max_jitter: JITTER_MAX,
                        });
                    }
                }
            }
        };

        let resid = DVector::from_fn(n, |i, _| dataset[i].1 - prior_mean_constant);
        let alpha = chol.solve(&resid);
        Ok(Self {
            dataset,
            inputs_log,
            prior_mean_constant,
            hyper,
            noise_variance,
            degenerate,
            chol,
            alpha,
            jitter_used: jitter,
        })
    }

    pub fn dataset(&self) -> &[(f64, f64)] {
        &self.dataset
    }

    pub fn prior_mean_constant(&self) -> f64 {
        self.prior_mean_constant
    }

    pub fn hyper(&self) -> GpHyperParams {
        self.hyper
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Set when hyperparameter fitting found the dataset uninformative.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    fn kernel_log(&self, xi: f64, xj: f64) -> f64 {
        let d = xi - xj;
        self.hyper.signal_variance
            * (-d * d / (2.0 * self.hyper.length_scale * self.hyper.length_scale)).exp()
    }

    /// Posterior mean and variance at `omega_star`. Variance is clamped to
    /// be non-negative.
    pub fn posterior(&self, omega_star: f64) -> (f64, f64) {
        assert!(
            omega_star.is_finite() && omega_star > 0.0,
            "query frequency must be finite and positive"
        );
        let xs = omega_star.log10();
        let n = self.dataset.len();
        let kstar = DVector::from_fn(n, |i, _| self.kernel_log(xs, self.inputs_log[i]));
        let mean = self.prior_mean_constant + kstar.dot(&self.alpha);
        let solved = self.chol.solve(&kstar);
        let var = self.hyper.signal_variance - kstar.dot(&solved);
        (mean, var.max(0.0))
    }

    /// Log marginal likelihood of the dataset under the current
    /// hyperparameters.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.dataset.len() as f64;
        let resid = DVector::from_fn(self.dataset.len(), |i, _| {
            self.dataset[i].1 - self.prior_mean_constant
        });
        let log_det: f64 = (0..self.dataset.len())
            .map(|i| self.chol.l_dirty()[(i, i)].ln())
            .sum::<f64>()
            * 2.0;
        -0.5 * resid.dot(&self.alpha)
            - 0.5 * log_det
            - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }

    /// Maximizes the log marginal likelihood over (signal_variance,
    /// length_scale) with a bounded multi-start grid followed by
    /// coordinate-wise golden-section refinement. Noise variance and the
    /// prior mean are held fixed. A dataset with identical values cannot
    /// inform the fit; the returned model parks the length scale at the
    /// upper search bound, shrinks the signal variance to the noise floor,
    /// and carries the degenerate flag.
    pub fn fit_hyperparameters(&self, bounds: &HyperSearchBounds) -> Result<GpModel, GpError> {
        let n = self.dataset.len();
        if n < 3 {
            return Err(GpError::TooFewPoints { n });
        }
        let values: Vec<f64> = self.dataset.iter().map(|(_, v)| v).copied().collect();
        let vmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let vmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if vmin == vmax {
            return Self::build(
                self.dataset.clone(),
                self.prior_mean_constant,
                GpHyperParams {
                    signal_variance: self.noise_variance.max(1e-12),
                    length_scale: bounds.length_scale_max,
                },
                self.noise_variance,
                true,
            );
        }

        let mean = values.iter().sum::<f64>() / n as f64;
        let var_y = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let sf_lo = (var_y * bounds.variance_factor_min).max(1e-300);
        let sf_hi = (var_y * bounds.variance_factor_max).max(sf_lo * 10.0);
        let ls_lo = bounds.length_scale_min;
        let ls_hi = bounds.length_scale_max;

        let objective = |log_sf: f64, log_ls: f64| -> f64 {
            let hyper = GpHyperParams {
                signal_variance: 10f64.powf(log_sf),
                length_scale: 10f64.powf(log_ls),
            };
            match Self::build(
                self.dataset.clone(),
                self.prior_mean_constant,
                hyper,
                self.noise_variance,
                false,
            ) {
                Ok(m) => m.log_marginal_likelihood(),
                Err(_) => f64::NEG_INFINITY,
            }
        };

        const GRID: usize = 7;
        let lerp = |lo: f64, hi: f64, i: usize| {
            lo + (hi - lo) * i as f64 / (GRID - 1) as f64
        };
        let (mut best_sf, mut best_ls, mut best_obj) = (f64::NAN, f64::NAN, f64::NEG_INFINITY);
        for i in 0..GRID {
            let log_sf = lerp(sf_lo.log10(), sf_hi.log10(), i);
            for j in 0..GRID {
                let log_ls = lerp(ls_lo.log10(), ls_hi.log10(), j);
                let obj = objective(log_sf, log_ls);
                if obj > best_obj {
                    (best_sf, best_ls, best_obj) = (log_sf, log_ls, obj);
                }
            }
        }
        if best_obj == f64::NEG_INFINITY {
            return Err(GpError::FactorizationFailed {
                max_jitter: JITTER_MAX,
            });
        }

        // Two sweeps of golden-section refinement, one coordinate at a time,
        // within one grid step of the incumbent.
        let sf_step = (sf_hi.log10() - sf_lo.log10()) / (GRID - 1) as f64;
        let ls_step = (ls_hi.log10() - ls_lo.log10()) / (GRID - 1) as f64;
        for _ in 0..2 {
            best_sf = golden_max(
                |x| objective(x, best_ls),
                (best_sf - sf_step).max(sf_lo.log10()),
                (best_sf + sf_step).min(sf_hi.log10()),
                32,
            );
            best_ls = golden_max(
                |x| objective(best_sf, x),
                (best_ls - ls_step).max(ls_lo.log10()),
                (best_ls + ls_step).min(ls_hi.log10()),
                32,
            );
        }

        Self::build(
            self.dataset.clone(),
            self.prior_mean_constant,
            GpHyperParams {
                signal_variance: 10f64.powf(best_sf),
                length_scale: 10f64.powf(best_ls),
            },
            self.noise_variance,
            false,
        )
    }

    pub fn snapshot(&self) -> GpSnapshot {
        GpSnapshot {
            dataset: self.dataset.clone(),
            prior_mean_constant: self.prior_mean_constant,
            hyper: self.hyper,
            noise_variance: self.noise_variance,
            degenerate: self.degenerate,
        }
    }

    pub fn from_snapshot(s: &GpSnapshot) -> Result<Self, GpError> {
        Self::build(
            s.dataset.clone(),
            s.prior_mean_constant,
            s.hyper,
            s.noise_variance,
            s.degenerate,
        )
    }
}

/// Golden-section maximization of a unimodal-ish objective on [lo, hi].
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, iters: usize) -> f64 {
    if hi <= lo {
        return lo;
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    // Return the best of the probed points and the midpoint.
    let fm = f(mid);
    if fm >= fc && fm >= fd {
        mid
    } else if fc >= fd {
        c
    } else {
        d
    }
}

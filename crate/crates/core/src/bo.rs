//! Expected-improvement Bayesian optimization of the transfer objective.
//!
//! One campaign estimates, for every source in a fleet, the peak of
//! `f_n(omega) = |G_sn^-1(j omega) G_t(j omega) - 1|` over a frequency
//! window, using only probed input/output data. Each iteration probes the
//! target once and every source once at a shared frequency, refits one GP
//! per source, and picks the next frequency by maximizing
//! `alpha(omega) = max_n EI_n(omega)`. On convergence the estimate for
//! source n is the GP posterior-mean maximum inflated by three posterior
//! standard deviations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

use crate::gp::{GpHyperParams, GpModel, GpSnapshot, HyperSearchBounds};
use crate::lti::{LtiError, RationalTransferFunction};
use crate::probe::{probe_system_seeded, ProbeConfig, ProbeError, ProbeResult};

#[derive(Debug, thiserror::Error)]
pub enum BoError {
    #[error("campaign needs at least one source plant")]
    NoSources,
    #[error("plant '{name}' must be BIBO stable and proper")]
    InvalidPlant { name: String },
    #[error(
        "source '{name}' has relative degree {source_degree} > target relative degree \
         {target_degree}; the inverse composition would be improper"
    )]
    IncompatibleRelativeDegree {
        name: String,
        source_degree: isize,
        target_degree: isize,
    },
    #[error("invalid convergence policy: {0}")]
    InvalidPolicy(String),
    #[error("campaign did not converge within {max_iterations} iterations")]
    NotConverged {
        max_iterations: u32,
        partial: Box<CampaignOutcome>,
    },
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Gp(#[from] crate::gp::GpError),
    #[error(transparent)]
    Lti(#[from] LtiError),
}

/// Number of log-spaced grid points used for acquisition and
/// posterior-mean maximization before golden-section refinement.
pub const ACQUISITION_GRID_POINTS: usize = 512;

/// EI is treated as exactly zero below this posterior standard deviation.
const EI_SIGMA_FLOOR: f64 = 1e-12;

/// Standard normal CDF.
fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal PDF.
fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Expected improvement of sampling `omega` over the incumbent `f_max`:
/// `(mean - f_max) Phi(Z) + sigma phi(Z)` with
/// `Z = (mean - f_max) / sigma`. Returns 0 when the posterior standard
/// deviation collapses below 1e-12.
pub fn expected_improvement(model: &GpModel, omega: f64, f_max: f64) -> f64 {
    let (mean, var) = model.posterior(omega);
    let sigma = var.sqrt();
    if sigma < EI_SIGMA_FLOOR {
        return 0.0;
    }
    let z = (mean - f_max) / sigma;
    ((mean - f_max) * normal_cdf(z) + sigma * normal_pdf(z)).max(0.0)
}

/// Log-spaced grid over `[omega_min, omega_max]`. The endpoints are the
/// window bounds exactly (not reconstructed through the log transform), so
/// grid points always satisfy window membership checks.
pub fn log_grid(omega_min: f64, omega_max: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && omega_min > 0.0 && omega_max > omega_min);
    let (lo, hi) = (omega_min.log10(), omega_max.log10());
    (0..points)
        .map(|i| {
            if i == 0 {
                omega_min
            } else if i == points - 1 {
                omega_max
            } else {
                let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
                10f64.powf(x).clamp(omega_min, omega_max)
            }
        })
        .collect()
}

/// Argmax of `alpha(omega) = max_n EI_n(omega)` over the grid, with
/// golden-section refinement around the best grid point. Ties break toward
/// the lowest frequency; when every EI is zero the lowest grid frequency is
/// returned with value 0.
pub fn acquisition_argmax(
    models: &[GpModel],
    f_maxes: &[f64],
    grid: &[f64],
) -> (f64, f64) {
    let alpha = |omega: f64| {
        models
            .iter()
            .zip(f_maxes)
            .map(|(m, fm)| expected_improvement(m, omega, *fm))
            .fold(0.0f64, f64::max)
    };
    grid_argmax_refined(alpha, grid)
}

/// Argmax of the GP posterior mean over the grid with refinement.
pub fn posterior_mean_argmax(model: &GpModel, grid: &[f64]) -> (f64, f64) {
    grid_argmax_refined(|omega| model.posterior(omega).0, grid)
}

fn grid_argmax_refined(f: impl Fn(f64) -> f64, grid: &[f64]) -> (f64, f64) {
    let mut best_idx = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, omega) in grid.iter().enumerate() {
        let v = f(*omega);
        if v > best_val {
            best_val = v;
            best_idx = i;
        }
    }
    if best_val == 0.0 {
        // Flat-zero surface (converged, noise-free, fully sampled):
        // tie-break to the lowest frequency.
        return (grid[0], 0.0);
    }
    let lo = grid[best_idx.saturating_sub(1)];
    let hi = grid[(best_idx + 1).min(grid.len() - 1)];
    let refined_log = crate::gp::golden_max(|x| f(10f64.powf(x)), lo.log10(), hi.log10(), 40);
    let refined = 10f64.powf(refined_log).clamp(grid[0], grid[grid.len() - 1]);
    let refined_val = f(refined);
    if refined_val > best_val {
        (refined, refined_val)
    } else {
        (grid[best_idx], best_val)
    }
}

/// When to stop iterating: the per-source maximum of the GP posterior mean
/// must change by less than `rel_tol` (relatively) for `patience`
/// consecutive iterations across all sources simultaneously, and every
/// source's best expected improvement must have decayed below
/// `acquisition_rel_tol` times its incumbent objective value. The second
/// gate keeps the loop alive while unexplored regions still plausibly hide
/// a higher peak; without it an oversmoothed GP can freeze the trace
/// before the peak's neighborhood was ever probed.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ConvergencePolicy {
    pub rel_tol: f64,
    pub patience: u32,
    pub min_iterations: u32,
    pub max_iterations: u32,
    /// Per-source EI exhaustion threshold, relative to the incumbent
    /// objective maximum. Zero disables the gate.
    pub acquisition_rel_tol: f64,
}

impl Default for ConvergencePolicy {
    fn default() -> Self {
        Self {
            rel_tol: 0.01,
            patience: 3,
            min_iterations: 6,
            max_iterations: 40,
            acquisition_rel_tol: 0.01,
        }
    }
}

impl ConvergencePolicy {
    fn validate(&self) -> Result<(), BoError> {
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(BoError::InvalidPolicy(format!("rel_tol = {}", self.rel_tol)));
        }
        if !(self.acquisition_rel_tol.is_finite() && self.acquisition_rel_tol >= 0.0) {
            return Err(BoError::InvalidPolicy(format!(
                "acquisition_rel_tol = {}",
                self.acquisition_rel_tol
            )));
        }
        if self.patience == 0 {
            return Err(BoError::InvalidPolicy("patience must be >= 1".into()));
        }
        if self.max_iterations < self.min_iterations.max(1) {
            return Err(BoError::InvalidPolicy(format!(
                "max_iterations {} below min_iterations {}",
                self.max_iterations, self.min_iterations
            )));
        }
        Ok(())
    }
}

/// A plant with a stable identity across reports.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct NamedPlant {
    pub name: String,
    pub plant: RationalTransferFunction,
}

impl NamedPlant {
    pub fn new(name: impl Into<String>, plant: RationalTransferFunction) -> Self {
        Self {
            name: name.into(),
            plant,
        }
    }
}

/// The per-source campaign output: the inflated estimate
/// `e_star = mean + 3 sigma` of the objective peak at `omega_star`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BoundEstimate {
    pub source_name: String,
    pub omega_star: f64,
    pub e_star: f64,
    pub posterior_mean_at_star: f64,
    pub posterior_sigma_at_star: f64,
    pub iterations_used: u32,
}

/// One campaign iteration for the transcript: the probed frequency, the
/// per-source objective values, and the per-source posterior-mean maxima
/// after refitting.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    pub omega_sample: f64,
    pub probe: ProbeResult,
    pub max_posterior_means: Vec<f64>,
    pub acquisition_value: f64,
}

/// Everything a finished (or aborted) campaign produced.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CampaignOutcome {
    pub estimates: Vec<BoundEstimate>,
    pub iterations: u32,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
    /// Per-iteration, per-source trace of the posterior-mean maximum.
    pub convergence_trace: Vec<Vec<f64>>,
    pub gp_snapshots: Vec<GpSnapshot>,
    pub seed: u64,
}

/// State of one run of the bound-estimation loop over N sources and one
/// target. All GPs always share the same sampled frequency set.
pub struct BoCampaign {
    sources: Vec<NamedPlant>,
    target: RationalTransferFunction,
    probe_cfg: ProbeConfig,
    gp_noise_variance: f64,
    policy: ConvergencePolicy,
    hyper_bounds: HyperSearchBounds,
    grid: Vec<f64>,
    rng: ChaCha8Rng,
    seed: u64,
    datasets: Vec<Vec<(f64, f64)>>,
    models: Vec<GpModel>,
    history: Vec<IterationRecord>,
    convergence_trace: Vec<Vec<f64>>,
    next_omega: f64,
    stable_iterations: u32,
    converged: bool,
}

impl BoCampaign {
    pub fn new(
        sources: Vec<NamedPlant>,
        target: RationalTransferFunction,
        probe_cfg: ProbeConfig,
        gp_noise_variance: f64,
        policy: ConvergencePolicy,
        seed: u64,
    ) -> Result<Self, BoError> {
        if sources.is_empty() {
            return Err(BoError::NoSources);
        }
        probe_cfg.validate()?;
        policy.validate()?;
        let r_t = target.relative_degree();
        if !target.is_proper() || !target.is_bibo_stable()? {
            return Err(BoError::InvalidPlant {
                name: "target".into(),
            });
        }
        for s in &sources {
            if !s.plant.is_proper() || !s.plant.is_bibo_stable()? {
                return Err(BoError::InvalidPlant {
                    name: s.name.clone(),
                });
            }
            let r_s = s.plant.relative_degree();
            if r_s > r_t {
                return Err(BoError::IncompatibleRelativeDegree {
                    name: s.name.clone(),
                    source_degree: r_s,
                    target_degree: r_t,
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Initial probe frequency drawn uniformly over the window.
        let next_omega = rng.random_range(probe_cfg.omega_min..=probe_cfg.omega_max);
        let grid = log_grid(
            probe_cfg.omega_min,
            probe_cfg.omega_max,
            ACQUISITION_GRID_POINTS,
        );
        let n = sources.len();
        Ok(Self {
            sources,
            target,
            probe_cfg,
            gp_noise_variance,
            policy,
            hyper_bounds: HyperSearchBounds::default(),
            grid,
            rng,
            seed,
            datasets: vec![Vec::new(); n],
            models: Vec::new(),
            history: Vec::new(),
            convergence_trace: Vec::new(),
            next_omega,
            stable_iterations: 0,
            converged: false,
        })
    }

    pub fn iterations(&self) -> u32 {
        self.history.len() as u32
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    pub fn convergence_trace(&self) -> &[Vec<f64>] {
        &self.convergence_trace
    }

    pub fn models(&self) -> &[GpModel] {
        &self.models
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The frequency the next iteration will probe.
    pub fn next_sample(&self) -> f64 {
        self.next_omega
    }

    fn f_maxes(&self) -> Vec<f64> {
        self.datasets
            .iter()
            .map(|d| d.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }

    /// Runs one iteration: probe target and sources at the pending
    /// frequency, extend every dataset, refit the GPs, update the
    /// convergence state, and select the next frequency.
    pub fn step(&mut self) -> Result<&IterationRecord, BoError> {
        let omega = self.next_omega;
        let target_point =
            probe_system_seeded(&self.target, omega, &self.probe_cfg, &mut self.rng)?;
        let mut source_points = Vec::with_capacity(self.sources.len());
        for s in &self.sources {
            source_points.push(probe_system_seeded(
                &s.plant,
                omega,
                &self.probe_cfg,
                &mut self.rng,
            )?);
        }
        let probe = ProbeResult::new(source_points, target_point)?;

        for (dataset, value) in self.datasets.iter_mut().zip(&probe.objective_values) {
            dataset.push((omega, *value));
        }

        // Refit: prior mean tracks the running dataset mean; kernel
        // hyperparameters are refit once three points exist, fixed defaults
        // before that.
        let mut models = Vec::with_capacity(self.sources.len());
        for dataset in &self.datasets {
            let prior_mean =
                dataset.iter().map(|(_, v)| v).sum::<f64>() / dataset.len() as f64;
            let base = GpModel::new(
                dataset.clone(),
                prior_mean,
                GpHyperParams::default(),
                self.gp_noise_variance,
            )?;
            let model = if dataset.len() >= 3 {
                base.fit_hyperparameters(&self.hyper_bounds)?
            } else {
                base
            };
            models.push(model);
        }
        self.models = models;

        let max_means: Vec<f64> = self
            .models
            .iter()
            .map(|m| posterior_mean_argmax(m, &self.grid).1)
            .collect();

        if let Some(prev) = self.convergence_trace.last() {
            let all_stable = prev.iter().zip(&max_means).all(|(p, c)| {
                (c - p).abs() <= self.policy.rel_tol * p.abs().max(1e-12)
            });
            self.stable_iterations = if all_stable {
                self.stable_iterations + 1
            } else {
                0
            };
        }
        self.convergence_trace.push(max_means.clone());

        let f_maxes = self.f_maxes();
        let mut per_source_max_ei = vec![0.0f64; self.models.len()];
        for omega in &self.grid {
            for (n, (model, f_max)) in self.models.iter().zip(&f_maxes).enumerate() {
                per_source_max_ei[n] =
                    per_source_max_ei[n].max(expected_improvement(model, *omega, *f_max));
            }
        }
        // A point whose posterior deviation equals the observation noise has
        // EI of about phi(0) * sigma_n even with nothing left to learn; EI
        // below that floor counts as exhausted regardless of the relative
        // threshold.
        let ei_floor = normal_pdf(0.0) * self.gp_noise_variance.sqrt();
        let acquisition_exhausted = per_source_max_ei.iter().zip(&f_maxes).all(|(ei, fm)| {
            *ei <= (self.policy.acquisition_rel_tol * fm.abs().max(1e-9)).max(ei_floor)
        });

        let iteration = self.history.len() as u32 + 1;
        if self.stable_iterations >= self.policy.patience
            && iteration >= self.policy.min_iterations
            && acquisition_exhausted
        {
            self.converged = true;
        }

        let (next_omega, acq) = acquisition_argmax(&self.models, &f_maxes, &self.grid);
        self.next_omega = next_omega;

        self.history.push(IterationRecord {
            iteration,
            omega_sample: omega,
            probe,
            max_posterior_means: max_means,
            acquisition_value: acq,
        });
        Ok(self.history.last().expect("just pushed"))
    }

    /// Extracts one estimate per source from the current GP posteriors:
    /// `omega_star` maximizes the posterior mean, and the bound estimate is
    /// the mean there plus three posterior standard deviations.
    pub fn estimates(&self) -> Vec<BoundEstimate> {
        let iterations = self.iterations();
        self.sources
            .iter()
            .zip(&self.models)
            .map(|(s, m)| {
                let (omega_star, _) = posterior_mean_argmax(m, &self.grid);
                let (mean, var) = m.posterior(omega_star);
                let sigma = var.sqrt();
                BoundEstimate {
                    source_name: s.name.clone(),
                    omega_star,
                    e_star: mean + 3.0 * sigma,
                    posterior_mean_at_star: mean,
                    posterior_sigma_at_star: sigma,
                    iterations_used: iterations,
                }
            })
            .collect()
    }

    fn outcome(&self) -> CampaignOutcome {
        CampaignOutcome {
            estimates: self.estimates(),
            iterations: self.iterations(),
            converged: self.converged,
            history: self.history.clone(),
            convergence_trace: self.convergence_trace.clone(),
            gp_snapshots: self.models.iter().map(|m| m.snapshot()).collect(),
            seed: self.seed,
        }
    }
}

/// Drives a [`BoCampaign`] to convergence and returns the outcome.
/// Non-convergence within the policy's iteration budget is an error that
/// still carries the partial state.
pub fn run_campaign(
    sources: Vec<NamedPlant>,
    target: RationalTransferFunction,
    probe_cfg: ProbeConfig,
    gp_noise_variance: f64,
    policy: ConvergencePolicy,
    seed: u64,
) -> Result<CampaignOutcome, BoError> {
    let mut campaign = BoCampaign::new(
        sources,
        target,
        probe_cfg,
        gp_noise_variance,
        policy,
        seed,
    )?;
    while !campaign.converged() {
        if campaign.iterations() >= policy.max_iterations {
            return Err(BoError::NotConverged {
                max_iterations: policy.max_iterations,
                partial: Box::new(campaign.outcome()),
            });
        }
        campaign.step()?;
    }
    Ok(campaign.outcome())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_point_model(value: f64, prior: f64, sf2: f64) -> GpModel {
        GpModel::new(
            vec![(1.0, value)],
            prior,
            GpHyperParams {
                signal_variance: sf2,
                length_scale: 0.5,
            },
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn ei_zero_at_noise_free_data_point() {
        let m = single_point_model(0.7, 0.0, 1.0);
        assert_eq!(expected_improvement(&m, 1.0, 0.7), 0.0);
    }

    #[test]
    fn ei_at_z_zero_is_phi_zero() {
        // Far from the single data point the posterior reverts to the prior
        // (mean = 0.5, sigma = 1); with f_max = 0.5 this puts Z = 0.
        let m = single_point_model(0.5, 0.5, 1.0);
        let ei = expected_improvement(&m, 1e9, 0.5);
        assert_relative_eq!(ei, 0.3989422804014327, epsilon = 1e-9);
    }

    #[test]
    fn ei_asymptotic_when_mean_far_above_incumbent() {
        // Posterior reverts to prior mean 10 with sigma 0.1; f_max = 0.
        let m = single_point_model(10.0, 10.0, 0.01);
        let ei = expected_improvement(&m, 1e9, 0.0);
        assert_relative_eq!(ei, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn acquisition_reduces_to_single_gp_case() {
        let m = GpModel::new(
            vec![(0.5, 0.2), (2.0, 0.6), (8.0, 0.4)],
            0.4,
            GpHyperParams::default(),
            1e-6,
        )
        .unwrap();
        let grid = log_grid(0.1, 10.0, 256);
        let single = acquisition_argmax(std::slice::from_ref(&m), &[0.6], &grid);
        let double = acquisition_argmax(&[m.clone(), m.clone()], &[0.6, 0.6], &grid);
        assert_eq!(single.0, double.0);
        assert_relative_eq!(single.1, double.1, epsilon = 1e-15);
    }

    #[test]
    fn all_zero_ei_ties_to_lowest_frequency() {
        // Vanishing signal variance collapses EI below the sigma floor
        // everywhere.
        let m = GpModel::new(
            vec![(0.5, 0.0), (2.0, 0.0), (8.0, 0.0)],
            0.0,
            GpHyperParams {
                signal_variance: 1e-30,
                length_scale: 1.0,
            },
            0.0,
        )
        .unwrap();
        let grid = log_grid(0.1, 10.0, 128);
        let (omega, value) = acquisition_argmax(std::slice::from_ref(&m), &[0.0], &grid);
        assert_eq!(omega, grid[0]);
        assert_eq!(value, 0.0);
    }

    #[test]
    fn campaign_rejects_incompatible_relative_degrees() {
        let target = RationalTransferFunction::new(&[1.0], &[1.0, 1.0]).unwrap();
        let source =
            RationalTransferFunction::new(&[1.0], &[1.0, 2.0, 1.0]).unwrap();
        let err = BoCampaign::new(
            vec![NamedPlant::new("slow", source)],
            target,
            ProbeConfig::default(),
            1e-6,
            ConvergencePolicy::default(),
            0,
        )
        .err()
        .unwrap();
        assert!(matches!(err, BoError::IncompatibleRelativeDegree { .. }));
    }

    #[test]
    fn campaign_rejects_unstable_plants() {
        let target = RationalTransferFunction::new(&[1.0], &[1.0, -1.0]).unwrap();
        let source = RationalTransferFunction::new(&[1.0], &[1.0, 1.0]).unwrap();
        let err = BoCampaign::new(
            vec![NamedPlant::new("s", source)],
            target,
            ProbeConfig::default(),
            1e-6,
            ConvergencePolicy::default(),
            0,
        )
        .err()
        .unwrap();
        assert!(matches!(err, BoError::InvalidPlant { .. }));
    }
}

//! Harness configuration: probing, GP regularization, convergence, and
//! trajectory sampling, loadable from JSON with per-field defaults.

use invcert::catalog::TrajectoryParams;
use invcert::{ConvergencePolicy, ProbeConfig};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct GpConfig {
    /// Observation-noise variance used by the per-source GPs. Also sets the
    /// floor of the 3-sigma inflation, so it should not be driven to zero
    /// even for noise-free probes.
    pub noise_variance: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            noise_variance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TrajectoryConfig {
    pub count: usize,
    #[serde(flatten)]
    pub params: TrajectoryParams,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            count: 5,
            params: TrajectoryParams::default(),
        }
    }
}

/// The resolved harness configuration. Every field has a default; a config
/// file only overrides what it names.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    pub probe: ProbeConfig,
    pub gp: GpConfig,
    pub convergence: ConvergencePolicy,
    pub trajectories: TrajectoryConfig,
    /// Multiplies the combined bound in verdicts; values above 1 are more
    /// conservative.
    pub safety_margin: f64,
}

impl Default for HarnessConfig {
    /// Desk-scale harness defaults: longer settle/measure windows than the
    /// bare probe defaults so residual transients stay well below the GP
    /// noise floor.
    fn default() -> Self {
        Self {
            probe: ProbeConfig {
                settle_periods: 12,
                measure_periods: 5,
                sample_period: 0.002,
                ..ProbeConfig::default()
            },
            gp: GpConfig::default(),
            convergence: ConvergencePolicy::default(),
            trajectories: TrajectoryConfig::default(),
            safety_margin: 1.0,
        }
    }
}

impl HarnessConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("failed to read {}: {e}", path.display()))?;
        Ok(Self::from_json(&text)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

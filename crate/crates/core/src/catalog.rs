//! Plant catalogs and trajectory suites for reproducible campaigns.
//!
//! A catalog names one target robot and N source robots, each as a triple
//! of per-axis SISO plants. Loading validates the fleet against the
//! assumptions the certification rests on: every plant stable, proper, and
//! minimum phase (stable inverse dynamics), with relative-degree
//! compatibility recorded per (source, axis) pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lti::RationalTransferFunction;
use crate::seeding::derive_seed;
use crate::signal::SampledSignal;

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("failed to read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("failed to parse catalog: {0}")]
    Parse(String),
    #[error("catalog validation failed:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("robot '{robot}' has no plant for axis {axis}")]
    MissingAxis { robot: String, axis: Axis },
    #[error("unknown robot '{0}'")]
    UnknownRobot(String),
    #[error("trajectory '{name}' invalid: {reason}")]
    InvalidTrajectory { name: String, reason: String },
}

/// One of the three decoupled translation axes.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Y => write!(f, "y"),
            Axis::Z => write!(f, "z"),
        }
    }
}

/// A named per-axis plant as stored in catalog files: coefficients in
/// descending powers of s.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PlantEntry {
    pub axis: Axis,
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
}

/// A robot: one plant per axis plus identity.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RobotSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub axes: Vec<PlantEntry>,
}

impl RobotSpec {
    pub fn plant(&self, axis: Axis) -> Result<RationalTransferFunction, CatalogError> {
        let entry = self
            .axes
            .iter()
            .find(|e| e.axis == axis)
            .ok_or_else(|| CatalogError::MissingAxis {
                robot: self.name.clone(),
                axis,
            })?;
        RationalTransferFunction::new(&entry.numerator, &entry.denominator)
            .map_err(|e| CatalogError::Parse(format!("{}/{}: {}", self.name, axis, e)))
    }
}

/// Per-(source, axis) relative-degree compatibility with the target.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PairCompatibility {
    pub source: String,
    pub axis: Axis,
    pub source_relative_degree: isize,
    pub target_relative_degree: isize,
    pub compatible: bool,
}

/// Validation outcome: an exhaustive problem list plus the recorded
/// pair compatibilities.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CatalogReport {
    pub problems: Vec<String>,
    pub pairs: Vec<PairCompatibility>,
}

impl CatalogReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }
}

/// A target robot and the source fleet whose inverse modules are up for
/// transfer.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Catalog {
    pub description: String,
    pub target: RobotSpec,
    pub sources: Vec<RobotSpec>,
}

impl Catalog {
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        serde_json::from_str(text).map_err(|e| CatalogError::Parse(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|e| CatalogError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn robot(&self, name: &str) -> Result<&RobotSpec, CatalogError> {
        if self.target.name == name {
            return Ok(&self.target);
        }
        self.sources
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| CatalogError::UnknownRobot(name.to_string()))
    }

    /// Checks every plant (stable, proper, minimum phase, one entry per
    /// axis, unique names) and records relative-degree compatibility for
    /// every (source, axis) pair. All problems are reported at once.
    pub fn validate(&self) -> CatalogReport {
        let mut problems = Vec::new();
        let mut pairs = Vec::new();

        let mut names: Vec<&str> = vec![self.target.name.as_str()];
        names.extend(self.sources.iter().map(|s| s.name.as_str()));
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                problems.push(format!("robot #{i} has an empty name"));
            }
            if names[..i].contains(n) {
                problems.push(format!("duplicate robot name '{n}'"));
            }
        }

        let mut check_robot = |robot: &RobotSpec| {
            for axis in Axis::ALL {
                let count = robot.axes.iter().filter(|e| e.axis == axis).count();
                if count != 1 {
                    problems.push(format!(
                        "{}: expected exactly one {axis}-axis plant, found {count}",
                        robot.name
                    ));
                    continue;
                }
                match robot.plant(axis) {
                    Err(e) => problems.push(e.to_string()),
                    Ok(plant) => {
                        match plant.is_bibo_stable() {
                            Ok(true) => {}
                            Ok(false) => problems
                                .push(format!("{}/{axis}: plant is not BIBO stable", robot.name)),
                            Err(e) => {
                                problems.push(format!("{}/{axis}: {e}", robot.name))
                            }
                        }
                        match plant.is_minimum_phase() {
                            Ok(true) => {}
                            Ok(false) => problems.push(format!(
                                "{}/{axis}: plant is not minimum phase (inverse dynamics unstable)",
                                robot.name
                            )),
                            Err(e) => {
                                problems.push(format!("{}/{axis}: {e}", robot.name))
                            }
                        }
                    }
                }
            }
        };
        check_robot(&self.target);
        for s in &self.sources {
            check_robot(s);
        }

        for source in &self.sources {
            for axis in Axis::ALL {
                if let (Ok(sp), Ok(tp)) = (source.plant(axis), self.target.plant(axis)) {
                    let (r_s, r_t) = (sp.relative_degree(), tp.relative_degree());
                    let compatible = r_t >= r_s;
                    if !compatible {
                        problems.push(format!(
                            "{}/{axis}: source relative degree {r_s} exceeds target {r_t}",
                            source.name
                        ));
                    }
                    pairs.push(PairCompatibility {
                        source: source.name.clone(),
                        axis,
                        source_relative_degree: r_s,
                        target_relative_degree: r_t,
                        compatible,
                    });
                }
            }
        }

        CatalogReport { problems, pairs }
    }

    /// The built-in desk-scale fleet: a second-order target, two sources
    /// perturbed from it by roughly 10% (similar agility), and three slower
    /// sources whose dominant time constants are 3-5x larger with an extra
    /// first-order delay-approximation pole.
    pub fn default_catalog() -> Self {
        fn robot(name: &str, description: &str, dens: [[f64; 3]; 3]) -> RobotSpec {
            RobotSpec {
                name: name.to_string(),
                description: Some(description.to_string()),
                axes: Axis::ALL
                    .iter()
                    .zip(dens.iter())
                    .map(|(axis, den)| PlantEntry {
                        axis: *axis,
                        numerator: vec![1.0],
                        denominator: den.to_vec(),
                    })
                    .collect(),
            }
        }
        Catalog {
            description: "Desk-scale fleet: one second-order target, two similar-agility \
                          sources, three slower sources with delay-like extra poles."
                .to_string(),
            target: robot(
                "target",
                "second-order baseline tracking loop, poles near -4 and -5 rad/s",
                [[0.05, 0.45, 1.0], [0.055, 0.47, 1.0], [0.03, 0.35, 1.0]],
            ),
            sources: vec![
                robot(
                    "agile_1",
                    "target coefficients perturbed by about +10%",
                    [[0.055, 0.50, 1.0], [0.06, 0.52, 1.0], [0.033, 0.385, 1.0]],
                ),
                robot(
                    "agile_2",
                    "target coefficients perturbed by about -10%",
                    [[0.045, 0.41, 1.0], [0.05, 0.43, 1.0], [0.027, 0.315, 1.0]],
                ),
                robot(
                    "slow_1",
                    "(0.9s+1)(0.15s+1) on x/y; milder z axis",
                    [[0.135, 1.05, 1.0], [0.13, 1.0, 1.0], [0.048, 0.52, 1.0]],
                ),
                robot(
                    "slow_2",
                    "(0.7s+1)(0.2s+1) on x/y; sluggish z axis",
                    [[0.14, 0.90, 1.0], [0.145, 0.95, 1.0], [0.09, 0.75, 1.0]],
                ),
                robot(
                    "slow_3",
                    "(1.1s+1)(0.25s+1) on x/y; the least agile of the fleet",
                    [[0.275, 1.35, 1.0], [0.26, 1.30, 1.0], [0.07, 0.64, 1.0]],
                ),
            ],
        }
    }
}

/// Parameters for sampling random sinusoidal test trajectories.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TrajectoryParams {
    pub amplitude: f64,
    pub omega_low: f64,
    pub omega_high: f64,
    /// The duration is the smallest whole number of the slowest axis period
    /// that reaches this many seconds.
    pub min_duration: f64,
    pub sample_period: f64,
}

impl Default for TrajectoryParams {
    fn default() -> Self {
        Self {
            amplitude: 0.25,
            omega_low: 0.05,
            omega_high: 2.0,
            min_duration: 20.0,
            sample_period: 1e-3,
        }
    }
}

/// One three-axis test trajectory
/// `[A sin(wx t), A cos(wy t), A sin(wz t)]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrajectorySpec {
    pub name: String,
    pub amplitudes: [f64; 3],
    pub frequencies: [f64; 3],
    pub duration: f64,
    pub sample_period: f64,
    pub seed: u64,
}

impl TrajectorySpec {
    /// Materializes the per-axis desired-output signals.
    pub fn signals(&self) -> Result<[SampledSignal; 3], CatalogError> {
        let mk = |f: fn(f64) -> f64, amplitude: f64, omega: f64| {
            SampledSignal::from_fn(self.duration, self.sample_period, move |t| {
                amplitude * f(omega * t)
            })
            .map_err(|e| CatalogError::InvalidTrajectory {
                name: self.name.clone(),
                reason: e.to_string(),
            })
        };
        Ok([
            mk(f64::sin, self.amplitudes[0], self.frequencies[0])?,
            mk(f64::cos, self.amplitudes[1], self.frequencies[1])?,
            mk(f64::sin, self.amplitudes[2], self.frequencies[2])?,
        ])
    }

    pub fn slowest_period(&self) -> f64 {
        let w = self
            .frequencies
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        2.0 * std::f64::consts::PI / w
    }
}

/// A named set of test trajectories.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrajectorySuite {
    pub trajectories: Vec<TrajectorySpec>,
}

impl TrajectorySuite {
    /// Draws `count` trajectories with axis frequencies sampled uniformly
    /// from `[omega_low, omega_high]`, deterministically from `seed`.
    pub fn sample(count: usize, seed: u64, params: &TrajectoryParams) -> Self {
        let trajectories = (0..count)
            .map(|i| {
                let traj_seed = derive_seed(seed, i as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(traj_seed);
                let frequencies = [
                    rng.random_range(params.omega_low..=params.omega_high),
                    rng.random_range(params.omega_low..=params.omega_high),
                    rng.random_range(params.omega_low..=params.omega_high),
                ];
                let slowest = frequencies.iter().cloned().fold(f64::INFINITY, f64::min);
                let period = 2.0 * std::f64::consts::PI / slowest;
                let cycles = (params.min_duration / period).ceil().max(1.0);
                TrajectorySpec {
                    name: format!("traj_{}", i + 1),
                    amplitudes: [params.amplitude; 3],
                    frequencies,
                    duration: cycles * period,
                    sample_period: params.sample_period,
                    seed: traj_seed,
                }
            })
            .collect();
        Self { trajectories }
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        serde_json::from_str(text).map_err(|e| CatalogError::Parse(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|e| CatalogError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    /// Every frequency must lie in the probe window and every duration must
    /// be a whole number of the slowest period.
    pub fn validate(&self, omega_min: f64, omega_max: f64) -> Result<(), CatalogError> {
        let mut problems = Vec::new();
        for t in &self.trajectories {
            for w in t.frequencies {
                if !(w >= omega_min && w <= omega_max) {
                    problems.push(format!(
                        "{}: frequency {w} outside probe window [{omega_min}, {omega_max}]",
                        t.name
                    ));
                }
            }
            let period = t.slowest_period();
            let cycles = t.duration / period;
            if (cycles - cycles.round()).abs() > 1e-6 {
                problems.push(format!(
                    "{}: duration {} is not a whole number of the slowest period {}",
                    t.name, t.duration, period
                ));
            }
            if t.sample_period <= 0.0 {
                problems.push(format!("{}: non-positive sample period", t.name));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CatalogError::Invalid(problems))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_catalog_is_valid() {
        let report = Catalog::default_catalog().validate();
        assert!(report.is_valid(), "problems: {:?}", report.problems);
        assert_eq!(report.pairs.len(), 15);
        assert!(report.pairs.iter().all(|p| p.compatible));
    }

    #[test]
    fn catalog_json_round_trip() {
        let c = Catalog::default_catalog();
        let json = c.to_json_pretty();
        let back = Catalog::from_json(&json).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn validation_lists_all_problems() {
        let mut c = Catalog::default_catalog();
        // Break two things at once: unstable x-axis target and a duplicate
        // name.
        c.target.axes[0].denominator = vec![1.0, -1.0];
        c.sources[1].name = c.sources[0].name.clone();
        let report = c.validate();
        assert!(!report.is_valid());
        assert!(report.problems.len() >= 2);
        assert!(report.problems.iter().any(|p| p.contains("not BIBO stable")));
        assert!(report.problems.iter().any(|p| p.contains("duplicate")));
    }

    #[test]
    fn nonminimum_phase_plants_are_rejected() {
        let mut c = Catalog::default_catalog();
        // A right-half-plane zero: stable but with unstable inverse.
        c.sources[0].axes[0].numerator = vec![-0.1, 1.0];
        let report = c.validate();
        assert!(report
            .problems
            .iter()
            .any(|p| p.contains("not minimum phase")));
    }

    #[test]
    fn relative_degree_incompatibility_is_recorded_and_reported() {
        let mut c = Catalog::default_catalog();
        // Give a source an extra pole: relative degree 3 > target's 2.
        c.sources[4].axes[2].denominator = vec![0.01, 0.07, 0.64, 1.0];
        let report = c.validate();
        assert!(!report.is_valid());
        let pair = report
            .pairs
            .iter()
            .find(|p| p.source == c.sources[4].name && p.axis == Axis::Z)
            .unwrap();
        assert!(!pair.compatible);
        assert_eq!(pair.source_relative_degree, 3);
    }

    #[test]
    fn suite_sampling_is_deterministic_and_windowed() {
        let params = TrajectoryParams::default();
        let a = TrajectorySuite::sample(5, 11, &params);
        let b = TrajectorySuite::sample(5, 11, &params);
        assert_eq!(a, b);
        a.validate(0.05, 10.0).unwrap();
        for t in &a.trajectories {
            for w in t.frequencies {
                assert!((0.05..=2.0).contains(&w));
            }
            let cycles = t.duration / t.slowest_period();
            assert!((cycles - cycles.round()).abs() < 1e-9);
            assert!(t.duration >= params.min_duration);
        }
        // different seeds draw different frequencies
        let c = TrajectorySuite::sample(5, 12, &params);
        assert_ne!(a, c);
    }

    #[test]
    fn trajectory_signals_shapes() {
        let t = TrajectorySpec {
            name: "t".into(),
            amplitudes: [0.25; 3],
            frequencies: [1.0, 0.5, 2.0],
            duration: 4.0 * std::f64::consts::PI,
            sample_period: 0.001,
            seed: 0,
        };
        let [x, y, z] = t.signals().unwrap();
        assert_eq!(x.len(), y.len());
        assert_eq!(y.len(), z.len());
        // y starts at the cosine peak, x and z at zero
        assert_eq!(x.samples()[0], 0.0);
        assert_eq!(y.samples()[0], 0.25);
        assert_eq!(z.samples()[0], 0.0);
    }
}

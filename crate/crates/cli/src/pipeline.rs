//! The four campaign commands: estimate, verify, asymmetry, oracle.
//!
//! Everything here is deterministic under a fixed seed: per-axis campaigns
//! draw their randomness from sub-seeds derived from the user seed, suites
//! are sampled from a labeled sub-seed, and all output files are written
//! with fixed layouts and formatting.

use std::path::Path;

use rayon::prelude::*;

use invcert::bo::log_grid;
use invcert::catalog::CatalogReport;
use invcert::seeding::derive_seed_labeled;
use invcert::{
    error_tf, run_campaign, verdict_with_margin, Axis, BoError, BoundEstimate, Catalog,
    NamedPlant, RationalTransferFunction, SampledSignal, TrajectorySuite, TransferVerdict,
};

use crate::config::HarnessConfig;
use crate::report::{fingerprint, fmt_full, fmt_table, write_json, CsvTable};

/// Shared inputs of one command invocation.
pub struct RunContext {
    pub catalog: Catalog,
    pub config: HarnessConfig,
    pub seed: u64,
    pub config_fingerprint: String,
    pub catalog_fingerprint: String,
}

impl RunContext {
    pub fn new(catalog: Catalog, config: HarnessConfig, seed: u64) -> Self {
        let catalog_json = catalog.to_json_pretty();
        let config_json = config.to_json_pretty();
        Self {
            config_fingerprint: fingerprint(&[&config_json, &catalog_json]),
            catalog_fingerprint: fingerprint(&[&catalog_json]),
            catalog,
            config,
            seed,
        }
    }

    fn ensure_out_dir(&self, out_dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| anyhow::anyhow!("cannot create {}: {e}", out_dir.display()))
    }

    /// Catalog validation with the full problem list surfaced at once.
    fn validated_catalog(&self, out_dir: &Path) -> anyhow::Result<CatalogReport> {
        let report = self.catalog.validate();
        write_json(&out_dir.join("catalog_report.json"), &report)?;
        if !report.is_valid() {
            anyhow::bail!(
                "catalog validation failed with {} problem(s):\n{}",
                report.problems.len(),
                report.problems.join("\n")
            );
        }
        Ok(report)
    }

    fn axis_plants(&self, axis: Axis) -> anyhow::Result<(RationalTransferFunction, Vec<NamedPlant>)> {
        let target = self.catalog.target.plant(axis)?;
        let sources = self
            .catalog
            .sources
            .iter()
            .map(|s| Ok(NamedPlant::new(s.name.clone(), s.plant(axis)?)))
            .collect::<Result<Vec<_>, invcert::CatalogError>>()?;
        Ok((target, sources))
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AxisEstimates {
    pub axis: Axis,
    pub iterations: u32,
    pub converged: bool,
    pub estimates: Vec<BoundEstimate>,
}

/// The estimate command's output, also persisted as `estimates.json`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EstimateArtifacts {
    pub seed: u64,
    pub config_fingerprint: String,
    pub catalog_fingerprint: String,
    pub source_names: Vec<String>,
    pub axes: Vec<AxisEstimates>,
}

impl EstimateArtifacts {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("failed to read {}: {e}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn e_star(&self, axis: Axis, source: &str) -> Option<f64> {
        self.axes
            .iter()
            .find(|a| a.axis == axis)?
            .estimates
            .iter()
            .find(|e| e.source_name == source)
            .map(|e| e.e_star)
    }
}

/// Runs one bound-estimation campaign per axis and writes the estimate
/// table, per-axis transcripts, probe logs, and GP snapshots.
pub fn run_estimate(
    ctx: &RunContext,
    out_dir: &Path,
    max_iterations_override: Option<u32>,
) -> anyhow::Result<EstimateArtifacts> {
    ctx.ensure_out_dir(out_dir)?;
    ctx.validated_catalog(out_dir)?;
    std::fs::write(out_dir.join("config.json"), ctx.config.to_json_pretty())?;
    std::fs::write(out_dir.join("catalog.json"), ctx.catalog.to_json_pretty())?;

    let mut policy = ctx.config.convergence;
    if let Some(max) = max_iterations_override {
        policy.max_iterations = max;
        policy.min_iterations = policy.min_iterations.min(max);
    }

    let outcomes: Vec<(Axis, invcert::CampaignOutcome)> = Axis::ALL
        .par_iter()
        .map(|axis| {
            let (target, sources) = ctx.axis_plants(*axis)?;
            let axis_seed = derive_seed_labeled(ctx.seed, &format!("axis-{axis}"));
            let outcome = run_campaign(
                sources,
                target,
                ctx.config.probe.clone(),
                ctx.config.gp.noise_variance,
                policy,
                axis_seed,
            )
            .map_err(|e| match e {
                BoError::NotConverged { max_iterations, .. } => anyhow::anyhow!(
                    "axis {axis}: campaign did not converge within {max_iterations} iterations"
                ),
                other => anyhow::anyhow!("axis {axis}: {other}"),
            })?;
            Ok((*axis, outcome))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let source_names: Vec<String> = ctx.catalog.sources.iter().map(|s| s.name.clone()).collect();

    // Table-shaped estimates: one row per direction, one column per source.
    let mut header: Vec<String> = vec!["direction".into()];
    header.extend(source_names.iter().map(|n| format!("e_star_{n}")));
    header.push("seed".into());
    header.push("config_hash".into());
    let mut table = CsvTable::new(header);
    for (axis, outcome) in &outcomes {
        let mut row = vec![axis.to_string()];
        for name in &source_names {
            let est = outcome
                .estimates
                .iter()
                .find(|e| &e.source_name == name)
                .expect("estimate for every source");
            row.push(fmt_table(est.e_star));
        }
        row.push(ctx.seed.to_string());
        row.push(ctx.config_fingerprint.clone());
        table.push_row(row);
    }
    table.write(&out_dir.join("estimates.csv"))?;

    for (axis, outcome) in &outcomes {
        write_transcript(ctx, *axis, outcome, &source_names, out_dir)?;
        write_probe_log(ctx, *axis, outcome, &source_names, out_dir)?;
        write_json(&out_dir.join(format!("gp_{axis}.json")), &outcome.gp_snapshots)?;
    }

    let artifacts = EstimateArtifacts {
        seed: ctx.seed,
        config_fingerprint: ctx.config_fingerprint.clone(),
        catalog_fingerprint: ctx.catalog_fingerprint.clone(),
        source_names,
        axes: outcomes
            .into_iter()
            .map(|(axis, o)| AxisEstimates {
                axis,
                iterations: o.iterations,
                converged: o.converged,
                estimates: o.estimates,
            })
            .collect(),
    };
    write_json(&out_dir.join("estimates.json"), &artifacts)?;
    Ok(artifacts)
}

fn write_transcript(
    ctx: &RunContext,
    axis: Axis,
    outcome: &invcert::CampaignOutcome,
    source_names: &[String],
    out_dir: &Path,
) -> anyhow::Result<()> {
    let mut header: Vec<String> = vec!["iteration".into(), "omega_sample".into()];
    header.extend(source_names.iter().map(|n| format!("f_{n}")));
    header.extend(source_names.iter().map(|n| format!("max_posterior_mean_{n}")));
    header.push("acquisition_max".into());
    header.push("seed".into());
    header.push("config_hash".into());
    let mut t = CsvTable::new(header);
    for rec in &outcome.history {
        let mut row = vec![rec.iteration.to_string(), fmt_full(rec.omega_sample)];
        row.extend(rec.probe.objective_values.iter().map(|v| fmt_full(*v)));
        row.extend(rec.max_posterior_means.iter().map(|v| fmt_full(*v)));
        row.push(fmt_full(rec.acquisition_value));
        row.push(ctx.seed.to_string());
        row.push(ctx.config_fingerprint.clone());
        t.push_row(row);
    }
    t.write(&out_dir.join(format!("transcript_{axis}.csv")))
}

fn write_probe_log(
    ctx: &RunContext,
    axis: Axis,
    outcome: &invcert::CampaignOutcome,
    source_names: &[String],
    out_dir: &Path,
) -> anyhow::Result<()> {
    let mut t = CsvTable::new(vec![
        "iteration",
        "omega",
        "system",
        "magnitude",
        "theta",
        "objective_value",
        "seed",
        "config_hash",
    ]);
    for rec in &outcome.history {
        let tp = &rec.probe.target_response;
        t.push_row(vec![
            rec.iteration.to_string(),
            fmt_full(rec.omega_sample),
            "target".to_string(),
            fmt_full(tp.magnitude()),
            fmt_full(tp.phase()),
            String::new(),
            ctx.seed.to_string(),
            ctx.config_fingerprint.clone(),
        ]);
        for (i, sp) in rec.probe.source_responses.iter().enumerate() {
            t.push_row(vec![
                rec.iteration.to_string(),
                fmt_full(rec.omega_sample),
                source_names[i].clone(),
                fmt_full(sp.magnitude()),
                fmt_full(sp.phase()),
                fmt_full(rec.probe.objective_values[i]),
                ctx.seed.to_string(),
                ctx.config_fingerprint.clone(),
            ]);
        }
    }
    t.write(&out_dir.join(format!("probes_{axis}.csv")))
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SourceVerification {
    pub source: String,
    pub actual_error: f64,
    pub bound: f64,
    pub verdict: TransferVerdict,
    pub bound_violated: bool,
    /// The full certificate backing the verdict, including per-axis bounds.
    pub certificate: invcert::BoundCertificate,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct VerifyRow {
    pub trajectory: String,
    pub frequencies: [f64; 3],
    pub baseline_error: f64,
    pub per_source: Vec<SourceVerification>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct VerifyArtifacts {
    pub seed: u64,
    pub config_fingerprint: String,
    pub bound_violations: usize,
    pub rows: Vec<VerifyRow>,
}

/// Replays every suite trajectory through the target baseline and through
/// each source-inverse composition, compares measured errors against the
/// certified bounds, and writes the verification table.
pub fn run_verify(
    ctx: &RunContext,
    estimates: &EstimateArtifacts,
    suite: &TrajectorySuite,
    out_dir: &Path,
) -> anyhow::Result<VerifyArtifacts> {
    ctx.ensure_out_dir(out_dir)?;
    ctx.validated_catalog(out_dir)?;
    if estimates.catalog_fingerprint != ctx.catalog_fingerprint {
        anyhow::bail!(
            "estimates were produced for a different catalog (fingerprint {} vs {})",
            estimates.catalog_fingerprint,
            ctx.catalog_fingerprint
        );
    }
    suite.validate(ctx.config.probe.omega_min, ctx.config.probe.omega_max)?;
    write_json(&out_dir.join("suite.json"), suite)?;

    let rows: Vec<VerifyRow> = suite
        .trajectories
        .par_iter()
        .map(|traj| -> anyhow::Result<VerifyRow> {
            let signals = traj.signals()?;
            let mut baseline_sq = 0.0;
            let mut baseline_axis = Vec::new();
            for (axis, yd) in Axis::ALL.iter().zip(&signals) {
                let target = ctx.catalog.target.plant(*axis)?;
                let e = target.simulate(yd)?.sub(yd)?;
                let norm = e.l2_norm();
                baseline_sq += norm * norm;
                baseline_axis.push(norm);
            }
            let baseline_error = baseline_sq.sqrt();

            let mut per_source = Vec::new();
            for source in &ctx.catalog.sources {
                let mut actual_sq = 0.0;
                let mut cert_inputs: Vec<(Axis, f64, &SampledSignal)> = Vec::new();
                for (axis, yd) in Axis::ALL.iter().zip(&signals) {
                    let target = ctx.catalog.target.plant(*axis)?;
                    let sp = source.plant(*axis)?;
                    let composed = sp.invert()?.series(&target)?;
                    let e = composed.simulate(yd)?.sub(yd)?;
                    let norm = e.l2_norm();
                    actual_sq += norm * norm;
                    let e_star = estimates.e_star(*axis, &source.name).ok_or_else(|| {
                        anyhow::anyhow!(
                            "no estimate for source '{}' on axis {axis}; \
                             estimates file does not match the catalog",
                            source.name
                        )
                    })?;
                    cert_inputs.push((*axis, e_star, yd));
                }
                let actual_error = actual_sq.sqrt();
                let cert = verdict_with_margin(
                    &source.name,
                    &cert_inputs,
                    baseline_error,
                    ctx.config.safety_margin,
                )?;
                per_source.push(SourceVerification {
                    source: source.name.clone(),
                    actual_error,
                    bound: cert.combined_bound,
                    verdict: cert.verdict,
                    bound_violated: actual_error > cert.combined_bound,
                    certificate: cert,
                });
            }
            Ok(VerifyRow {
                trajectory: traj.name.clone(),
                frequencies: traj.frequencies,
                baseline_error,
                per_source,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let bound_violations = rows
        .iter()
        .flat_map(|r| &r.per_source)
        .filter(|s| s.bound_violated)
        .count();

    // Table-shaped verification: per-source (actual, bound) pairs, the
    // baseline, then verdicts.
    let mut header: Vec<String> = vec!["trajectory".into()];
    for name in &estimates.source_names {
        header.push(format!("e_{name}"));
        header.push(format!("e_star_{name}"));
    }
    header.push("baseline_e".into());
    for name in &estimates.source_names {
        header.push(format!("verdict_{name}"));
    }
    header.push("seed".into());
    header.push("config_hash".into());
    let mut table = CsvTable::new(header);
    for row in &rows {
        let mut cells = vec![row.trajectory.clone()];
        for s in &row.per_source {
            cells.push(fmt_table(s.actual_error));
            cells.push(fmt_table(s.bound));
        }
        cells.push(fmt_table(row.baseline_error));
        for s in &row.per_source {
            cells.push(s.verdict.to_string());
        }
        cells.push(ctx.seed.to_string());
        cells.push(ctx.config_fingerprint.clone());
        table.push_row(cells);
    }
    table.write(&out_dir.join("verification.csv"))?;

    let artifacts = VerifyArtifacts {
        seed: ctx.seed,
        config_fingerprint: ctx.config_fingerprint.clone(),
        bound_violations,
        rows,
    };
    write_json(&out_dir.join("verify_summary.json"), &artifacts)?;
    Ok(artifacts)
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DirectionDemo {
    /// Robot donating the inverse module.
    pub inverse_from: String,
    /// Robot being driven.
    pub driven: String,
    pub transfer_error: Option<f64>,
    pub baseline_error: f64,
    pub error_ratio: Option<f64>,
    pub positive_transfer: Option<bool>,
    /// Steady-state amplification of the reference by the donated inverse
    /// at the demo frequency, |G_source^-1(j w)|.
    pub reference_amplification: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped_reason: Option<String>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AsymmetryArtifacts {
    pub first: String,
    pub second: String,
    pub axis: Axis,
    pub demo_omega: f64,
    pub nu_gap: f64,
    pub winding_condition_ok: bool,
    pub directions: [DirectionDemo; 2],
}

/// Emits the pointwise decomposition curves for both transfer directions
/// of a pair and runs the two-way closed-loop demo at one frequency.
pub fn run_asymmetry(
    ctx: &RunContext,
    first: &str,
    second: &str,
    axis: Axis,
    grid_size: usize,
    demo_omega: f64,
    out_dir: &Path,
) -> anyhow::Result<AsymmetryArtifacts> {
    ctx.ensure_out_dir(out_dir)?;
    let g_first = ctx.catalog.robot(first)?.plant(axis)?;
    let g_second = ctx.catalog.robot(second)?.plant(axis)?;
    let grid = log_grid(ctx.config.probe.omega_min, ctx.config.probe.omega_max, grid_size);

    // Curves for "first driven by second's inverse" and the reverse.
    let fwd = invcert::nu_gap_report(&g_first, &g_second, &grid)?;
    let rev = invcert::nu_gap_report(&g_second, &g_first, &grid)?;
    for (report, driven, donor) in [(&fwd, first, second), (&rev, second, first)] {
        let mut t = CsvTable::new(vec![
            "omega",
            "psi",
            "Psi",
            "error_mag",
            "seed",
            "config_hash",
        ]);
        for i in 0..report.omega_grid.len() {
            t.push_row(vec![
                fmt_full(report.omega_grid[i]),
                fmt_full(report.chordal[i]),
                fmt_full(report.asym_factor[i]),
                fmt_full(report.error_mag[i]),
                ctx.seed.to_string(),
                ctx.config_fingerprint.clone(),
            ]);
        }
        t.write(&out_dir.join(format!("asymmetry_{driven}_from_{donor}.csv")))?;
    }

    let period = 2.0 * std::f64::consts::PI / demo_omega;
    let cycles = (20.0 / period).ceil().max(1.0);
    let yd = SampledSignal::sine(
        ctx.config.trajectories.params.amplitude,
        demo_omega,
        cycles * period,
        ctx.config.probe.sample_period,
    )?;

    let demo = |driven: &RationalTransferFunction,
                donor: &RationalTransferFunction,
                driven_name: &str,
                donor_name: &str|
     -> anyhow::Result<DirectionDemo> {
        let baseline_error = driven.simulate(&yd)?.sub(&yd)?.l2_norm();
        let reference_amplification = 1.0 / donor.freq_response(demo_omega)?.norm();
        let composed = donor.invert()?.series(driven)?;
        let feasible = composed.is_proper() && composed.is_bibo_stable()?;
        if !feasible {
            return Ok(DirectionDemo {
                inverse_from: donor_name.to_string(),
                driven: driven_name.to_string(),
                transfer_error: None,
                baseline_error,
                error_ratio: None,
                positive_transfer: None,
                reference_amplification,
                skipped_reason: Some(
                    "inverse composition is improper or unstable; cannot simulate".to_string(),
                ),
            });
        }
        let transfer_error = composed.simulate(&yd)?.sub(&yd)?.l2_norm();
        Ok(DirectionDemo {
            inverse_from: donor_name.to_string(),
            driven: driven_name.to_string(),
            transfer_error: Some(transfer_error),
            baseline_error,
            error_ratio: Some(transfer_error / baseline_error),
            positive_transfer: Some(transfer_error < baseline_error),
            reference_amplification,
            skipped_reason: None,
        })
    };

    let artifacts = AsymmetryArtifacts {
        first: first.to_string(),
        second: second.to_string(),
        axis,
        demo_omega,
        nu_gap: fwd.nu_gap,
        winding_condition_ok: fwd.winding_condition_ok,
        directions: [
            demo(&g_first, &g_second, first, second)?,
            demo(&g_second, &g_first, second, first)?,
        ],
    };
    write_json(&out_dir.join("asymmetry.json"), &artifacts)?;
    Ok(artifacts)
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct OracleRow {
    pub source: String,
    pub axis: Axis,
    pub omega_peak: f64,
    pub sup_error_mag: f64,
}

/// Dense-grid reference values of `sup_w |E(jw)|` per (source, axis) from
/// the analytic frequency response; the yardstick the estimates are judged
/// against.
pub fn run_oracle(
    ctx: &RunContext,
    grid_size: usize,
    out_dir: &Path,
) -> anyhow::Result<Vec<OracleRow>> {
    ctx.ensure_out_dir(out_dir)?;
    ctx.validated_catalog(out_dir)?;
    let grid = log_grid(ctx.config.probe.omega_min, ctx.config.probe.omega_max, grid_size);
    let mut rows = Vec::new();
    for source in &ctx.catalog.sources {
        for axis in Axis::ALL {
            let target = ctx.catalog.target.plant(axis)?;
            let sp = source.plant(axis)?;
            let e = error_tf(&sp, &target)?;
            let (mut peak_w, mut peak) = (grid[0], 0.0f64);
            for &w in &grid {
                let mag = e.freq_response(w)?.norm();
                if mag > peak {
                    peak = mag;
                    peak_w = w;
                }
            }
            rows.push(OracleRow {
                source: source.name.clone(),
                axis,
                omega_peak: peak_w,
                sup_error_mag: peak,
            });
        }
    }
    let mut t = CsvTable::new(vec![
        "source",
        "axis",
        "omega_peak",
        "sup_error_mag",
        "seed",
        "config_hash",
    ]);
    for r in &rows {
        t.push_row(vec![
            r.source.clone(),
            r.axis.to_string(),
            fmt_full(r.omega_peak),
            fmt_full(r.sup_error_mag),
            ctx.seed.to_string(),
            ctx.config_fingerprint.clone(),
        ]);
    }
    t.write(&out_dir.join("oracle.csv"))?;
    Ok(rows)
}

/// The default suite used by `verify` when no suite file is given:
/// sampled from a labeled sub-seed of the run seed.
pub fn default_suite(ctx: &RunContext) -> TrajectorySuite {
    TrajectorySuite::sample(
        ctx.config.trajectories.count,
        derive_seed_labeled(ctx.seed, "suite"),
        &ctx.config.trajectories.params,
    )
}

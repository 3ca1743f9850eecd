use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use invcert::{Axis, Catalog, TrajectorySuite};
use invcert_cli::{
    default_suite, run_asymmetry, run_estimate, run_oracle, run_verify, EstimateArtifacts,
    HarnessConfig, RunContext,
};

/// Certifies, before execution, whether transferring a source system's
/// inverse dynamics module to a target system guarantees improved
/// trajectory tracking.
#[derive(Parser)]
#[command(name = "invcert", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Plant catalog JSON; the built-in desk-scale catalog when omitted.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Harness config JSON; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for all randomized choices (initial probe frequencies,
    /// trajectory sampling, probe noise).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Directory for output artifacts.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate per-axis, per-source peak-error bounds by probing
    /// simulated baseline systems.
    Estimate {
        #[command(flatten)]
        common: CommonArgs,
        /// Override the campaign iteration budget.
        #[arg(long)]
        max_iters: Option<u32>,
    },
    /// Verify previously estimated bounds in closed-loop simulation on a
    /// trajectory suite.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// estimates.json produced by `estimate` (defaults to
        /// <out-dir>/estimates.json).
        #[arg(long)]
        estimates: Option<PathBuf>,
        /// Trajectory suite JSON; sampled from the seed when omitted.
        #[arg(long)]
        suite: Option<PathBuf>,
    },
    /// Two-way transfer demo and nu-gap decomposition curves for one pair
    /// of robots.
    Asymmetry {
        #[command(flatten)]
        common: CommonArgs,
        /// Two robot names, comma separated (e.g. "target,slow_3").
        #[arg(long)]
        pair: String,
        /// Axis to analyze.
        #[arg(long, default_value = "y")]
        axis: String,
        /// Frequency grid points for the decomposition curves.
        #[arg(long, default_value_t = 1000)]
        grid_size: usize,
        /// Frequency of the closed-loop demo sinusoid, rad/s.
        #[arg(long, default_value_t = 1.0)]
        demo_omega: f64,
    },
    /// Dense-grid analytic reference of sup |E(jw)| per (source, axis).
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Frequency grid points.
        #[arg(long, default_value_t = 10_000)]
        grid_size: usize,
    },
    /// Write the built-in catalog and default config as editable JSON.
    Init {
        /// Directory for catalog.json and config.json.
        #[arg(long, default_value = "init")]
        out_dir: PathBuf,
    },
}

fn load_context(common: &CommonArgs) -> anyhow::Result<RunContext> {
    let catalog = match &common.catalog {
        Some(path) => Catalog::load(path)?,
        None => Catalog::default_catalog(),
    };
    let config = match &common.config {
        Some(path) => HarnessConfig::load(path)?,
        None => HarnessConfig::default(),
    };
    Ok(RunContext::new(catalog, config, common.seed))
}

fn parse_axis(s: &str) -> anyhow::Result<Axis> {
    match s {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        "z" => Ok(Axis::Z),
        other => anyhow::bail!("unknown axis '{other}' (expected x, y, or z)"),
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Estimate { common, max_iters } => {
            let ctx = load_context(&common)?;
            let artifacts = run_estimate(&ctx, &common.out_dir, max_iters)?;
            for axis in &artifacts.axes {
                println!(
                    "axis {}: converged in {} iterations",
                    axis.axis, axis.iterations
                );
                for est in &axis.estimates {
                    println!(
                        "  {:<12} e_star {:.4} at {:.3} rad/s",
                        est.source_name, est.e_star, est.omega_star
                    );
                }
            }
            println!("artifacts written to {}", common.out_dir.display());
        }
        Command::Verify {
            common,
            estimates,
            suite,
        } => {
            let ctx = load_context(&common)?;
            let estimates_path = estimates
                .unwrap_or_else(|| common.out_dir.join("estimates.json"));
            let artifacts = EstimateArtifacts::load(&estimates_path)?;
            let suite = match suite {
                Some(path) => TrajectorySuite::load(&path)?,
                None => default_suite(&ctx),
            };
            let result = run_verify(&ctx, &artifacts, &suite, &common.out_dir)?;
            for row in &result.rows {
                let verdicts: Vec<String> = row
                    .per_source
                    .iter()
                    .map(|s| format!("{}={}", s.source, s.verdict))
                    .collect();
                println!(
                    "{}: baseline {:.4}, {}",
                    row.trajectory,
                    row.baseline_error,
                    verdicts.join(", ")
                );
            }
            if result.bound_violations > 0 {
                anyhow::bail!(
                    "{} bound violation(s): some simulated errors exceeded their \
                     certified bounds",
                    result.bound_violations
                );
            }
            println!(
                "all simulated errors within certified bounds ({} trajectories x {} sources)",
                result.rows.len(),
                artifacts.source_names.len()
            );
        }
        Command::Asymmetry {
            common,
            pair,
            axis,
            grid_size,
            demo_omega,
        } => {
            let ctx = load_context(&common)?;
            let (first, second) = pair
                .split_once(',')
                .ok_or_else(|| anyhow::anyhow!("--pair expects 'name_a,name_b'"))?;
            let axis = parse_axis(&axis)?;
            let artifacts = run_asymmetry(
                &ctx,
                first.trim(),
                second.trim(),
                axis,
                grid_size,
                demo_omega,
                &common.out_dir,
            )?;
            println!(
                "nu-gap over the window: {:.4} (winding condition ok: {})",
                artifacts.nu_gap, artifacts.winding_condition_ok
            );
            for d in &artifacts.directions {
                match (d.error_ratio, d.positive_transfer) {
                    (Some(ratio), Some(positive)) => println!(
                        "{} driven by {}'s inverse: error ratio {:.3} ({}), reference gain {:.3}",
                        d.driven,
                        d.inverse_from,
                        ratio,
                        if positive { "positive" } else { "negative" },
                        d.reference_amplification
                    ),
                    _ => println!(
                        "{} driven by {}'s inverse: skipped ({})",
                        d.driven,
                        d.inverse_from,
                        d.skipped_reason.as_deref().unwrap_or("unknown")
                    ),
                }
            }
        }
        Command::Oracle { common, grid_size } => {
            let ctx = load_context(&common)?;
            let rows = run_oracle(&ctx, grid_size, &common.out_dir)?;
            for r in &rows {
                println!(
                    "{:<12} {}: sup |E| = {:.4} at {:.3} rad/s",
                    r.source, r.axis, r.sup_error_mag, r.omega_peak
                );
            }
        }
        Command::Init { out_dir } => {
            std::fs::create_dir_all(&out_dir)?;
            std::fs::write(
                out_dir.join("catalog.json"),
                Catalog::default_catalog().to_json_pretty(),
            )?;
            std::fs::write(
                out_dir.join("config.json"),
                HarnessConfig::default().to_json_pretty(),
            )?;
            println!("wrote catalog.json and config.json to {}", out_dir.display());
        }
    }
    Ok(())
}

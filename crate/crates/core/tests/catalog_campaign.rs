//! Campaigns over the built-in catalog: estimates must dominate the
//! dense-grid analytic reference and preserve the fleet's agility
//! ordering.

use invcert::bo::log_grid;
use invcert::{
    error_tf, run_campaign, Axis, Catalog, ConvergencePolicy, NamedPlant, ProbeConfig,
};

fn probe_cfg() -> ProbeConfig {
    ProbeConfig {
        settle_periods: 12,
        measure_periods: 5,
        sample_period: 0.002,
        ..ProbeConfig::default()
    }
}

/// Dense-grid reference: max |E(j w)| over the window.
fn oracle_max(
    source: &invcert::RationalTransferFunction,
    target: &invcert::RationalTransferFunction,
    cfg: &ProbeConfig,
) -> f64 {
    let e = error_tf(source, target).unwrap();
    log_grid(cfg.omega_min, cfg.omega_max, 10_000)
        .iter()
        .map(|w| e.freq_response(*w).unwrap().norm())
        .fold(0.0, f64::max)
}

#[test]
fn default_catalog_estimates_dominate_oracle_and_order_by_agility() {
    let catalog = Catalog::default_catalog();
    let cfg = probe_cfg();
    for axis in Axis::ALL {
        let target = catalog.target.plant(axis).unwrap();
        let sources: Vec<NamedPlant> = catalog
            .sources
            .iter()
            .map(|s| NamedPlant::new(s.name.clone(), s.plant(axis).unwrap()))
            .collect();
        let outcome = run_campaign(
            sources.clone(),
            target.clone(),
            cfg.clone(),
            1e-4,
            ConvergencePolicy::default(),
            2024,
        )
        .unwrap();
        assert!(outcome.converged);

        let mut by_name = std::collections::BTreeMap::new();
        for est in &outcome.estimates {
            let plant = &sources
                .iter()
                .find(|s| s.name == est.source_name)
                .unwrap()
                .plant;
            let oracle = oracle_max(plant, &target, &cfg);
            assert!(
                est.e_star >= oracle - 1e-3,
                "{}/{axis}: e_star {} below oracle {}",
                est.source_name,
                est.e_star,
                oracle
            );
            assert!(
                est.e_star <= 1.5 * oracle + 0.01,
                "{}/{axis}: e_star {} too loose vs oracle {}",
                est.source_name,
                est.e_star,
                oracle
            );
            by_name.insert(est.source_name.clone(), est.e_star);
        }
        // Every agile source beats every slow source on every axis.
        for agile in ["agile_1", "agile_2"] {
            for slow in ["slow_1", "slow_2", "slow_3"] {
                assert!(
                    by_name[agile] < by_name[slow],
                    "{axis}: {agile} ({}) not below {slow} ({})",
                    by_name[agile],
                    by_name[slow]
                );
            }
        }
    }
}

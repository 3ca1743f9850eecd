//! The simulated probe path must agree with the analytic frequency
//! response: per-plant within 2%, and the probed objective must match the
//! symbolic error-system magnitude on the analytic path exactly.

use invcert::{
    error_tf, evaluate_objective, probe_system, Axis, Catalog, FrequencyPoint, ProbeConfig,
};

fn window_grid(n: usize) -> Vec<f64> {
    invcert::bo::log_grid(0.05, 10.0, n)
}

#[test]
fn probe_matches_analytic_response_across_catalog() {
    let catalog = Catalog::default_catalog();
    let cfg = ProbeConfig {
        settle_periods: 5,
        measure_periods: 3,
        ..ProbeConfig::default()
    };
    let mut plants = vec![];
    for axis in Axis::ALL {
        plants.push(catalog.target.plant(axis).unwrap());
        for s in &catalog.sources {
            plants.push(s.plant(axis).unwrap());
        }
    }
    for g in &plants {
        for omega in window_grid(9) {
            let probed = probe_system(g, omega, &cfg).unwrap();
            let analytic = g.freq_response(omega).unwrap();
            let err = (probed.response - analytic).norm();
            assert!(
                err < 0.02 * analytic.norm(),
                "probe off by {:.3}% at {omega} rad/s for {g}",
                100.0 * err / analytic.norm()
            );
        }
    }
}

#[test]
fn objective_from_analytic_responses_matches_symbolic_path() {
    let catalog = Catalog::default_catalog();
    for axis in Axis::ALL {
        let target = catalog.target.plant(axis).unwrap();
        for source in &catalog.sources {
            let sp = source.plant(axis).unwrap();
            let e = error_tf(&sp, &target).unwrap();
            for omega in window_grid(25) {
                let s_pt = FrequencyPoint::new(omega, sp.freq_response(omega).unwrap()).unwrap();
                let t_pt =
                    FrequencyPoint::new(omega, target.freq_response(omega).unwrap()).unwrap();
                let via_points = evaluate_objective(&[s_pt], &t_pt).unwrap()[0];
                let via_symbolic = e.freq_response(omega).unwrap().norm();
                assert!(
                    (via_points - via_symbolic).abs() < 1e-9,
                    "paths disagree at {omega}: {via_points} vs {via_symbolic}"
                );
            }
        }
    }
}

#[test]
fn probed_objective_tracks_truth_within_tolerance() {
    // End-to-end: probes (not analytic responses) feeding the objective
    // stay close to the true |E(j omega)| for a representative pair.
    let catalog = Catalog::default_catalog();
    let target = catalog.target.plant(Axis::X).unwrap();
    let source = catalog.sources[3].plant(Axis::X).unwrap(); // slow_2
    let e = error_tf(&source, &target).unwrap();
    let cfg = ProbeConfig {
        settle_periods: 12,
        measure_periods: 5,
        sample_period: 0.002,
        ..ProbeConfig::default()
    };
    for omega in [0.05, 0.3, 1.0, 3.0, 10.0] {
        let s_pt = probe_system(&source, omega, &cfg).unwrap();
        let t_pt = probe_system(&target, omega, &cfg).unwrap();
        let probed = evaluate_objective(&[s_pt], &t_pt).unwrap()[0];
        let truth = e.freq_response(omega).unwrap().norm();
        assert!(
            (probed - truth).abs() < 2e-3 * truth.max(1.0),
            "objective off at {omega}: probed {probed}, truth {truth}"
        );
    }
}

use proptest::prelude::*;
use swarmcalc::estimation::{feedback_timeseries, DriftWindow};
use swarmcalc::scenario::{dc_batch, merge_windows, ScenarioConfig, WindowSpec};
use swarmcalc::urn::{
    ensemble_histogram, estimate_switching_time, final_states, measure_drift, record_revisions,
    InitialState, SimConfig,
};
use swarmcalc::{DriftSpec, Execution};

fn config(phi: f64, n: usize, seed: u64) -> SimConfig {
    SimConfig::new(
        DriftSpec::sine(phi, n).unwrap(),
        300,
        seed,
        InitialState::SymmetricPair,
        64,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn urn_outputs_ignore_execution(phi in 0.0..=1.0f64, n in 2usize..40, seed in any::<u64>()) {
        let cfg = config(phi, n, seed);
        prop_assert_eq!(final_states(&cfg, Execution::Sequential).unwrap(), final_states(&cfg, Execution::Parallel).unwrap());
        prop_assert_eq!(
            record_revisions(&cfg, Execution::Sequential).unwrap(),
            record_revisions(&cfg, Execution::Parallel).unwrap()
        );
        prop_assert_eq!(
            measure_drift(&cfg, 50, Execution::Sequential).unwrap(),
            measure_drift(&cfg, 50, Execution::Parallel).unwrap()
        );
    }
}

#[test]
fn histograms_and_switching_times_ignore_execution() {
    let cfg = config(0.0, 24, 11);
    let phis = [0.0, 0.5, 1.0];
    assert_eq!(
        ensemble_histogram(&phis, &cfg, Execution::Sequential).unwrap(),
        ensemble_histogram(&phis, &cfg, Execution::Parallel).unwrap()
    );
    let spec = DriftSpec::sine(0.75, 12).unwrap();
    let run = |exec| estimate_switching_time(&spec, 0.25, 0.75, 100_000, 200, 3, exec).unwrap();
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}

#[test]
fn scenario_series_ignores_execution() {
    let cfg = ScenarioConfig {
        agents: 24,
        steps: 2000,
        seed: 5,
        windows: WindowSpec::Doubling { first: 50 },
        ..ScenarioConfig::default()
    };
    let grid = [0.2, 0.5, 0.8, 0.35];
    let seq = dc_batch(&cfg, &grid, Execution::Sequential).unwrap();
    assert_eq!(seq, dc_batch(&cfg, &grid, Execution::Parallel).unwrap());
    let tables: Vec<DriftWindow> = merge_windows(&seq)
        .iter()
        .map(|w| DriftWindow::from_log(w.end as f64, &w.log))
        .collect();
    assert_eq!(
        feedback_timeseries(&tables, Execution::Sequential).unwrap(),
        feedback_timeseries(&tables, Execution::Parallel).unwrap()
    );
}

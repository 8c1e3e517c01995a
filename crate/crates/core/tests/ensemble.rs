use workday_core::{run_sweep, MasterSeed, Quantity, SweepSpec};

#[test]
fn doubling_runs_moves_means_by_less_than_four_stderr() {
    let spec = |runs| SweepSpec {
        eta_grid: vec![0.0, 0.5, 0.9],
        q_grid: vec![1.0, 4.0],
        d_grid: Some(vec![10, 20]),
        runs_per_point: runs,
        master_seed: MasterSeed(2024),
        ..SweepSpec::default()
    };
    let small = run_sweep(&spec(150), 0).unwrap();
    let large = run_sweep(&spec(300), 0).unwrap();
    for (a, b) in small.sorted().into_iter().zip(large.sorted()) {
        assert_eq!(a.point.params, b.point.params);
        for q in Quantity::ALL {
            let (Some(x), Some(y)) = (a.stats.get(q), b.stats.get(q)) else {
                assert_eq!(a.stats.get(q).is_none(), b.stats.get(q).is_none());
                continue;
            };
            // The larger ensemble shares its first 150 runs with the smaller one.
            let se = x.stderr.max(y.stderr);
            assert!(
                (x.mean - y.mean).abs() < 4.0 * se,
                "{q:?} at {:?}: {} vs {} (se {se})",
                a.point.params,
                x.mean,
                y.mean
            );
        }
    }
}

#[test]
fn single_run_ensembles_are_reproducible() {
    let spec = |runs| SweepSpec {
        runs_per_point: runs,
        retain_series: true,
        ..SweepSpec::default()
    };
    let a = run_sweep(&spec(1), 1).unwrap();
    let b = run_sweep(&spec(1), 1).unwrap();
    assert_eq!(a.points[0].stats, b.points[0].stats);
    assert!(a.points[0].stats.stderr_is_degenerate());
}

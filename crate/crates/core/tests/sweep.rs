mod common;

use std::fs;
use std::time::Instant;

use common::{load, small_config};
use decarb_core::calibration::{
    cache_path, loss, point_config, sweep, sweep_with_fault, write_results, CalibrationTarget,
    Moment, Moments, ParameterRange, SweepError, SweepSpec,
};
use decarb_core::runner::{simulate, Fault};

fn spec(parameters: Vec<ParameterRange>, targets: Vec<CalibrationTarget>) -> SweepSpec {
    SweepSpec {
        parameters,
        targets,
        burn_in: 4,
        horizon: 12,
        seed: 17,
        budget: 64,
    }
}

fn range(name: &str, lower: f64, upper: f64, points: usize) -> ParameterRange {
    ParameterRange {
        name: name.into(),
        lower,
        upper,
        points,
    }
}

fn inflation_target(weight: f64) -> Vec<CalibrationTarget> {
    vec![CalibrationTarget {
        moment: Moment::MeanInflation,
        target: 0.0,
        weight,
    }]
}

#[test]
fn single_point() {
    let dir = tempfile::tempdir().unwrap();
    let base = load(&small_config(dir.path(), 40, 1));
    let s = spec(vec![], inflation_target(1.0));
    let r = sweep(&base, &s, None).unwrap();
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].loss, loss(&r[0].moments, &s.targets));
    assert_eq!(r[0].loss, r[0].moments.mean_inflation.powi(2));
}

#[test]
fn exact_match_ranks_first_with_zero_loss() {
    let dir = tempfile::tempdir().unwrap();
    let base = load(&small_config(dir.path(), 40, 1));
    let probe = sweep(
        &base,
        &spec(vec![range("markup_drift", 0.005, 0.02, 2)], vec![]),
        None,
    )
    .unwrap();
    let second = probe.iter().find(|r| r.index == 1).unwrap().moments;
    let targets = [
        (Moment::MeanInflation, second.mean_inflation),
        (Moment::MeanUnemployment, second.mean_unemployment),
        (Moment::MeanGdpGrowth, second.mean_gdp_growth),
    ]
    .map(|(moment, target)| CalibrationTarget {
        moment,
        target,
        weight: 1.0,
    })
    .to_vec();
    let r = sweep(
        &base,
        &spec(vec![range("markup_drift", 0.005, 0.02, 2)], targets),
        None,
    )
    .unwrap();
    assert_eq!(r[0].index, 1);
    assert_eq!(r[0].loss, 0.0);
    assert!(r[1].loss > 0.0);
}

#[test]
fn three_by_three_matches_exhaustive_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let base = load(&small_config(dir.path(), 40, 1));
    let s = spec(
        vec![
            range("markup_drift", 0.005, 0.02, 3),
            range("propensity_to_consume", 0.15, 0.25, 3),
        ],
        inflation_target(1.0),
    );
    let results = sweep(&base, &s, None).unwrap();
    assert_eq!(results.len(), 9);

    let mut oracle: Vec<(f64, usize)> = (0..9)
        .map(|i| {
            let cfg = point_config(&base, &s, &s.point(i)).unwrap();
            let frames = simulate(cfg.build_state().unwrap(), cfg.horizon_quarters, None, None)
                .unwrap()
                .frames;
            let m = Moments::of(&frames, s.burn_in);
            (m.mean_inflation.powi(2), i)
        })
        .collect();
    oracle.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let ranked: Vec<(f64, usize)> = results.iter().map(|r| (r.loss, r.index)).collect();
    assert_eq!(ranked, oracle);
    let best = results[0].moments.mean_inflation.abs();
    assert!(oracle.iter().all(|(l, _)| best <= l.sqrt()));
}

#[test]
fn grid_points_carry_their_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let base = load(&small_config(dir.path(), 40, 1));
    let s = spec(
        vec![
            range("markup_drift", 0.005, 0.02, 2),
            range("taylor_gap", 0.2, 0.6, 2),
        ],
        vec![],
    );
    let cfg = point_config(&base, &s, &s.point(3)).unwrap();
    assert_eq!(cfg.policy.behavior.markup_drift, 0.02);
    assert_eq!(cfg.policy.taylor_gap, 0.6);
    assert_eq!((cfg.seed, cfg.horizon_quarters), (17, 12));
}

#[test]
fn cache_reproduces_fresh_runs_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let base = load(&small_config(dir.path(), 40, 1));
    let cache = dir.path().join("sweep");
    let s = spec(
        vec![range("propensity_to_consume", 0.15, 0.25, 3)],
        inflation_target(2.0),
    );

    let t = Instant::now();
    let cold = sweep(&base, &s, Some(&cache)).unwrap();
    let cold_time = t.elapsed();
    assert!(cold.iter().all(|r| !r.cached));
    let t = Instant::now();
    let warm = sweep(&base, &s, Some(&cache)).unwrap();
    let warm_time = t.elapsed();
    assert!(warm.iter().all(|r| r.cached));
    assert_eq!(
        cold,
        warm.iter()
            .map(|r| decarb_core::calibration::SweepResult {
                cached: false,
                ..r.clone()
            })
            .collect::<Vec<_>>()
    );
    assert!(warm_time < cold_time, "{warm_time:?} vs {cold_time:?}");

    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    write_results(&a, &cold).unwrap();
    write_results(&b, &warm).unwrap();
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());

    for r in &cold {
        let cfg = point_config(&base, &s, &r.params).unwrap();
        let path = cache_path(&cache, &r.config_hash, s.seed);
        let entry: decarb_core::calibration::CacheEntry =
            serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        let fresh = simulate(cfg.build_state().unwrap(), cfg.horizon_quarters, None, None)
            .unwrap()
            .frames;
        assert_eq!(entry.frames, fresh);
        for (x, y) in entry.frames.iter().zip(&fresh) {
            assert_eq!(x.gdp.to_bits(), y.gdp.to_bits());
            assert_eq!(x.inflation.to_bits(), y.inflation.to_bits());
        }
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let base = load(&small_config(dir.path(), 40, 1));
    let s = spec(
        vec![
            range("markup_drift", 0.005, 0.02, 2),
            range("taylor_gap", 0.2, 0.6, 2),
        ],
        inflation_target(1.0),
    );
    let run = |n: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap();
        pool.install(|| sweep(&base, &s, None).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn budget_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let base = load(&small_config(dir.path(), 40, 1));
    let mut s = spec(
        vec![
            range("markup_drift", 0.0, 0.02, 5),
            range("taylor_gap", 0.0, 1.0, 5),
        ],
        vec![],
    );
    s.budget = 24;
    assert!(matches!(
        sweep(&base, &s, None),
        Err(SweepError::BudgetExceeded {
            size: 25,
            budget: 24
        })
    ));
}

#[test]
fn unknown_parameter_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let base = load(&small_config(dir.path(), 40, 1));
    let s = spec(vec![range("no_such_knob", 0.0, 1.0, 2)], vec![]);
    match sweep(&base, &s, None) {
        Err(SweepError::UnknownParameter(n)) => assert_eq!(n, "no_such_knob"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn audit_failure_names_the_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let base = load(&small_config(dir.path(), 40, 1));
    let s = spec(vec![range("markup_drift", 0.005, 0.02, 2)], vec![]);
    let err = sweep_with_fault(
        &base,
        &s,
        None,
        Some(Fault {
            quarter: 2,
            cents: 1,
        }),
    )
    .unwrap_err();
    match err {
        SweepError::Audit { index, params, .. } => {
            assert_eq!(index, 0);
            assert_eq!(params, vec![("markup_drift".to_string(), 0.005)]);
        }
        other => panic!("{other:?}"),
    }
}

mod common;

use common::{load, small_config};
use decarb_core::calibration::{loss, CalibrationTarget, Moment, Moments};
use decarb_core::metrics::{compare_runs, IndicatorFrame};
use decarb_core::runner::simulate;
use decarb_core::scenario::{LeverA, LeverB, Pathway, ScenarioSpec, Segment, Targeting};
use proptest::prelude::*;

fn moment() -> impl Strategy<Value = Moment> {
    prop_oneof![
        Just(Moment::MeanInflation),
        Just(Moment::MeanUnemployment),
        Just(Moment::MeanGdpGrowth)
    ]
}

fn frame(t: u32, v: &[f64; 6]) -> IndicatorFrame {
    let mut deciles = [0.0; 10];
    deciles[9] = 1.0;
    IndicatorFrame {
        t,
        gdp: v[0],
        unemployment: v[1],
        inflation: v[2],
        gini_income: v[3],
        gini_wealth: v[4],
        decile_income_shares: deciles,
        emissions: v[5],
        debt_ratio: v[5] / 10.0,
        green_investment_share: v[1] / 2.0,
        wealth_shift: 0.0,
    }
}

fn zero_segments() -> impl Strategy<Value = Pathway> {
    prop::collection::vec((0u32..5, 0u32..3), 0..3).prop_map(|v| {
        let mut from = 0;
        let mut segs = Vec::new();
        for (gap, len) in v {
            let start = from + gap;
            segs.push(Segment {
                from: start,
                to: start + len,
                value: 0.0,
            });
            from = start + len + 1;
        }
        Pathway(segs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn loss_is_nonnegative_and_zero_only_on_target(
        m in (-0.1f64..0.1, 0.0f64..1.0, -0.1f64..0.1),
        targets in prop::collection::vec((moment(), -0.1f64..1.0, 0.01f64..10.0), 1..6),
    ) {
        let moments = Moments { mean_inflation: m.0, mean_unemployment: m.1, mean_gdp_growth: m.2 };
        let targets: Vec<CalibrationTarget> = targets.into_iter().map(|(moment, target, weight)| CalibrationTarget { moment, target, weight }).collect();
        let l = loss(&moments, &targets);
        prop_assert!(l >= 0.0);
        let on_target = targets.iter().all(|t| moments.get(t.moment) == t.target);
        prop_assert_eq!(l == 0.0, on_target);
        let exact: Vec<CalibrationTarget> = targets.iter().map(|t| CalibrationTarget { target: moments.get(t.moment), ..*t }).collect();
        prop_assert_eq!(loss(&moments, &exact), 0.0);
    }

    #[test]
    fn ranking_is_a_total_order(losses in prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0f64..2.0], 1..40)) {
        let mut ranked: Vec<(f64, usize)> = losses.iter().copied().zip(0..).collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for w in ranked.windows(2) {
            prop_assert!(w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1));
        }
    }

    #[test]
    fn self_comparison_is_the_zero_report(rows in prop::collection::vec(prop::array::uniform6(0.0f64..1e6), 1..30)) {
        let frames: Vec<IndicatorFrame> = rows.iter().enumerate().map(|(t, v)| frame(t as u32, v)).collect();
        let r = compare_runs(&frames, &frames, None).unwrap();
        for d in r.per_quarter.iter().chain([&r.period_average]) {
            prop_assert_eq!(d.gdp, 0.0);
            prop_assert_eq!(d.gdp_growth, 0.0);
            prop_assert_eq!(d.inflation, 0.0);
            prop_assert_eq!(d.debt_ratio, 0.0);
            prop_assert!(d.decile_income_shares.iter().all(|&x| x == 0.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn every_quarter_closes_and_indicators_stay_in_range(seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = load(&small_config(dir.path(), 16, seed));
        let out = simulate(cfg.build_state().unwrap(), 16, None, None).unwrap();
        for (f, d) in out.frames.iter().zip(&out.diagnostics) {
            prop_assert_eq!(d.audit_residual_cents, 0);
            prop_assert!((0.0..=1.0).contains(&f.unemployment));
            prop_assert!((0.0..1.0).contains(&f.gini_income));
            prop_assert!((f.decile_income_shares.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(f.gdp > 0.0 && f.emissions >= 0.0);
        }
    }

    #[test]
    fn zero_valued_levers_change_nothing(seed in 0u64..1000, a in zero_segments(), b in zero_segments()) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = load(&small_config(dir.path(), 12, seed));
        let spec = ScenarioSpec {
            name: "zero".into(),
            horizon_quarters: 12,
            lever_a: Some(LeverA { pathway: a, sectors: None }),
            lever_b: Some(LeverB { pathway: b, targeting: Targeting::NonAdopters }),
            ..ScenarioSpec::default()
        };
        spec.validate().unwrap();
        let base = simulate(cfg.build_state().unwrap(), 12, None, None).unwrap();
        let null = simulate(cfg.build_state().unwrap(), 12, Some(&spec), None).unwrap();
        prop_assert_eq!(base.frames, null.frames);
        prop_assert_eq!(base.diagnostics, null.diagnostics);
    }
}

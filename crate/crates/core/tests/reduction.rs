mod common;

use std::collections::BTreeSet;

use common::*;
use modelsets::dgp::{dgp, DgpConfig};
use modelsets::reduction::{
    arrange_hypercube, default_rules, initial_dimension, reduction_phase, run_stage, side_length, DecisionRule,
    ReductionConfig, ReductionError,
};
use modelsets::{Dataset, Family, Response};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn gaussian(seed: u64, n: usize, d: usize, signals: &[(usize, f64)]) -> Dataset {
    let mut r = rng(seed);
    let rows = normal_matrix(&mut r, n, d);
    let y = rows.iter().map(|x| signals.iter().map(|&(j, b)| b * x[j]).sum::<f64>() + r.random::<f64>() - 0.5).collect();
    Dataset::with_default_names(DMatrix::from_fn(n, d, |i, j| rows[i][j]), Response::Continuous { y })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_index_sits_in_one_fiber_per_axis(m in 2usize..400, dim in 2usize..5, seed in any::<u64>()) {
        let indices: Vec<usize> = (0..m).map(|i| i * 3 + 1).collect();
        let arr = arrange_hypercube(&indices, dim, seed).unwrap();
        prop_assert_eq!(arr.side, side_length(m, dim));
        prop_assert!(arr.side.pow(dim as u32) >= m);
        prop_assert!(arr.side == 1 || (arr.side - 1).pow(dim as u32) < m);
        let placed: BTreeSet<usize> = arr.cells.iter().flatten().copied().collect();
        prop_assert_eq!(placed, indices.iter().copied().collect::<BTreeSet<_>>());
        let fibers = arr.fibers();
        for &v in &indices {
            prop_assert_eq!(fibers.iter().filter(|f| f.contains(&v)).count(), dim);
        }
        for f in &fibers {
            prop_assert!(!f.is_empty() && f.len() <= arr.side);
            let distinct: BTreeSet<_> = f.iter().collect();
            prop_assert_eq!(distinct.len(), f.len());
        }
    }

    #[test]
    fn arrangement_is_a_function_of_the_seed(m in 2usize..200, seed in any::<u64>()) {
        let idx: Vec<usize> = (0..m).collect();
        prop_assert_eq!(arrange_hypercube(&idx, 3, seed).unwrap(), arrange_hypercube(&idx, 3, seed).unwrap());
    }
}

#[test]
fn line_p_values_match_an_independent_fit() {
    let ds = gaussian(21, 40, 30, &[(3, 1.0), (17, -0.7)]);
    let rule = DecisionRule::top_k(2, 1);
    let stage = run_stage(&ds, &(0..30).collect::<Vec<_>>(), 2, &rule, Family::Gaussian, 5).unwrap();
    let Response::Continuous { y } = &ds.response else { unreachable!() };
    for line in &stage.lines {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| line.vars.iter().map(|&j| ds.x[(i, j)]).collect()).collect();
        let (beta, _, se) = ols_normal_equations(&rows, y);
        let df = (40 - line.vars.len() - 1) as f64;
        let mut oracle: Vec<(f64, f64, usize)> = Vec::new();
        for (k, &v) in line.vars.iter().enumerate() {
            let t = beta[k + 1] / se[k + 1];
            let p = 2.0 * (1.0 - symmetric_cdf(&|u| t_pdf(u, df), t.abs()));
            assert!((line.p_values[k] - p).abs() < 1e-8);
            assert!((line.statistics[k] - t).abs() < 1e-8 * t.abs().max(1.0));
            oracle.push((p, -t.abs(), v));
        }
        oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let top: BTreeSet<usize> = oracle.iter().take(2).map(|o| o.2).collect();
        assert_eq!(line.successes.iter().copied().collect::<BTreeSet<_>>(), top);
    }
}

#[test]
fn tallies_and_retention_follow_the_line_records() {
    let ds = gaussian(22, 60, 120, &[(5, 1.0), (50, 1.0), (90, 1.0)]);
    let rule = DecisionRule::threshold(0.05, 2);
    let candidates: Vec<usize> = (0..120).collect();
    let stage = run_stage(&ds, &candidates, 3, &rule, Family::Gaussian, 9).unwrap();
    for &v in &candidates {
        let appear = stage.lines.iter().filter(|l| l.vars.contains(&v)).count();
        let wins = stage.lines.iter().filter(|l| l.successes.contains(&v)).count();
        assert_eq!(appear, 3);
        assert_eq!(stage.tallies[&v].appearances, appear);
        assert_eq!(stage.tallies[&v].successes, wins);
        assert_eq!(stage.retained.contains(&v), wins >= 2);
    }
    for line in &stage.lines {
        for (k, &v) in line.vars.iter().enumerate() {
            assert_eq!(line.successes.contains(&v), line.p_values[k] < 0.05);
        }
    }
    for s in [5, 50, 90] {
        assert!(stage.retained.contains(&s));
    }
}

#[test]
fn full_phase_keeps_strong_signals_and_shrinks() {
    let g = dgp(&DgpConfig { rho: 0.0, sig_strength: 2.0, seed: 31, ..DgpConfig::default() }).unwrap();
    let ds = g.to_dataset();
    let trace = reduction_phase(&ds, &ReductionConfig { seed: 4, ..ReductionConfig::default() }).unwrap();
    assert_eq!(trace.start_dim, initial_dimension(1000, 15));
    assert_eq!(trace.rules, default_rules(trace.start_dim));
    assert_eq!(trace.stages.len(), trace.start_dim - 1);
    let mut previous: BTreeSet<usize> = (0..1000).collect();
    for stage in &trace.stages {
        let now: BTreeSet<usize> = stage.retained.iter().copied().collect();
        assert!(now.is_subset(&previous));
        assert_eq!(stage.n_candidates, previous.len());
        previous = now;
    }
    for t in &g.true_idx {
        assert!(trace.retained().contains(t), "signal {t} lost: {:?}", trace.retained());
    }
    assert!(trace.retained().len() < 40);
    let again = reduction_phase(&ds, &ReductionConfig { seed: 4, ..ReductionConfig::default() }).unwrap();
    assert_eq!(trace, again);
}

#[test]
fn configuration_errors() {
    let ds = gaussian(23, 30, 100, &[(0, 1.0)]);
    let cfg = |rules: Vec<DecisionRule>| ReductionConfig { rules, ..ReductionConfig::default() };
    assert!(matches!(
        reduction_phase(&ds, &cfg(vec![DecisionRule::top_k(2, 1), DecisionRule::top_k(2, 1)])),
        Err(ReductionError::RuleCount { expected: 1, got: 2 })
    ));
    assert!(matches!(reduction_phase(&ds, &cfg(vec![DecisionRule::top_k(0, 1)])), Err(ReductionError::InvalidRule(_))));
    assert!(matches!(reduction_phase(&ds, &cfg(vec![DecisionRule::top_k(2, 3)])), Err(ReductionError::InvalidRule(_))));
    let fam = ReductionConfig { family: Some(Family::Cox(modelsets::TieMethod::Efron)), ..ReductionConfig::default() };
    assert!(matches!(reduction_phase(&ds, &fam), Err(ReductionError::FamilyMismatch { .. })));
    // 100 variables on a square give lines of 10; 8 rows cannot fit them
    let small = ds.rows(0..8);
    assert!(matches!(reduction_phase(&small, &ReductionConfig::default()), Err(ReductionError::SampleTooSmall { .. })));
}

#[test]
fn empty_retention_returns_the_partial_trace() {
    let ds = gaussian(24, 50, 100, &[]);
    let cfg = ReductionConfig { rules: vec![DecisionRule::threshold(1e-12, 2)], ..ReductionConfig::default() };
    match reduction_phase(&ds, &cfg) {
        Err(ReductionError::EmptyRetention { stage: 1, trace }) => assert_eq!(trace.stages.len(), 1),
        other => panic!("{other:?}"),
    }
}

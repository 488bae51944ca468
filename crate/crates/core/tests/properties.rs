use proptest::prelude::*;
use proptest::strategy::Strategy as _;

use searchgame::analysis::{
    closed_form_deviation_value, continuation_win_probs, exact_win_probs, one_shot_deviation_value, residual_bound,
    verify_spe, SpeOptions,
};
use searchgame::model::{belief_after_failed_search, validate_scenario, Belief, Player, ScenarioSpec, TailRule};
use searchgame::scenarios::{random_opponents, random_scenario, random_scenario_with, RandomScenarioConfig};
use searchgame::strategy::{argmax_set, greedy_action, greedy_score, TIE_TOL};
use searchgame::{History, SearchScenario, Strategy, StrategyProfile, TieBreak};

fn belief_strategy(n: usize) -> impl proptest::strategy::Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let t: f64 = w.iter().sum();
        w.into_iter().map(|x| x / t).collect()
    })
}

proptest! {
    #[test]
    fn conditioning_stays_stochastic(z in belief_strategy(4), s in 0usize..4, d in proptest::collection::vec(0.0f64..0.95, 4)) {
        let z = Belief::new(z).unwrap();
        let out = belief_after_failed_search(&z, s, &d).unwrap();
        let total: f64 = out.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(out.probs().iter().all(|&p| p >= 0.0));
        // searching s never makes s more likely
        prop_assert!(out.get(s) <= z.get(s) + 1e-15);
    }

    #[test]
    fn greedy_action_is_in_argmax(z in belief_strategy(3), d in proptest::collection::vec(0.0f64..0.9, 3)) {
        let z = Belief::new(z).unwrap();
        let scores = greedy_score(&z, &d);
        let ties = argmax_set(&scores, TIE_TOL);
        for tie in [TieBreak::LowestIndex, TieBreak::HighestIndex, TieBreak::UniformOverArgmax] {
            let a = greedy_action(&z, &d, &tie);
            prop_assert!(a.support().all(|(s, _)| ties.contains(&s)));
        }
    }

    #[test]
    fn residual_bound_shrinks(q in 0.01f64..1.0, n in 1usize..6, d in 0.0f64..0.9, t in 0usize..200) {
        let a = residual_bound(q, n, d, t);
        let b = residual_bound(q, n, d, t + 1);
        prop_assert!(b <= a);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn closed_form_matches_truncated_evaluation(seed in 0u64..500) {
        let s = random_scenario(3, 3, seed);
        let profile = StrategyProfile::all_greedy(&s);
        let h = History::empty();
        let v = exact_win_probs(&s, &profile, 200).unwrap();
        for i in 0..s.players().len() {
            let greedy = greedy_action(s.initial(), s.overlook(), &TieBreak::LowestIndex).as_pure().unwrap();
            let closed = one_shot_deviation_value(&s, &profile, &h, i, greedy).unwrap();
            prop_assert!((closed - v.values[i]).abs() <= v.residual + 1e-9);
        }
    }
}

#[test]
fn accounting_identity_for_arbitrary_profiles() {
    for seed in 0..30 {
        let s = random_scenario(4, 3, seed);
        let uniform = StrategyProfile::uniform(&s, Strategy::UniformRandom);
        for profile in [uniform, random_opponents(&s, 0, 2, seed)] {
            let v = exact_win_probs(&s, &profile, 8).unwrap();
            assert!((v.total() - 1.0).abs() < 1e-12, "seed {seed}: {}", v.total());
            assert!(v.values.iter().all(|&u| u >= 0.0));
        }
    }
}

#[test]
fn truncation_is_monotone() {
    for seed in 0..20 {
        let s = random_scenario(4, 3, seed);
        let profile = random_opponents(&s, 1 % s.players().len(), 2, seed);
        let mut prev = exact_win_probs(&s, &profile, 1).unwrap();
        for t in 2..30 {
            let v = exact_win_probs(&s, &profile, t).unwrap();
            for (a, b) in prev.values.iter().zip(&v.values) {
                assert!(b + 1e-15 >= *a);
            }
            assert!(v.residual <= prev.residual + 1e-15);
            prev = v;
        }
    }
}

/// Relabels states by `perm` (old state `s` becomes `perm[s]`).
fn permuted(s: &SearchScenario, perm: &[usize]) -> SearchScenario {
    let spec = s.to_spec();
    let n = spec.n_states;
    let mut initial = vec![0.0; n];
    let mut overlook = vec![0.0; n];
    for a in 0..n {
        initial[perm[a]] = spec.initial[a];
        overlook[perm[a]] = s.overlook()[a];
    }
    let matrices = spec
        .matrices
        .iter()
        .map(|m| {
            let mut out = vec![vec![0.0; n]; n];
            for a in 0..n {
                for b in 0..n {
                    out[perm[a]][perm[b]] = m[a][b];
                }
            }
            out
        })
        .collect();
    validate_scenario(ScenarioSpec { initial, matrices, overlook: Some(overlook), ..spec }).unwrap()
}

#[test]
fn values_are_invariant_under_state_relabelling() {
    let cfg = RandomScenarioConfig { max_overlook: 0.5, ..RandomScenarioConfig::new(4, 3) };
    for seed in 0..30 {
        let s = random_scenario_with(&cfg, seed);
        let n = s.n_states();
        let perm: Vec<usize> = (0..n).rev().collect();
        let t = s.to_owned();
        let p = permuted(&t, &perm);
        // greedy values do not depend on tie-breaking, so any labelling gives q_i
        let a = exact_win_probs(&s, &StrategyProfile::all_greedy(&s), 60).unwrap();
        let b = exact_win_probs(&p, &StrategyProfile::all_greedy(&p), 60).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() <= a.residual.max(b.residual) + 1e-9);
        }
        let ua = exact_win_probs(&s, &StrategyProfile::uniform(&s, Strategy::UniformRandom), 8).unwrap();
        let ub = exact_win_probs(&p, &StrategyProfile::uniform(&p, Strategy::UniformRandom), 8).unwrap();
        for (x, y) in ua.values.iter().zip(&ub.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn greedy_profiles_pass_with_no_active_periods() {
    let cfg = RandomScenarioConfig { max_no_active: 0.5, max_overlook: 0.5, players_min: 2, ..RandomScenarioConfig::new(3, 3) };
    for seed in 0..15 {
        let s = random_scenario_with(&cfg, seed);
        let report = verify_spe(&s, &StrategyProfile::all_greedy(&s), &SpeOptions::new(3, 300)).unwrap();
        assert!(report.passed(), "seed {seed}: {:?}", report.verdict);
    }
}

#[test]
fn one_player_closed_form_gain_vanishes() {
    let v1 = closed_form_deviation_value(1.0, 0.0, 0.9, 0.0);
    let v2 = closed_form_deviation_value(1.0, 0.0, 0.1, 0.0);
    assert_eq!(v1, 1.0);
    assert_eq!(v2, 1.0);
}

#[test]
fn continuation_from_history_is_conditional() {
    let s = validate_scenario(ScenarioSpec {
        n_states: 2,
        initial: vec![0.2, 0.8],
        matrices: vec![vec![vec![0.2, 0.8], vec![1.0, 0.0]]],
        tail_rule: TailRule::RepeatLast,
        players: vec![Player { id: 1, q: 0.99 }, Player { id: 2, q: 0.01 }],
        overlook: None,
        no_active_prob: 0.0,
    })
    .unwrap();
    let h = History::of_searches(&[1]);
    let v = continuation_win_probs(&s, &StrategyProfile::all_greedy(&s), &h, 80).unwrap();
    assert!((v.values[0] - 0.99).abs() <= v.residual + 1e-9);
    assert!((v.total() - 1.0).abs() < 1e-12);
}

mod common;

use common::{enumerate_values, oracle_greedy, path_belief, OracleStrategy};
use searchgame::analysis::exact_win_probs;
use searchgame::model::belief_at_history;
use searchgame::scenarios::{random_scenario_with, RandomScenarioConfig};
use searchgame::{History, Step, StrategyProfile};

fn config() -> RandomScenarioConfig {
    RandomScenarioConfig {
        max_overlook: 0.8,
        max_no_active: 0.3,
        matrices: 2,
        ..RandomScenarioConfig::new(4, 3)
    }
}

/// All records of length `len` over `n` states, idle included.
fn records(n: usize, len: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|r| {
                (0..=n).map(move |s| {
                    let mut r = r.clone();
                    r.push(if s == n { None } else { Some(s) });
                    r
                })
            })
            .collect();
    }
    out
}

fn to_history(record: &[Option<usize>]) -> History {
    History::from_steps(record.iter().map(|s| s.map_or(Step::Idle, Step::Search)).collect())
}

#[test]
fn filter_matches_path_enumeration() {
    let mut compared = 0;
    for seed in 0..40 {
        let s = random_scenario_with(&config(), seed);
        for len in 0..=4 {
            for record in records(s.n_states(), len) {
                let oracle = path_belief(&s, &record);
                let filtered = belief_at_history(&s, &to_history(&record));
                match (oracle, filtered) {
                    (Some(o), Ok(z)) => {
                        for (a, b) in o.iter().zip(z.probs()) {
                            assert!((a - b).abs() < 1e-9, "seed {seed} record {record:?}: {o:?} vs {:?}", z.probs());
                        }
                        compared += 1;
                    }
                    (None, Err(_)) => {}
                    // near-zero evidence may land on either side of the cut-off
                    (None, Ok(_)) | (Some(_), Err(_)) => {}
                }
            }
        }
    }
    assert!(compared > 1000);
}

#[test]
fn exact_values_match_enumeration() {
    for seed in 100..130 {
        let cfg = RandomScenarioConfig {
            n_max: 3,
            players_max: 2,
            ..config()
        };
        let s = random_scenario_with(&cfg, seed);
        let profile = StrategyProfile::all_greedy(&s);
        let strategies: Vec<OracleStrategy> = s.players().iter().map(|_| oracle_greedy(&s)).collect();
        for horizon in 1..=3 {
            let brute = enumerate_values(&s, &strategies, horizon);
            let v = exact_win_probs(&s, &profile, horizon).unwrap();
            for (a, b) in brute.iter().zip(&v.values) {
                assert!((a - b).abs() < 1e-9, "seed {seed} T={horizon}: {brute:?} vs {:?}", v.values);
            }
        }
    }
}

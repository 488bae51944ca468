//! Seeded random scenarios and strategies for property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::model::{validate_scenario, History, Player, ScenarioSpec, SearchScenario, Step, TailRule};
use crate::strategy::{DefaultRule, MixedAction, Script, Strategy, StrategyProfile, TieBreak};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomScenarioConfig {
    pub n_max: usize,
    pub players_max: usize,
    /// Minimum number of players (clamped to `players_max`).
    pub players_min: usize,
    /// Chance that an off-diagonal transition entry is zero.
    pub sparsity: f64,
    /// Overlook probabilities are drawn from `[0, max_overlook]`; 0 disables overlooking.
    pub max_overlook: f64,
    /// No-active probability is drawn from `[0, max_no_active]`; 0 disables it.
    pub max_no_active: f64,
    /// Each player gets at least this share of the active mass.
    pub q_floor: f64,
    /// Number of matrices in the schedule (at least 1).
    pub matrices: usize,
}

impl RandomScenarioConfig {
    pub fn new(n_max: usize, players_max: usize) -> Self {
        RandomScenarioConfig {
            n_max: n_max.max(1),
            players_max: players_max.max(1),
            players_min: 1,
            sparsity: 0.25,
            max_overlook: 0.0,
            max_no_active: 0.0,
            q_floor: 0.15,
            matrices: 1,
        }
    }
}

fn weights(rng: &mut ChaCha8Rng, n: usize, sparsity: f64, keep: Option<usize>) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|s| {
            if Some(s) != keep && rng.random::<f64>() < sparsity {
                0.0
            } else {
                rng.sample::<f64, _>(Exp1) + 1e-3
            }
        })
        .collect();
    if w.iter().all(|x| *x == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Random valid scenario with default options; identical for identical seeds.
pub fn random_scenario(n_max: usize, players_max: usize, seed: u64) -> SearchScenario {
    random_scenario_with(&RandomScenarioConfig::new(n_max, players_max), seed)
}

pub fn random_scenario_with(cfg: &RandomScenarioConfig, seed: u64) -> SearchScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=cfg.n_max.max(1));
    let lo = cfg.players_min.clamp(1, cfg.players_max.max(1));
    let k = rng.random_range(lo..=cfg.players_max.max(lo));

    let initial = weights(&mut rng, n, cfg.sparsity, None);
    let matrices = (0..cfg.matrices.max(1))
        .map(|_| (0..n).map(|row| weights(&mut rng, n, cfg.sparsity, Some(row))).collect())
        .collect();

    let r = if cfg.max_no_active > 0.0 {
        rng.random_range(0.0..cfg.max_no_active)
    } else {
        0.0
    };
    let floor = cfg.q_floor.min(1.0 / k as f64);
    let shares = weights(&mut rng, k, 0.0, None);
    let players = shares
        .iter()
        .enumerate()
        .map(|(i, w)| Player {
            id: i as u32 + 1,
            q: (1.0 - r) * (floor + (1.0 - floor * k as f64) * w),
        })
        .collect();
    let overlook = (cfg.max_overlook > 0.0).then(|| (0..n).map(|_| rng.random_range(0.0..=cfg.max_overlook)).collect());

    validate_scenario(ScenarioSpec {
        n_states: n,
        initial,
        matrices,
        tail_rule: TailRule::RepeatLast,
        players,
        overlook,
        no_active_prob: r,
    })
    .expect("random scenarios are valid by construction")
}

fn random_tie(rng: &mut ChaCha8Rng, n: usize) -> TieBreak {
    match rng.random_range(0..3) {
        0 => TieBreak::LowestIndex,
        1 => TieBreak::HighestIndex,
        _ => {
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            TieBreak::Fixed(order)
        }
    }
}

fn random_action(rng: &mut ChaCha8Rng, n: usize) -> MixedAction {
    if rng.random::<f64>() < 0.6 {
        MixedAction::pure(n, rng.random_range(0..n))
    } else {
        let w = weights(rng, n, 0.3, None);
        MixedAction::new(w.clone()).unwrap_or_else(|_| MixedAction::pure(n, 0))
    }
}

/// Script with a random action at every history shorter than `depth`, greedy afterwards.
pub fn random_scripted_strategy(scenario: &SearchScenario, depth: usize, seed: u64) -> Strategy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = scenario.n_states();
    let mut steps: Vec<Step> = (0..n).map(Step::Search).collect();
    if scenario.no_active_prob() > 0.0 {
        steps.push(Step::Idle);
    }
    let mut layer = vec![History::empty()];
    let mut entries = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::new();
        for h in layer {
            entries.push((h.clone(), random_action(&mut rng, n)));
            next.extend(steps.iter().map(|&s| h.extended(s)));
        }
        layer = next;
    }
    Strategy::Scripted(Script::new(entries, DefaultRule::Greedy(random_tie(&mut rng, n))))
}

/// Profile where `greedy_player` is greedy and everyone else follows a random script.
pub fn random_opponents(scenario: &SearchScenario, greedy_player: usize, depth: usize, seed: u64) -> StrategyProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = scenario.n_states();
    let assignments = scenario
        .players()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let s = if i == greedy_player {
                Strategy::Greedy(random_tie(&mut rng, n))
            } else {
                random_scripted_strategy(scenario, depth, rng.random())
            };
            (p.id, s)
        })
        .collect();
    StrategyProfile::new(scenario, assignments).expect("ids come from the scenario")
}

/// Every player greedy with its own random tie-break.
pub fn random_greedy_profile(scenario: &SearchScenario, seed: u64) -> StrategyProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = scenario.n_states();
    let assignments = scenario
        .players()
        .iter()
        .map(|p| (p.id, Strategy::Greedy(random_tie(&mut rng, n))))
        .collect();
    StrategyProfile::new(scenario, assignments).expect("ids come from the scenario")
}

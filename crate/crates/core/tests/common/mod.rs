//! Brute-force reference computations that share no code with the library's
//! filter or evaluator: object paths and activation draws are enumerated directly.
#![allow(dead_code)]

use searchgame::SearchScenario;

/// A public history as the oracle sees it: `None` marks an idle period.
pub type Record = [Option<usize>];

/// Mixed action of one player as a function of the public record.
pub type OracleStrategy<'a> = Box<dyn Fn(&Record) -> Vec<f64> + 'a>;

fn p(scenario: &SearchScenario, period: usize, from: usize, to: usize) -> f64 {
    scenario.transitions().matrix_at(period).get(from, to)
}

/// Posterior location law at the start of period `record.len() + 1`, summing
/// over every object path. `None` when the record has probability zero.
pub fn path_belief(scenario: &SearchScenario, record: &Record) -> Option<Vec<f64>> {
    let n = scenario.n_states();
    let delta = scenario.overlook();
    let t = record.len();
    let mut out = vec![0.0; n];
    let mut path = vec![0usize; t + 1];
    loop {
        let mut w = scenario.initial().get(path[0]);
        for k in 0..t {
            if let Some(s) = record[k] {
                if path[k] == s {
                    w *= delta[s];
                }
            }
            w *= p(scenario, k + 1, path[k], path[k + 1]);
        }
        out[path[t]] += w;
        // odometer over paths
        let mut i = 0;
        loop {
            if i > t {
                let total: f64 = out.iter().sum();
                if total <= 1e-300 {
                    return None;
                }
                return Some(out.iter().map(|x| x / total).collect());
            }
            path[i] += 1;
            if path[i] < n {
                break;
            }
            path[i] = 0;
            i += 1;
        }
    }
}

/// Greedy with lowest-index tie-breaking, computed from [`path_belief`].
pub fn oracle_greedy(scenario: &SearchScenario) -> OracleStrategy<'_> {
    Box::new(move |record: &Record| {
        let n = scenario.n_states();
        let z = path_belief(scenario, record).unwrap_or_else(|| vec![1.0 / n as f64; n]);
        let scores: Vec<f64> = (0..n).map(|s| z[s] * (1.0 - scenario.overlook()[s])).collect();
        let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pick = scores.iter().position(|&x| x >= best - 1e-12).unwrap();
        let mut a = vec![0.0; n];
        a[pick] = 1.0;
        a
    })
}

/// Pure strategy from a lookup of records, with a fallback.
pub fn oracle_table<'a>(
    n: usize,
    table: Vec<(Vec<Option<usize>>, usize)>,
    fallback: OracleStrategy<'a>,
) -> OracleStrategy<'a> {
    Box::new(move |record: &Record| match table.iter().find(|(h, _)| h.as_slice() == record) {
        Some((_, s)) => {
            let mut a = vec![0.0; n];
            a[*s] = 1.0;
            a
        }
        None => fallback(record),
    })
}

/// Winning probability of each player within `horizon` periods, by recursion
/// over object location, active player and searched state.
pub fn enumerate_values(scenario: &SearchScenario, strategies: &[OracleStrategy<'_>], horizon: usize) -> Vec<f64> {
    let mut wins = vec![0.0; strategies.len()];
    let mut record = Vec::new();
    for x in 0..scenario.n_states() {
        let w = scenario.initial().get(x);
        if w > 0.0 {
            recurse(scenario, strategies, horizon, x, w, &mut record, &mut wins);
        }
    }
    wins
}

fn recurse(
    scenario: &SearchScenario,
    strategies: &[OracleStrategy<'_>],
    horizon: usize,
    x: usize,
    weight: f64,
    record: &mut Vec<Option<usize>>,
    wins: &mut [f64],
) {
    let period = record.len() + 1;
    if period > horizon {
        return;
    }
    let n = scenario.n_states();
    let delta = scenario.overlook();
    let step = |record: &mut Vec<Option<usize>>, w: f64, wins: &mut [f64]| {
        for y in 0..n {
            let m = p(scenario, period, x, y);
            if m > 0.0 {
                recurse(scenario, strategies, horizon, y, w * m, record, wins);
            }
        }
    };
    for (i, player) in scenario.players().iter().enumerate() {
        let action = strategies[i](record);
        for (s, &a) in action.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let w = weight * player.q * a;
            let miss = if s == x { delta[s] } else { 1.0 };
            wins[i] += w * (1.0 - miss);
            if miss > 0.0 {
                record.push(Some(s));
                step(record, w * miss, wins);
                record.pop();
            }
        }
    }
    let r = scenario.no_active_prob();
    if r > 0.0 {
        record.push(None);
        step(record, weight * r, wins);
        record.pop();
    }
}

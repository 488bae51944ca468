use std::collections::HashMap;

use crate::model::{belief_at_history, Belief, History, SearchScenario, Step, EVIDENCE_TOL};
use crate::strategy::{greedy_score, Decision, MixedAction, StrategyProfile};

use super::bounds::residual_bound;
use super::deviation::GreedyCertifier;
use super::{AnalysisError, DEFAULT_NODE_LIMIT, DEFAULT_PRUNE_BELOW};

#[derive(Debug, Clone, PartialEq)]
pub struct ExactOptions {
    /// Number of periods evaluated.
    pub horizon: usize,
    pub prune_below: f64,
    pub node_limit: usize,
}

impl ExactOptions {
    pub fn new(horizon: usize) -> Self {
        ExactOptions {
            horizon,
            prune_below: DEFAULT_PRUNE_BELOW,
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }
}

/// Winning probabilities over a truncated horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueReport {
    pub player_ids: Vec<u32>,
    /// Probability that each player finds the object within the horizon.
    pub values: Vec<f64>,
    /// Mass not resolved within the horizon (including pruned mass).
    pub residual: f64,
    /// Part of `residual` that came from pruning or numerically impossible branches.
    pub pruned: f64,
    /// Analytic bound on the residual, present when some player is greedy throughout.
    pub residual_bound: Option<f64>,
    pub horizon: usize,
    pub nodes: usize,
}

impl ValueReport {
    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() + self.residual
    }
}

/// Discounted payoffs `Σ_t discount^(t−1) · P(player finds at t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountReport {
    pub player_ids: Vec<u32>,
    pub values: Vec<f64>,
    pub discount: f64,
    pub horizon: usize,
    /// Bound on the discounted value of everything after the horizon.
    pub tail_bound: f64,
}

#[derive(Debug, Clone)]
enum Trail {
    Known(History),
    /// Every strategy is history-free from here on.
    Forgotten,
}

impl Trail {
    fn history(&self) -> Option<&History> {
        match self {
            Trail::Known(h) => Some(h),
            Trail::Forgotten => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    trail: Trail,
    belief: Belief,
    mass: f64,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Evaluation {
    /// `per_period[k][j]`: probability player j finds the object in the (k+1)-th evaluated period.
    pub per_period: Vec<Vec<f64>>,
    /// Mass settled by the greedy continuation value.
    pub closed: Vec<f64>,
    pub alive: f64,
    pub dropped: f64,
    pub nodes: usize,
}

impl Evaluation {
    pub fn values(&self) -> Vec<f64> {
        let mut v = self.closed.clone();
        for row in &self.per_period {
            for (acc, x) in v.iter_mut().zip(row) {
                *acc += x;
            }
        }
        v
    }

    pub fn residual(&self) -> f64 {
        self.alive + self.dropped
    }
}

pub(crate) struct Evaluator<'a> {
    pub scenario: &'a SearchScenario,
    pub profile: &'a StrategyProfile,
    /// When set, nodes whose continuation is certified greedy are settled in closed form.
    pub closure: Option<&'a GreedyCertifier>,
    pub prune_below: f64,
    pub node_limit: usize,
}

pub(crate) fn player_actions(
    scenario: &SearchScenario,
    profile: &StrategyProfile,
    history: Option<&History>,
    belief: &Belief,
) -> Vec<MixedAction> {
    profile
        .strategies()
        .iter()
        .map(|s| match history {
            Some(h) => s.act(&Decision { scenario, history: h, belief }),
            None => s.act_history_free(scenario, belief),
        })
        .collect()
}

impl Evaluator<'_> {
    pub fn new<'a>(scenario: &'a SearchScenario, profile: &'a StrategyProfile) -> Evaluator<'a> {
        Evaluator {
            scenario,
            profile,
            closure: None,
            prune_below: DEFAULT_PRUNE_BELOW,
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }

    /// Pushes unit mass from `start` (with belief `belief`) through `periods` periods.
    pub fn run(&self, start: &History, belief: Belief, periods: usize) -> Result<Evaluation, AnalysisError> {
        let sc = self.scenario;
        let n = sc.n_states();
        let players = sc.players();
        let r = sc.no_active_prob();
        let mut out = Evaluation {
            closed: vec![0.0; players.len()],
            ..Default::default()
        };
        let continuation = self.closure.map(GreedyCertifier::continuation_values);

        let trail = if self.profile.is_history_free_from(start) {
            Trail::Forgotten
        } else {
            Trail::Known(start.clone())
        };
        let mut frontier = vec![Node { trail, belief, mass: 1.0 }];

        for k in 0..periods {
            if frontier.is_empty() {
                break;
            }
            let period = start.period() + k;
            let mut wins = vec![0.0; players.len()];
            let mut next: Vec<Node> = Vec::new();
            let mut merged: HashMap<Vec<u64>, usize> = HashMap::new();

            for node in frontier {
                out.nodes += 1;
                if out.nodes > self.node_limit {
                    return Err(AnalysisError::TreeTooLarge { limit: self.node_limit });
                }
                if let (Some(cert), Some(values)) = (self.closure, continuation) {
                    if cert.all_certified(node.trail.history()) {
                        for (acc, c) in out.closed.iter_mut().zip(values) {
                            *acc += node.mass * c;
                        }
                        continue;
                    }
                }

                let scores = greedy_score(&node.belief, sc.overlook());
                let acts = player_actions(sc, self.profile, node.trail.history(), &node.belief);
                let mut action_mass = vec![0.0; n];
                for ((player, act), win) in players.iter().zip(&acts).zip(wins.iter_mut()) {
                    for (s, p) in act.support() {
                        action_mass[s] += player.q * p;
                    }
                    *win += node.mass * player.q * act.find_prob(&scores);
                }

                let mut push = |step: Step, child_mass: f64, out: &mut Evaluation| -> Result<(), AnalysisError> {
                    if child_mass == 0.0 {
                        return Ok(());
                    }
                    if child_mass < self.prune_below {
                        out.dropped += child_mass;
                        return Ok(());
                    }
                    let belief = sc.advance(&node.belief, step, period)?;
                    let trail = match &node.trail {
                        Trail::Known(h) => {
                            let child = h.extended(step);
                            if self.profile.is_history_free_from(&child) {
                                Trail::Forgotten
                            } else {
                                Trail::Known(child)
                            }
                        }
                        Trail::Forgotten => Trail::Forgotten,
                    };
                    match trail {
                        Trail::Forgotten => {
                            let key = belief.key();
                            if let Some(&idx) = merged.get(&key) {
                                next[idx].mass += child_mass;
                            } else {
                                merged.insert(key, next.len());
                                next.push(Node { trail, belief, mass: child_mass });
                            }
                        }
                        Trail::Known(_) => next.push(Node { trail, belief, mass: child_mass }),
                    }
                    Ok(())
                };

                for (s, &m) in action_mass.iter().enumerate() {
                    if m == 0.0 {
                        continue;
                    }
                    let miss = 1.0 - scores[s];
                    let child_mass = node.mass * m * miss;
                    if miss <= EVIDENCE_TOL {
                        out.dropped += child_mass;
                        continue;
                    }
                    push(Step::Search(s), child_mass, &mut out)?;
                }
                if r > 0.0 {
                    push(Step::Idle, node.mass * r, &mut out)?;
                }
            }
            out.per_period.push(wins);
            frontier = next;
        }
        out.alive = frontier.iter().map(|node| node.mass).sum();
        Ok(out)
    }
}

/// Exact winning probabilities over the first `horizon` periods.
pub fn exact_win_probs(scenario: &SearchScenario, profile: &StrategyProfile, horizon: usize) -> Result<ValueReport, AnalysisError> {
    exact_win_probs_with(scenario, profile, &ExactOptions::new(horizon))
}

pub fn exact_win_probs_with(
    scenario: &SearchScenario,
    profile: &StrategyProfile,
    opts: &ExactOptions,
) -> Result<ValueReport, AnalysisError> {
    value_report(scenario, profile, &History::empty(), opts)
}

/// Continuation winning probabilities in the subgame at `history`,
/// conditional on the object not having been found before.
pub fn continuation_win_probs(
    scenario: &SearchScenario,
    profile: &StrategyProfile,
    history: &History,
    horizon: usize,
) -> Result<ValueReport, AnalysisError> {
    value_report(scenario, profile, history, &ExactOptions::new(horizon))
}

fn value_report(
    scenario: &SearchScenario,
    profile: &StrategyProfile,
    start: &History,
    opts: &ExactOptions,
) -> Result<ValueReport, AnalysisError> {
    if opts.horizon == 0 {
        return Err(AnalysisError::InvalidArgument("horizon must be at least 1".into()));
    }
    let belief = belief_at_history(scenario, start)?;
    let eval = Evaluator {
        prune_below: opts.prune_below,
        node_limit: opts.node_limit,
        ..Evaluator::new(scenario, profile)
    }
    .run(start, belief, opts.horizon)?;

    let certifier = GreedyCertifier::new(scenario, profile);
    let residual_bound = certifier
        .greedy_from(start)
        .map(|q| residual_bound(q, scenario.n_states(), scenario.max_overlook(), opts.horizon));

    Ok(ValueReport {
        player_ids: profile.ids().to_vec(),
        values: eval.values(),
        residual: eval.residual(),
        pruned: eval.dropped,
        residual_bound,
        horizon: opts.horizon,
        nodes: eval.nodes,
    })
}

/// Discounted winning payoffs over `horizon` periods; the remainder is at most `discount^horizon`.
pub fn discounted_values(
    scenario: &SearchScenario,
    profile: &StrategyProfile,
    discount: f64,
    horizon: usize,
) -> Result<DiscountReport, AnalysisError> {
    if !(discount > 0.0 && discount < 1.0) {
        return Err(AnalysisError::InvalidArgument(format!("discount {discount} is not in (0, 1)")));
    }
    if horizon == 0 {
        return Err(AnalysisError::InvalidArgument("horizon must be at least 1".into()));
    }
    let eval = Evaluator::new(scenario, profile).run(&History::empty(), scenario.initial().clone(), horizon)?;
    let mut values = vec![0.0; scenario.players().len()];
    let mut weight = 1.0;
    for row in &eval.per_period {
        for (acc, x) in values.iter_mut().zip(row) {
            *acc += weight * x;
        }
        weight *= discount;
    }
    Ok(DiscountReport {
        player_ids: profile.ids().to_vec(),
        values,
        discount,
        horizon,
        tail_bound: discount.powi(horizon as i32),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_scenario, Player, ScenarioSpec, TailRule};
    use crate::strategy::Strategy;

    fn one_player_certain() -> SearchScenario {
        validate_scenario(ScenarioSpec {
            n_states: 2,
            initial: vec![1.0, 0.0],
            matrices: vec![],
            tail_rule: TailRule::Identity,
            players: vec![Player { id: 1, q: 1.0 }],
            overlook: None,
            no_active_prob: 0.0,
        })
        .unwrap()
    }

    #[test]
    fn certain_immediate_find() {
        let s = one_player_certain();
        let p = StrategyProfile::all_greedy(&s);
        let v = exact_win_probs(&s, &p, 1).unwrap();
        assert_eq!(v.values, vec![1.0]);
        assert_eq!(v.residual, 0.0);
        assert_eq!(v.residual_bound, Some(0.5));
        let d = discounted_values(&s, &p, 0.3, 5).unwrap();
        assert_eq!(d.values, vec![1.0]);
    }

    #[test]
    fn zero_horizon_is_rejected() {
        let s = one_player_certain();
        let p = StrategyProfile::all_greedy(&s);
        assert!(matches!(exact_win_probs(&s, &p, 0), Err(AnalysisError::InvalidArgument(_))));
        assert!(discounted_values(&s, &p, 1.0, 3).is_err());
    }

    #[test]
    fn no_active_halves_the_single_period() {
        let s = validate_scenario(ScenarioSpec {
            n_states: 2,
            initial: vec![1.0, 0.0],
            matrices: vec![],
            tail_rule: TailRule::Identity,
            players: vec![Player { id: 1, q: 0.5 }],
            overlook: None,
            no_active_prob: 0.5,
        })
        .unwrap();
        let p = StrategyProfile::all_greedy(&s);
        let v = exact_win_probs(&s, &p, 1).unwrap();
        assert_eq!(v.values, vec![0.5]);
        assert_eq!(v.residual, 0.5);
        let v = exact_win_probs(&s, &p, 3).unwrap();
        assert!((v.values[0] - 0.875).abs() < 1e-15);
    }

    #[test]
    fn node_limit_is_enforced() {
        let s = validate_scenario(ScenarioSpec {
            n_states: 3,
            initial: vec![0.2, 0.3, 0.5],
            matrices: vec![vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.1, 0.3], vec![0.25, 0.25, 0.5]]],
            tail_rule: TailRule::RepeatLast,
            players: vec![Player { id: 1, q: 1.0 }],
            overlook: None,
            no_active_prob: 0.0,
        })
        .unwrap();
        let p = StrategyProfile::uniform(&s, Strategy::UniformRandom);
        let opts = ExactOptions {
            node_limit: 100,
            ..ExactOptions::new(20)
        };
        assert_eq!(
            exact_win_probs_with(&s, &p, &opts),
            Err(AnalysisError::TreeTooLarge { limit: 100 })
        );
    }
}

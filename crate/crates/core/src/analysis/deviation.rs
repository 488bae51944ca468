use crate::model::{belief_at_history, Belief, History, SearchScenario, Step, DERIVED_TOL, EVIDENCE_TOL};
use crate::strategy::{greedy_score, is_greedy_action, MixedAction, Strategy, StrategyProfile};

use super::exact::player_actions;
use super::AnalysisError;

#[derive(Debug, Clone)]
enum Certification {
    Always,
    /// Greedy except at these (reachable) histories.
    UnlessAt(Vec<History>),
    Never,
}

/// Decides where a profile is provably greedy from some history onwards.
///
/// Under an everywhere-greedy continuation each player wins with probability
/// `q_i / (1 − r)`, which is what the closed-form deviation value relies on.
#[derive(Debug, Clone)]
pub struct GreedyCertifier {
    per_player: Vec<Certification>,
    q: Vec<f64>,
    continuation: Vec<f64>,
}

impl GreedyCertifier {
    pub fn new(scenario: &SearchScenario, profile: &StrategyProfile) -> Self {
        let per_player = profile
            .strategies()
            .iter()
            .map(|s| match s {
                Strategy::Greedy(_) => Certification::Always,
                Strategy::UniformRandom if scenario.n_states() == 1 => Certification::Always,
                Strategy::Scripted(script) if s.has_greedy_fallback() => {
                    let bad = script
                        .sorted_entries()
                        .into_iter()
                        .filter(|(h, _)| match belief_at_history(scenario, h) {
                            Ok(z) => !is_greedy_action(s, scenario, h, &z, DERIVED_TOL),
                            Err(_) => false,
                        })
                        .map(|(h, _)| h.clone())
                        .collect::<Vec<_>>();
                    if bad.is_empty() {
                        Certification::Always
                    } else {
                        Certification::UnlessAt(bad)
                    }
                }
                _ => Certification::Never,
            })
            .collect();
        let r = scenario.no_active_prob();
        let q: Vec<f64> = scenario.players().iter().map(|p| p.q).collect();
        let continuation = q.iter().map(|q| q / (1.0 - r)).collect();
        GreedyCertifier { per_player, q, continuation }
    }

    /// Is the player greedy at `h` and every extension? `None` stands for a
    /// node whose history no longer matters to any strategy.
    pub fn is_certified(&self, player: usize, h: Option<&History>) -> bool {
        match (&self.per_player[player], h) {
            (Certification::Always, _) => true,
            (Certification::Never, _) => false,
            (Certification::UnlessAt(_), None) => true,
            (Certification::UnlessAt(bad), Some(h)) => !bad.iter().any(|b| b.starts_with(h)),
        }
    }

    pub fn all_certified(&self, h: Option<&History>) -> bool {
        (0..self.per_player.len()).all(|i| self.is_certified(i, h))
    }

    /// Largest activation probability among players greedy from `h` on.
    pub fn greedy_from(&self, h: &History) -> Option<f64> {
        (0..self.per_player.len())
            .filter(|&i| self.is_certified(i, Some(h)))
            .map(|i| self.q[i])
            .reduce(f64::max)
    }

    /// Winning probability of each player under an all-greedy continuation.
    pub fn continuation_values(&self) -> &[f64] {
        &self.continuation
    }
}

/// Value of a one-shot deviation when all play from the next period on is greedy.
///
/// `own_find` is the deviator's immediate find probability given it is active,
/// `opp_immediate` the same for the opponents given one of them is active.
/// With `r = 0` this is `q·[f + (1 − f)·q] + (1 − q)·(1 − g)·q`.
pub fn closed_form_deviation_value(q: f64, no_active: f64, own_find: f64, opp_immediate: f64) -> f64 {
    let cont = q / (1.0 - no_active);
    q * (own_find + (1.0 - own_find) * cont) + (1.0 - q - no_active) * (1.0 - opp_immediate) * cont + no_active * cont
}

/// Immediate find probability of player `i`'s opponents, given one of them is active.
pub(crate) fn opponent_immediate(scenario: &SearchScenario, acts: &[MixedAction], scores: &[f64], i: usize) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (j, (player, act)) in scenario.players().iter().zip(acts).enumerate() {
        if j != i {
            num += player.q * act.find_prob(scores);
            den += player.q;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Steps leading out of `h` with positive probability under nature.
pub(crate) fn feasible_steps(scenario: &SearchScenario, belief: &Belief) -> Vec<Step> {
    let scores = greedy_score(belief, scenario.overlook());
    let mut steps: Vec<Step> = (0..scenario.n_states())
        .filter(|&s| 1.0 - scores[s] > EVIDENCE_TOL)
        .map(Step::Search)
        .collect();
    if scenario.no_active_prob() > 0.0 {
        steps.push(Step::Idle);
    }
    steps
}

/// Player `player`'s continuation value at `h` if it searches `action` there
/// and play is greedy from the next period on. Fails with `ContractViolation`
/// unless the profile is certified greedy after `h`.
pub fn one_shot_deviation_value(
    scenario: &SearchScenario,
    profile: &StrategyProfile,
    h: &History,
    player: usize,
    action: usize,
) -> Result<f64, AnalysisError> {
    scenario.check_state(action)?;
    let belief = belief_at_history(scenario, h)?;
    let certifier = GreedyCertifier::new(scenario, profile);
    for step in feasible_steps(scenario, &belief) {
        let child = h.extended(step);
        if !certifier.all_certified(Some(&child)) {
            return Err(AnalysisError::ContractViolation(format!(
                "continuation after history {h} via {child} is not certified greedy"
            )));
        }
    }
    let scores = greedy_score(&belief, scenario.overlook());
    let acts = player_actions(scenario, profile, Some(h), &belief);
    let g = opponent_immediate(scenario, &acts, &scores, player);
    Ok(closed_form_deviation_value(
        scenario.players()[player].q,
        scenario.no_active_prob(),
        scores[action],
        g,
    ))
}

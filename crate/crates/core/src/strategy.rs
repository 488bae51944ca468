//! Behavior strategies: maps from public histories to mixed actions.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{belief_at_history, Belief, History, ModelError, SearchScenario, STOCHASTIC_TOL};

/// Scores closer than this to the maximum count as ties when a greedy rule picks an action.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("invalid mixed action: {0}")]
    InvalidMixedAction(String),
    #[error("profile lists player {0}, which is not in the scenario")]
    UnknownPlayer(u32),
    #[error("profile has no strategy for player {0}")]
    MissingPlayer(u32),
    #[error("profile lists player {0} twice")]
    DuplicatePlayer(u32),
    #[error("tie-break order must be a permutation of 1..={0}")]
    BadPreferenceOrder(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Probability distribution over the state to search.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedAction(Vec<f64>);

impl MixedAction {
    pub fn new(probs: Vec<f64>) -> Result<Self, StrategyError> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(StrategyError::InvalidMixedAction(format!("negative entry in {probs:?}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(StrategyError::InvalidMixedAction(format!("{probs:?} sums to {sum}")));
        }
        Ok(MixedAction(probs))
    }

    pub fn pure(n: usize, state: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[state] = 1.0;
        MixedAction(probs)
    }

    /// Uniform over `states`, which must be non-empty.
    pub fn uniform_over(n: usize, states: &[usize]) -> Self {
        let w = 1.0 / states.len() as f64;
        let mut probs = vec![0.0; n];
        for &s in states {
            probs[s] = w;
        }
        MixedAction(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `(state, probability)` for every state with positive probability.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0.iter().copied().enumerate().filter(|(_, p)| *p > 0.0)
    }

    pub fn as_pure(&self) -> Option<usize> {
        let mut support = self.support();
        match (support.next(), support.next()) {
            (Some((s, _)), None) => Some(s),
            _ => None,
        }
    }

    /// Probability of an immediate find given `scores` from [`greedy_score`].
    pub fn find_prob(&self, scores: &[f64]) -> f64 {
        self.support().map(|(s, p)| p * scores[s]).sum()
    }
}

/// Immediate find probability of each state, `z(s)·(1 − δ_s)`.
pub fn greedy_score(z: &Belief, overlook: &[f64]) -> Vec<f64> {
    z.probs().iter().zip(overlook).map(|(p, d)| p * (1.0 - d)).collect()
}

/// States whose score is within `tol` of the maximum.
pub fn argmax_set(scores: &[f64], tol: f64) -> Vec<usize> {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..scores.len()).filter(|&s| scores[s] >= best - tol).collect()
}

/// Selection rule among equally good states.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LowestIndex,
    HighestIndex,
    UniformOverArgmax,
    /// States in order of preference (0-based); must list every state.
    Fixed(Vec<usize>),
}

impl TieBreak {
    pub fn check(&self, n: usize) -> Result<(), StrategyError> {
        if let TieBreak::Fixed(order) = self {
            let mut seen = vec![false; n];
            for &s in order {
                if s >= n || seen[s] {
                    return Err(StrategyError::BadPreferenceOrder(n));
                }
                seen[s] = true;
            }
            if order.len() != n {
                return Err(StrategyError::BadPreferenceOrder(n));
            }
        }
        Ok(())
    }

    fn select(&self, n: usize, ties: &[usize]) -> MixedAction {
        match self {
            TieBreak::LowestIndex => MixedAction::pure(n, ties[0]),
            TieBreak::HighestIndex => MixedAction::pure(n, ties[ties.len() - 1]),
            TieBreak::UniformOverArgmax => MixedAction::uniform_over(n, ties),
            TieBreak::Fixed(order) => {
                let s = order.iter().copied().find(|s| ties.contains(s)).unwrap_or(ties[0]);
                MixedAction::pure(n, s)
            }
        }
    }
}

/// Largest-score action under `tie`.
pub fn greedy_action(z: &Belief, overlook: &[f64], tie: &TieBreak) -> MixedAction {
    let scores = greedy_score(z, overlook);
    tie.select(z.len(), &argmax_set(&scores, TIE_TOL))
}

/// What a strategy sees when asked to move.
pub struct Decision<'a> {
    pub scenario: &'a SearchScenario,
    pub history: &'a History,
    pub belief: &'a Belief,
}

/// Extension point for strategies not covered by the built-in kinds.
pub trait StrategyRule: Send + Sync + fmt::Debug {
    fn act(&self, decision: &Decision<'_>) -> MixedAction;

    /// True when the rule ignores the history beyond the belief.
    fn is_history_free(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "custom".into()
    }
}

/// Searches the most likely state, ignoring overlook probabilities.
#[derive(Debug, Clone, Default)]
pub struct BeliefMax(pub TieBreak);

impl StrategyRule for BeliefMax {
    fn act(&self, d: &Decision<'_>) -> MixedAction {
        self.0.select(d.belief.len(), &argmax_set(d.belief.probs(), TIE_TOL))
    }

    fn is_history_free(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "belief_max".into()
    }
}

/// Behavior for histories a script does not list.
#[derive(Debug, Clone, PartialEq)]
pub enum DefaultRule {
    Greedy(TieBreak),
    Fixed(MixedAction),
    Uniform,
}

/// Explicit per-history actions plus a default rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    entries: HashMap<History, MixedAction>,
    prefixes: HashSet<History>,
    default: DefaultRule,
}

impl Script {
    pub fn new(entries: impl IntoIterator<Item = (History, MixedAction)>, default: DefaultRule) -> Self {
        let entries: HashMap<_, _> = entries.into_iter().collect();
        let mut prefixes = HashSet::new();
        for h in entries.keys() {
            let mut p = h.clone();
            loop {
                prefixes.insert(p.clone());
                if p.pop().is_none() {
                    break;
                }
            }
        }
        Script { entries, prefixes, default }
    }

    pub fn entries(&self) -> &HashMap<History, MixedAction> {
        &self.entries
    }

    /// Entries sorted in shortlex order of their histories.
    pub fn sorted_entries(&self) -> Vec<(&History, &MixedAction)> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by(|a, b| a.0.shortlex_cmp(b.0));
        v
    }

    pub fn default_rule(&self) -> &DefaultRule {
        &self.default
    }

    /// True when some entry's history extends (or equals) `h`.
    pub fn covers_extensions_of(&self, h: &History) -> bool {
        self.prefixes.contains(h)
    }
}

/// A strategy for one player.
#[derive(Debug, Clone)]
pub enum Strategy {
    Greedy(TieBreak),
    Scripted(Script),
    UniformRandom,
    Custom(Arc<dyn StrategyRule>),
}

impl Strategy {
    pub fn greedy() -> Self {
        Strategy::Greedy(TieBreak::LowestIndex)
    }

    /// Searches `state` at every history.
    pub fn always(n: usize, state: usize) -> Self {
        Strategy::Scripted(Script::new([], DefaultRule::Fixed(MixedAction::pure(n, state))))
    }

    pub fn custom(rule: impl StrategyRule + 'static) -> Self {
        Strategy::Custom(Arc::new(rule))
    }

    pub fn kind_name(&self) -> String {
        match self {
            Strategy::Greedy(_) => "greedy".into(),
            Strategy::Scripted(_) => "scripted".into(),
            Strategy::UniformRandom => "uniform".into(),
            Strategy::Custom(rule) => rule.name(),
        }
    }

    pub fn act(&self, d: &Decision<'_>) -> MixedAction {
        let n = d.belief.len();
        match self {
            Strategy::Greedy(tie) => greedy_action(d.belief, d.scenario.overlook(), tie),
            Strategy::UniformRandom => MixedAction(vec![1.0 / n as f64; n]),
            Strategy::Custom(rule) => rule.act(d),
            Strategy::Scripted(script) => match script.entries.get(d.history) {
                Some(a) => a.clone(),
                None => match &script.default {
                    DefaultRule::Greedy(tie) => greedy_action(d.belief, d.scenario.overlook(), tie),
                    DefaultRule::Fixed(a) => a.clone(),
                    DefaultRule::Uniform => MixedAction(vec![1.0 / n as f64; n]),
                },
            },
        }
    }

    /// Action at a node whose history is no longer tracked. Only meaningful
    /// once [`Strategy::is_history_free_from`] holds there.
    pub fn act_history_free(&self, scenario: &SearchScenario, belief: &Belief) -> MixedAction {
        let empty = History::empty();
        let d = Decision { scenario, history: &empty, belief };
        match self {
            Strategy::Scripted(script) => {
                let n = belief.len();
                match &script.default {
                    DefaultRule::Greedy(tie) => greedy_action(belief, scenario.overlook(), tie),
                    DefaultRule::Fixed(a) => a.clone(),
                    DefaultRule::Uniform => MixedAction(vec![1.0 / n as f64; n]),
                }
            }
            other => other.act(&d),
        }
    }

    /// True when play at `h` and every extension depends on the belief only.
    pub fn is_history_free_from(&self, h: &History) -> bool {
        match self {
            Strategy::Greedy(_) | Strategy::UniformRandom => true,
            Strategy::Custom(rule) => rule.is_history_free(),
            Strategy::Scripted(script) => !script.covers_extensions_of(h),
        }
    }

    /// True when the strategy plays greedily at every history where the
    /// script does not intervene, i.e. the greedy rule is the fallback.
    pub fn has_greedy_fallback(&self) -> bool {
        match self {
            Strategy::Greedy(_) => true,
            Strategy::Scripted(script) => matches!(script.default, DefaultRule::Greedy(_)),
            _ => false,
        }
    }

    fn check(&self, n: usize) -> Result<(), StrategyError> {
        let check_action = |a: &MixedAction| {
            if a.len() == n {
                Ok(())
            } else {
                Err(StrategyError::InvalidMixedAction(format!("expected {n} entries, got {}", a.len())))
            }
        };
        match self {
            Strategy::Greedy(tie) => tie.check(n),
            Strategy::Scripted(script) => {
                for (h, a) in &script.entries {
                    check_action(a)?;
                    for step in h.steps() {
                        if let crate::model::Step::Search(s) = step {
                            if *s >= n {
                                return Err(ModelError::StateOutOfRange { state: *s, n }.into());
                            }
                        }
                    }
                }
                match &script.default {
                    DefaultRule::Greedy(tie) => tie.check(n),
                    DefaultRule::Fixed(a) => check_action(a),
                    DefaultRule::Uniform => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }
}

/// One strategy per player, in the scenario's player order.
#[derive(Debug, Clone)]
pub struct StrategyProfile {
    ids: Vec<u32>,
    strategies: Vec<Strategy>,
}

impl StrategyProfile {
    /// Matches `assignments` against the scenario's players.
    pub fn new(scenario: &SearchScenario, assignments: Vec<(u32, Strategy)>) -> Result<Self, StrategyError> {
        for (k, (id, _)) in assignments.iter().enumerate() {
            if scenario.player_index(*id).is_none() {
                return Err(StrategyError::UnknownPlayer(*id));
            }
            if assignments[..k].iter().any(|(o, _)| o == id) {
                return Err(StrategyError::DuplicatePlayer(*id));
            }
        }
        let mut slots: Vec<Option<Strategy>> = vec![None; scenario.players().len()];
        for (id, s) in assignments {
            s.check(scenario.n_states())?;
            slots[scenario.player_index(id).unwrap()] = Some(s);
        }
        let ids: Vec<u32> = scenario.players().iter().map(|p| p.id).collect();
        let strategies = slots
            .into_iter()
            .zip(&ids)
            .map(|(s, id)| s.ok_or(StrategyError::MissingPlayer(*id)))
            .collect::<Result<_, _>>()?;
        Ok(StrategyProfile { ids, strategies })
    }

    /// Every player uses `strategy`.
    pub fn uniform(scenario: &SearchScenario, strategy: Strategy) -> Self {
        let ids: Vec<u32> = scenario.players().iter().map(|p| p.id).collect();
        let strategies = vec![strategy; ids.len()];
        StrategyProfile { ids, strategies }
    }

    pub fn all_greedy(scenario: &SearchScenario) -> Self {
        Self::uniform(scenario, Strategy::greedy())
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    pub fn strategy(&self, index: usize) -> &Strategy {
        &self.strategies[index]
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    /// Replaces the strategy of the player at `index`.
    pub fn with_strategy(&self, index: usize, strategy: Strategy) -> Self {
        let mut p = self.clone();
        p.strategies[index] = strategy;
        p
    }

    pub fn is_history_free_from(&self, h: &History) -> bool {
        self.strategies.iter().all(|s| s.is_history_free_from(h))
    }
}

/// True iff `strategy` puts mass at least `1 − tol` on the greedy argmax at `h`.
pub fn is_greedy_at(strategy: &Strategy, scenario: &SearchScenario, h: &History, tol: f64) -> Result<bool, ModelError> {
    let belief = belief_at_history(scenario, h)?;
    Ok(is_greedy_action(strategy, scenario, h, &belief, tol))
}

pub(crate) fn is_greedy_action(strategy: &Strategy, scenario: &SearchScenario, h: &History, belief: &Belief, tol: f64) -> bool {
    let action = strategy.act(&Decision { scenario, history: h, belief });
    mass_on_argmax(&action, belief, scenario.overlook(), tol) >= 1.0 - tol
}

pub(crate) fn mass_on_argmax(action: &MixedAction, belief: &Belief, overlook: &[f64], tol: f64) -> f64 {
    let scores = greedy_score(belief, overlook);
    argmax_set(&scores, tol).into_iter().map(|s| action.probs()[s]).sum()
}

use std::collections::VecDeque;

use crate::model::{belief_at_history, Belief, History, SearchScenario, Step, DERIVED_TOL};
use crate::strategy::{greedy_score, StrategyProfile};

use super::deviation::{closed_form_deviation_value, feasible_steps, opponent_immediate, GreedyCertifier};
use super::exact::{player_actions, Evaluator};
use super::{AnalysisError, DEFAULT_NODE_LIMIT, DEFAULT_PRUNE_BELOW};

#[derive(Debug, Clone, PartialEq)]
pub struct SpeOptions {
    /// Histories of length `< depth` are checked.
    pub depth: usize,
    /// Periods used to evaluate continuations that are not certified greedy.
    /// With `finite_game` this is the total length of the game instead.
    pub horizon: usize,
    pub tol: f64,
    /// Treat the game as ending after `horizon` periods.
    pub finite_game: bool,
    pub node_limit: usize,
}

impl SpeOptions {
    pub fn new(depth: usize, horizon: usize) -> Self {
        SpeOptions {
            depth,
            horizon,
            tol: DERIVED_TOL,
            finite_game: false,
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeviationMethod {
    /// Continuations valued exactly at `q_i / (1 − r)`.
    ClosedForm,
    /// Continuations computed over `horizon` periods, accurate to `error_bound`.
    Truncated { horizon: usize, error_bound: f64 },
}

/// Best one-shot deviation of one player at one history.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerGain {
    pub player_index: usize,
    pub player_id: u32,
    pub action: usize,
    /// `u_i(σ'_i, σ_−i)(h) − u_i(σ)(h)` for the best pure deviation.
    pub gain: f64,
    pub method: DeviationMethod,
}

impl PlayerGain {
    fn error_bound(&self) -> f64 {
        match self.method {
            DeviationMethod::ClosedForm => 0.0,
            DeviationMethod::Truncated { error_bound, .. } => error_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationFinding {
    pub history: History,
    pub player_index: usize,
    pub player_id: u32,
    pub action: usize,
    pub gain: f64,
    pub method: DeviationMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpeVerdict {
    Pass,
    /// The first profitable deviation in shortlex order of histories.
    Deviation(DeviationFinding),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeReport {
    pub verdict: SpeVerdict,
    /// Every profitable deviation found, in shortlex order.
    pub findings: Vec<DeviationFinding>,
    pub histories_checked: usize,
    /// Largest error bound used by any truncated comparison.
    pub max_error_bound: f64,
}

impl SpeReport {
    pub fn passed(&self) -> bool {
        self.verdict == SpeVerdict::Pass
    }

    pub fn finding_at(&self, h: &History, player_index: usize) -> Option<&DeviationFinding> {
        self.findings.iter().find(|f| &f.history == h && f.player_index == player_index)
    }
}

struct ChildValue {
    values: Vec<f64>,
    error: f64,
    closed_form: bool,
}

struct Checker<'a> {
    scenario: &'a SearchScenario,
    profile: &'a StrategyProfile,
    certifier: GreedyCertifier,
    opts: &'a SpeOptions,
}

impl Checker<'_> {
    fn child_value(&self, child: &History, belief: Belief) -> Result<ChildValue, AnalysisError> {
        let n_players = self.scenario.players().len();
        if self.opts.finite_game {
            let remaining = self.opts.horizon.saturating_sub(child.len());
            if remaining == 0 {
                return Ok(ChildValue { values: vec![0.0; n_players], error: 0.0, closed_form: false });
            }
            let eval = Evaluator {
                node_limit: self.opts.node_limit,
                prune_below: 0.0,
                ..Evaluator::new(self.scenario, self.profile)
            }
            .run(child, belief, remaining)?;
            // the game ends at the horizon, so unfound mass is worth nothing
            return Ok(ChildValue { values: eval.values(), error: eval.dropped, closed_form: false });
        }
        if self.certifier.all_certified(Some(child)) {
            return Ok(ChildValue {
                values: self.certifier.continuation_values().to_vec(),
                error: 0.0,
                closed_form: true,
            });
        }
        let eval = Evaluator {
            closure: Some(&self.certifier),
            node_limit: self.opts.node_limit,
            prune_below: DEFAULT_PRUNE_BELOW,
            ..Evaluator::new(self.scenario, self.profile)
        }
        .run(child, belief, self.opts.horizon)?;
        Ok(ChildValue { values: eval.values(), error: eval.residual(), closed_form: false })
    }

    fn gains_at(&self, h: &History, belief: &Belief) -> Result<(Vec<Step>, Vec<PlayerGain>), AnalysisError> {
        let sc = self.scenario;
        let n = sc.n_states();
        let period = h.period();
        let steps = feasible_steps(sc, belief);

        let mut children: Vec<Option<ChildValue>> = (0..n).map(|_| None).collect();
        for &step in &steps {
            if let Step::Search(s) = step {
                let z = sc.advance(belief, step, period)?;
                children[s] = Some(self.child_value(&h.extended(step), z)?);
            }
        }
        let idle_closed = !steps.contains(&Step::Idle) || self.certifier.all_certified(Some(&h.extended(Step::Idle)));
        let all_closed = idle_closed && children.iter().flatten().all(|c| c.closed_form);
        let error = children.iter().flatten().map(|c| c.error).fold(0.0, f64::max);

        let scores = greedy_score(belief, sc.overlook());
        let acts = player_actions(sc, self.profile, Some(h), belief);
        let r = sc.no_active_prob();

        let mut gains = Vec::with_capacity(acts.len());
        for (i, player) in sc.players().iter().enumerate() {
            // payoff to i, given i is active and searches s
            let outcome: Vec<f64> = if all_closed && !self.opts.finite_game {
                let g = opponent_immediate(sc, &acts, &scores, i);
                (0..n).map(|s| closed_form_deviation_value(player.q, r, scores[s], g)).collect()
            } else {
                (0..n)
                    .map(|s| scores[s] + (1.0 - scores[s]) * children[s].as_ref().map_or(0.0, |c| c.values[i]))
                    .collect()
            };
            let current: f64 = acts[i].support().map(|(s, p)| p * outcome[s]).sum();
            let (best, best_outcome) = outcome
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (s, v)| if v > acc.1 { (s, v) } else { acc });
            let scale = if all_closed && !self.opts.finite_game { 1.0 } else { player.q };
            let method = if all_closed && !self.opts.finite_game {
                DeviationMethod::ClosedForm
            } else {
                DeviationMethod::Truncated { horizon: self.opts.horizon, error_bound: error }
            };
            gains.push(PlayerGain {
                player_index: i,
                player_id: player.id,
                action: best,
                gain: scale * (best_outcome - current),
                method,
            });
        }
        Ok((steps, gains))
    }
}

/// Best one-shot deviation gain of every player at `h`.
pub fn deviation_gains_at(
    scenario: &SearchScenario,
    profile: &StrategyProfile,
    h: &History,
    opts: &SpeOptions,
) -> Result<Vec<PlayerGain>, AnalysisError> {
    let belief = belief_at_history(scenario, h)?;
    let checker = Checker {
        scenario,
        profile,
        certifier: GreedyCertifier::new(scenario, profile),
        opts,
    };
    Ok(checker.gains_at(h, &belief)?.1)
}

/// One-shot deviation check at every nature-feasible history shorter than `opts.depth`.
///
/// A deviation counts as profitable when its gain exceeds `tol` plus the
/// error bound of the comparison.
pub fn verify_spe(scenario: &SearchScenario, profile: &StrategyProfile, opts: &SpeOptions) -> Result<SpeReport, AnalysisError> {
    if opts.horizon == 0 {
        return Err(AnalysisError::InvalidArgument("horizon must be at least 1".into()));
    }
    let checker = Checker {
        scenario,
        profile,
        certifier: GreedyCertifier::new(scenario, profile),
        opts,
    };
    let max_len = if opts.finite_game { opts.depth.min(opts.horizon) } else { opts.depth };

    let mut findings = Vec::new();
    let mut checked = 0;
    let mut max_error: f64 = 0.0;
    let mut queue = VecDeque::new();
    if max_len > 0 {
        queue.push_back((History::empty(), scenario.initial().clone()));
    }
    while let Some((h, belief)) = queue.pop_front() {
        checked += 1;
        let (steps, gains) = checker.gains_at(&h, &belief)?;
        for g in gains {
            max_error = max_error.max(g.error_bound());
            if g.gain > opts.tol + g.error_bound() {
                findings.push(DeviationFinding {
                    history: h.clone(),
                    player_index: g.player_index,
                    player_id: g.player_id,
                    action: g.action,
                    gain: g.gain,
                    method: g.method,
                });
            }
        }
        if h.len() + 1 < max_len {
            for step in steps {
                let z = scenario.advance(&belief, step, h.period())?;
                queue.push_back((h.extended(step), z));
            }
        }
    }

    let verdict = findings.first().cloned().map_or(SpeVerdict::Pass, SpeVerdict::Deviation);
    Ok(SpeReport {
        verdict,
        findings,
        histories_checked: checked,
        max_error_bound: max_error,
    })
}

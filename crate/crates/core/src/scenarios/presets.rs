//! Built-in games: the two-state chain, the two-period counterexample and two demos.

use thiserror::Error;

use crate::model::{validate_scenario, History, ModelError, Player, ScenarioSpec, SearchScenario, TailRule};
use crate::strategy::{BeliefMax, DefaultRule, MixedAction, Script, Strategy, StrategyProfile, TieBreak};

pub const TWO_STATE_DEFAULT_C: f64 = 0.2;
pub const FIG2_DEFAULT_EPS: f64 = 0.001;
/// Activation probability of the dominant player in the built-in games.
pub const DOMINANT_Q: f64 = 0.99;
pub const MINOR_Q: f64 = 0.01;

pub const PRESET_NAMES: &[&str] = &["two_state(c)", "two_state_half", "fig2(eps)", "overlook_demo", "no_active_demo"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresetError {
    #[error("UnknownPreset: {0:?} (known: two_state(c), two_state_half, fig2(eps), overlook_demo, no_active_demo)")]
    UnknownPreset(String),
    #[error("invalid preset parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub scenario: SearchScenario,
    /// Named profiles worth trying on this scenario; the first is all-greedy.
    pub profiles: Vec<(String, StrategyProfile)>,
}

impl Preset {
    pub fn profile(&self, name: &str) -> Option<&StrategyProfile> {
        self.profiles.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }
}

fn two_players(q1: f64, q2: f64) -> Vec<Player> {
    vec![Player { id: 1, q: q1 }, Player { id: 2, q: q2 }]
}

/// Two states, `π = (c, 1 − c)`, `P = [[c, 1 − c], [1, 0]]`, `q = (0.99, 0.01)`.
pub fn two_state(c: f64) -> Result<SearchScenario, PresetError> {
    if !(c > 0.0 && c < 1.0) {
        return Err(PresetError::InvalidParameter(format!("c = {c} must lie in (0, 1)")));
    }
    Ok(validate_scenario(ScenarioSpec {
        n_states: 2,
        initial: vec![c, 1.0 - c],
        matrices: vec![vec![vec![c, 1.0 - c], vec![1.0, 0.0]]],
        tail_rule: TailRule::RepeatLast,
        players: two_players(DOMINANT_Q, MINOR_Q),
        overlook: None,
        no_active_prob: 0.0,
    })?)
}

/// Largest ε with `0.99·(2/3 + 3ε) <= 2/3`.
pub fn fig2_eps_limit() -> f64 {
    (2.0 / 3.0 / DOMINANT_Q - 2.0 / 3.0) / 3.0
}

/// Three states with `π = (1/3 + ε, 1/3 + 2ε, 1/3 − 3ε)`; 1 and 3 are absorbing, 2 moves to 1.
pub fn fig2(eps: f64) -> Result<SearchScenario, PresetError> {
    if !(eps > 0.0 && eps <= fig2_eps_limit()) {
        return Err(PresetError::InvalidParameter(format!(
            "eps = {eps} must lie in (0, {}]",
            fig2_eps_limit()
        )));
    }
    let third = 1.0 / 3.0;
    Ok(validate_scenario(ScenarioSpec {
        n_states: 3,
        initial: vec![third + eps, third + 2.0 * eps, third - 3.0 * eps],
        matrices: vec![vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]],
        tail_rule: TailRule::RepeatLast,
        players: two_players(DOMINANT_Q, MINOR_Q),
        overlook: None,
        no_active_prob: 0.0,
    })?)
}

/// Two states where overlooking flips the greedy choice away from the most likely state.
pub fn overlook_demo() -> SearchScenario {
    validate_scenario(ScenarioSpec {
        n_states: 2,
        initial: vec![0.4, 0.6],
        matrices: vec![vec![vec![0.2, 0.8], vec![0.6, 0.4]]],
        tail_rule: TailRule::RepeatLast,
        players: two_players(0.7, 0.3),
        overlook: Some(vec![0.0, 0.5]),
        no_active_prob: 0.0,
    })
    .expect("overlook demo is valid")
}

/// The two-state chain at `c = 0.2` where nobody is active with probability 0.3.
pub fn no_active_demo() -> SearchScenario {
    let c = TWO_STATE_DEFAULT_C;
    validate_scenario(ScenarioSpec {
        n_states: 2,
        initial: vec![c, 1.0 - c],
        matrices: vec![vec![vec![c, 1.0 - c], vec![1.0, 0.0]]],
        tail_rule: TailRule::RepeatLast,
        players: two_players(0.35, 0.35),
        overlook: None,
        no_active_prob: 0.3,
    })
    .expect("no-active demo is valid")
}

/// Greedy for every player, each with its own tie-break.
pub fn greedy_profile(scenario: &SearchScenario, ties: &[TieBreak]) -> StrategyProfile {
    let assignments = scenario
        .players()
        .iter()
        .zip(ties.iter().cycle())
        .map(|(p, t)| (p.id, Strategy::Greedy(t.clone())))
        .collect();
    StrategyProfile::new(scenario, assignments).expect("ids come from the scenario")
}

fn parse_call<'a>(name: &'a str, func: &str) -> Option<Option<&'a str>> {
    let rest = name.strip_prefix(func)?;
    if rest.is_empty() {
        return Some(None);
    }
    rest.strip_prefix('(')?.strip_suffix(')').map(|arg| Some(arg.trim()))
}

fn parse_param(arg: &str) -> Result<f64, PresetError> {
    super::document::parse_probability(arg).map_err(PresetError::InvalidParameter)
}

/// Looks up a built-in game by name, e.g. `two_state(0.2)` or `fig2`.
pub fn preset(name: &str) -> Result<Preset, PresetError> {
    let name = name.trim();
    if name == "two_state_half" {
        return two_state_preset(0.5, "two_state_half".into());
    }
    if name == "overlook_demo" {
        let scenario = overlook_demo();
        let profiles = vec![
            ("greedy".to_string(), StrategyProfile::all_greedy(&scenario)),
            (
                "belief_max".to_string(),
                StrategyProfile::uniform(&scenario, Strategy::custom(BeliefMax(TieBreak::LowestIndex))),
            ),
        ];
        return Ok(Preset {
            name: name.into(),
            description: "overlooking in state 2 (0.5) makes state 1 the greedy first search".into(),
            scenario,
            profiles,
        });
    }
    if name == "no_active_demo" {
        let scenario = no_active_demo();
        let profiles = vec![("greedy".to_string(), StrategyProfile::all_greedy(&scenario))];
        return Ok(Preset {
            name: name.into(),
            description: "two-state chain, q = (0.35, 0.35), nobody active with probability 0.3".into(),
            scenario,
            profiles,
        });
    }
    if let Some(arg) = parse_call(name, "two_state") {
        let c = arg.map(parse_param).transpose()?.unwrap_or(TWO_STATE_DEFAULT_C);
        return two_state_preset(c, format!("two_state({c})"));
    }
    if let Some(arg) = parse_call(name, "fig2") {
        let eps = arg.map(parse_param).transpose()?.unwrap_or(FIG2_DEFAULT_EPS);
        let scenario = fig2(eps)?;
        // state 3 first, then the greedy default (state 1 once 3 has failed)
        let deviation = Strategy::Scripted(Script::new(
            [(History::empty(), MixedAction::pure(3, 2))],
            DefaultRule::Greedy(TieBreak::LowestIndex),
        ));
        let profiles = vec![
            ("greedy".to_string(), StrategyProfile::all_greedy(&scenario)),
            (
                "p1_state3_then_greedy".to_string(),
                StrategyProfile::new(&scenario, vec![(1, deviation), (2, Strategy::greedy())]).expect("valid"),
            ),
        ];
        return Ok(Preset {
            name: format!("fig2({eps})"),
            description: "three-state two-period counterexample to greedy play in finite games".into(),
            scenario,
            profiles,
        });
    }
    Err(PresetError::UnknownPreset(name.into()))
}

fn two_state_preset(c: f64, name: String) -> Result<Preset, PresetError> {
    let scenario = two_state(c)?;
    let profiles = vec![
        ("greedy".to_string(), StrategyProfile::all_greedy(&scenario)),
        (
            "greedy_highest".to_string(),
            StrategyProfile::uniform(&scenario, Strategy::Greedy(TieBreak::HighestIndex)),
        ),
        (
            "p2_always_state1".to_string(),
            StrategyProfile::new(&scenario, vec![(1, Strategy::greedy()), (2, Strategy::always(2, 0))]).expect("valid"),
        ),
    ];
    Ok(Preset {
        name,
        description: "two states; state 1 stays with probability c, state 2 always moves to 1".into(),
        scenario,
        profiles,
    })
}

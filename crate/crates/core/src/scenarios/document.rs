//! JSON documents for scenarios and strategy profiles (`schema_version = 1`).
//!
//! States are numbered from 1. Probabilities may be JSON numbers, decimal
//! strings or exact ratios such as `"1/3"`. A history entry of `null` marks a
//! period in which nobody was active.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::model::{validate_scenario, History, ModelError, Player, ScenarioSpec, SearchScenario, Step, TailRule};
use crate::strategy::{DefaultRule, MixedAction, Script, Strategy, StrategyError, StrategyProfile, TieBreak};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocumentError {
    #[error("SyntaxError at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("SchemaError at {context}: {message}")]
    Schema { context: String, message: String },
    #[error("ValidationError: {0}")]
    Validation(#[from] ModelError),
    #[error("cannot serialize: {0}")]
    Unserializable(String),
}

impl DocumentError {
    fn schema(context: impl Into<String>, message: impl Into<String>) -> Self {
        DocumentError::Schema {
            context: context.into(),
            message: message.into(),
        }
    }
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, DocumentError> {
    serde_json::from_str(text).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => DocumentError::schema(format!("line {}, column {}", e.line(), e.column()), e.to_string()),
            _ => DocumentError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
        }
    })
}

/// Parses `"0.25"`, `"1e-3"` or `"1/3"`.
pub fn parse_probability(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let num: u64 = num.trim().parse().map_err(|_| format!("bad numerator in {text:?}"))?;
            let den: u64 = den.trim().parse().map_err(|_| format!("bad denominator in {text:?}"))?;
            if den == 0 {
                return Err(format!("zero denominator in {text:?}"));
            }
            num as f64 / den as f64
        }
        None => text.parse::<f64>().map_err(|_| format!("not a probability: {text:?}"))?,
    };
    if !value.is_finite() || value < 0.0 {
        return Err(format!("not a probability: {text:?}"));
    }
    Ok(value)
}

/// A probability as written in a document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prob(pub f64);

impl Serialize for Prob {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Prob {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ProbVisitor;
        impl Visitor<'_> for ProbVisitor {
            type Value = Prob;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a probability as a number, decimal string or \"p/q\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Prob, E> {
                Ok(Prob(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Prob, E> {
                Ok(Prob(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Prob, E> {
                Ok(Prob(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Prob, E> {
                parse_probability(v).map(Prob).map_err(E::custom)
            }
        }
        d.deserialize_any(ProbVisitor)
    }
}

fn probs(v: &[Prob]) -> Vec<f64> {
    v.iter().map(|p| p.0).collect()
}

fn to_probs(v: &[f64]) -> Vec<Prob> {
    v.iter().copied().map(Prob).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRuleDoc {
    #[default]
    RepeatLast,
    CycleAll,
    Identity,
}

impl From<TailRuleDoc> for TailRule {
    fn from(t: TailRuleDoc) -> Self {
        match t {
            TailRuleDoc::RepeatLast => TailRule::RepeatLast,
            TailRuleDoc::CycleAll => TailRule::CycleAll,
            TailRuleDoc::Identity => TailRule::Identity,
        }
    }
}

impl From<TailRule> for TailRuleDoc {
    fn from(t: TailRule) -> Self {
        match t {
            TailRule::RepeatLast => TailRuleDoc::RepeatLast,
            TailRule::CycleAll => TailRuleDoc::CycleAll,
            TailRule::Identity => TailRuleDoc::Identity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionsDoc {
    pub matrices: Vec<Vec<Vec<Prob>>>,
    #[serde(default)]
    pub tail_rule: TailRuleDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerDoc {
    pub id: u32,
    pub q: Prob,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub schema_version: u32,
    pub n_states: usize,
    pub initial: Vec<Prob>,
    pub transitions: TransitionsDoc,
    pub players: Vec<PlayerDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlook: Option<Vec<Prob>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_active_prob: Option<Prob>,
    #[serde(default)]
    pub metadata: Metadata,
}

impl ScenarioDocument {
    /// Canonical document for `scenario`.
    pub fn from_scenario(scenario: &SearchScenario, metadata: Metadata) -> Self {
        let spec = scenario.to_spec();
        ScenarioDocument {
            schema_version: SCHEMA_VERSION,
            n_states: spec.n_states,
            initial: to_probs(&spec.initial),
            transitions: TransitionsDoc {
                matrices: spec
                    .matrices
                    .iter()
                    .map(|m| m.iter().map(|row| to_probs(row)).collect())
                    .collect(),
                tail_rule: spec.tail_rule.into(),
            },
            players: spec.players.iter().map(|p| PlayerDoc { id: p.id, q: Prob(p.q) }).collect(),
            overlook: spec.overlook.as_deref().map(to_probs),
            no_active_prob: Some(Prob(spec.no_active_prob)),
            metadata,
        }
    }

    pub fn to_scenario(&self) -> Result<SearchScenario, DocumentError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(DocumentError::schema(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let spec = ScenarioSpec {
            n_states: self.n_states,
            initial: probs(&self.initial),
            matrices: self
                .transitions
                .matrices
                .iter()
                .map(|m| m.iter().map(|row| probs(row)).collect())
                .collect(),
            tail_rule: self.transitions.tail_rule.into(),
            players: self.players.iter().map(|p| Player { id: p.id, q: p.q.0 }).collect(),
            overlook: self.overlook.as_deref().map(probs),
            no_active_prob: self.no_active_prob.map_or(0.0, |p| p.0),
        };
        Ok(validate_scenario(spec)?)
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }
}

pub fn parse_scenario_document(text: &str) -> Result<ScenarioDocument, DocumentError> {
    from_json(text)
}

pub fn parse_scenario(text: &str) -> Result<SearchScenario, DocumentError> {
    parse_scenario_document(text)?.to_scenario()
}

pub fn serialize_scenario(scenario: &SearchScenario, metadata: Metadata) -> String {
    ScenarioDocument::from_scenario(scenario, metadata).to_text()
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreakDoc {
    #[default]
    LowestIndex,
    HighestIndex,
    UniformOverArgmax,
    /// Preference order over states, 1-based.
    Fixed(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionDoc {
    State(usize),
    Mixed(Vec<Prob>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntryDoc {
    pub history: Vec<Option<usize>>,
    pub action: ActionDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum DefaultDoc {
    Greedy {
        #[serde(default)]
        tie_break: TieBreakDoc,
    },
    Fixed {
        action: ActionDoc,
    },
    Uniform,
}

impl Default for DefaultDoc {
    fn default() -> Self {
        DefaultDoc::Greedy {
            tie_break: TieBreakDoc::LowestIndex,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategyDoc {
    Greedy {
        player: u32,
        #[serde(default)]
        tie_break: TieBreakDoc,
    },
    Scripted {
        player: u32,
        #[serde(default)]
        script: Vec<ScriptEntryDoc>,
        #[serde(default)]
        default: DefaultDoc,
    },
    Uniform {
        player: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    pub schema_version: u32,
    pub strategies: Vec<StrategyDoc>,
}

fn state_from_doc(s: usize, n: usize, ctx: &str) -> Result<usize, DocumentError> {
    if s >= 1 && s <= n {
        Ok(s - 1)
    } else {
        Err(DocumentError::schema(ctx, format!("state {s} is not in 1..={n}")))
    }
}

fn tie_from_doc(t: &TieBreakDoc, n: usize, ctx: &str) -> Result<TieBreak, DocumentError> {
    Ok(match t {
        TieBreakDoc::LowestIndex => TieBreak::LowestIndex,
        TieBreakDoc::HighestIndex => TieBreak::HighestIndex,
        TieBreakDoc::UniformOverArgmax => TieBreak::UniformOverArgmax,
        TieBreakDoc::Fixed(order) => {
            let order = order
                .iter()
                .map(|&s| state_from_doc(s, n, ctx))
                .collect::<Result<Vec<_>, _>>()?;
            let tie = TieBreak::Fixed(order);
            tie.check(n).map_err(|e| DocumentError::schema(ctx, e.to_string()))?;
            tie
        }
    })
}

fn tie_to_doc(t: &TieBreak) -> TieBreakDoc {
    match t {
        TieBreak::LowestIndex => TieBreakDoc::LowestIndex,
        TieBreak::HighestIndex => TieBreakDoc::HighestIndex,
        TieBreak::UniformOverArgmax => TieBreakDoc::UniformOverArgmax,
        TieBreak::Fixed(order) => TieBreakDoc::Fixed(order.iter().map(|s| s + 1).collect()),
    }
}

fn action_from_doc(a: &ActionDoc, n: usize, ctx: &str) -> Result<MixedAction, DocumentError> {
    match a {
        ActionDoc::State(s) => Ok(MixedAction::pure(n, state_from_doc(*s, n, ctx)?)),
        ActionDoc::Mixed(v) => {
            if v.len() != n {
                return Err(DocumentError::schema(ctx, format!("mixed action needs {n} entries, got {}", v.len())));
            }
            MixedAction::new(probs(v)).map_err(|e| DocumentError::schema(ctx, e.to_string()))
        }
    }
}

fn action_to_doc(a: &MixedAction) -> ActionDoc {
    match a.as_pure() {
        Some(s) => ActionDoc::State(s + 1),
        None => ActionDoc::Mixed(to_probs(a.probs())),
    }
}

fn history_from_doc(h: &[Option<usize>], n: usize, ctx: &str) -> Result<History, DocumentError> {
    h.iter()
        .map(|s| match s {
            Some(s) => state_from_doc(*s, n, ctx).map(Step::Search),
            None => Ok(Step::Idle),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(History::from_steps)
}

fn history_to_doc(h: &History) -> Vec<Option<usize>> {
    h.steps()
        .iter()
        .map(|s| match s {
            Step::Search(s) => Some(s + 1),
            Step::Idle => None,
        })
        .collect()
}

impl ProfileDocument {
    pub fn from_profile(profile: &StrategyProfile) -> Result<Self, DocumentError> {
        let strategies = profile
            .ids()
            .iter()
            .zip(profile.strategies())
            .map(|(&player, s)| {
                Ok(match s {
                    Strategy::Greedy(t) => StrategyDoc::Greedy {
                        player,
                        tie_break: tie_to_doc(t),
                    },
                    Strategy::UniformRandom => StrategyDoc::Uniform { player },
                    Strategy::Scripted(script) => StrategyDoc::Scripted {
                        player,
                        script: script
                            .sorted_entries()
                            .into_iter()
                            .map(|(h, a)| ScriptEntryDoc {
                                history: history_to_doc(h),
                                action: action_to_doc(a),
                            })
                            .collect(),
                        default: match script.default_rule() {
                            DefaultRule::Greedy(t) => DefaultDoc::Greedy { tie_break: tie_to_doc(t) },
                            DefaultRule::Fixed(a) => DefaultDoc::Fixed { action: action_to_doc(a) },
                            DefaultRule::Uniform => DefaultDoc::Uniform,
                        },
                    },
                    Strategy::Custom(rule) => {
                        return Err(DocumentError::Unserializable(format!(
                            "player {player} uses custom strategy {}",
                            rule.name()
                        )))
                    }
                })
            })
            .collect::<Result<_, DocumentError>>()?;
        Ok(ProfileDocument {
            schema_version: SCHEMA_VERSION,
            strategies,
        })
    }

    pub fn to_profile(&self, scenario: &SearchScenario) -> Result<StrategyProfile, DocumentError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(DocumentError::schema(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let n = scenario.n_states();
        let mut assignments = Vec::with_capacity(self.strategies.len());
        for (k, doc) in self.strategies.iter().enumerate() {
            let ctx = format!("strategies[{k}]");
            let (player, strategy) = match doc {
                StrategyDoc::Greedy { player, tie_break } => {
                    (*player, Strategy::Greedy(tie_from_doc(tie_break, n, &format!("{ctx}.tie_break"))?))
                }
                StrategyDoc::Uniform { player } => (*player, Strategy::UniformRandom),
                StrategyDoc::Scripted { player, script, default } => {
                    let mut entries = Vec::with_capacity(script.len());
                    for (e, entry) in script.iter().enumerate() {
                        let ectx = format!("{ctx}.script[{e}]");
                        let h = history_from_doc(&entry.history, n, &format!("{ectx}.history"))?;
                        if entries.iter().any(|(o, _): &(History, MixedAction)| *o == h) {
                            return Err(DocumentError::schema(ectx, format!("history {h} listed twice")));
                        }
                        entries.push((h, action_from_doc(&entry.action, n, &format!("{ectx}.action"))?));
                    }
                    let dctx = format!("{ctx}.default");
                    let default = match default {
                        DefaultDoc::Greedy { tie_break } => DefaultRule::Greedy(tie_from_doc(tie_break, n, &dctx)?),
                        DefaultDoc::Fixed { action } => DefaultRule::Fixed(action_from_doc(action, n, &dctx)?),
                        DefaultDoc::Uniform => DefaultRule::Uniform,
                    };
                    (*player, Strategy::Scripted(Script::new(entries, default)))
                }
            };
            assignments.push((player, strategy));
        }
        StrategyProfile::new(scenario, assignments).map_err(|e| match e {
            StrategyError::Model(m) => DocumentError::Validation(m),
            other => DocumentError::schema("strategies", other.to_string()),
        })
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }
}

pub fn parse_profile(text: &str, scenario: &SearchScenario) -> Result<StrategyProfile, DocumentError> {
    from_json::<ProfileDocument>(text)?.to_profile(scenario)
}

pub fn serialize_profile(profile: &StrategyProfile) -> Result<String, DocumentError> {
    Ok(ProfileDocument::from_profile(profile)?.to_text())
}

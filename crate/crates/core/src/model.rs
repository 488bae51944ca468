//! Game description and the Bayesian location filter.
//!
//! States are `0..n` internally. Documents, reports and error messages use
//! 1-based labels, matching how the game is usually written down.

use std::fmt;

use thiserror::Error;

/// Tolerance for probability vectors supplied by the user.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Tolerance for quantities derived through the recursions.
pub const DERIVED_TOL: f64 = 1e-9;
/// A failed search whose likelihood is at most this is treated as impossible.
pub const EVIDENCE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("EmptyPlayerList: a scenario needs at least one player")]
    EmptyPlayerList,
    #[error("ZeroStates: n_states must be positive")]
    ZeroStates,
    #[error("DimensionMismatch at {field}: expected {expected}, got {actual}")]
    DimensionMismatch {
        field: String,
        expected: usize,
        actual: usize,
    },
    #[error("InvalidInitial: {0}")]
    InvalidInitial(String),
    #[error("NonStochasticRow at P_{} row {} (sum {sum}, min entry {min})", .matrix + 1, .row + 1)]
    NonStochasticRow {
        matrix: usize,
        row: usize,
        sum: f64,
        min: f64,
    },
    #[error("EmptySchedule: tail rule {0:?} needs at least one matrix")]
    EmptySchedule(TailRule),
    #[error("NonPositiveActivation: player {id} has q = {q}")]
    NonPositiveActivation { id: u32, q: f64 },
    #[error("DuplicatePlayerId: {0}")]
    DuplicatePlayerId(u32),
    #[error("QSumMismatch: activation probabilities plus no_active_prob sum to {sum}, not 1")]
    QSumMismatch { sum: f64 },
    #[error("NoActiveOutOfRange: no_active_prob = {0} must lie in [0, 1)")]
    NoActiveOutOfRange(f64),
    #[error("OverlookOutOfRange at state {}: {value} is not in [0, 1)", .state + 1)]
    OverlookOutOfRange { state: usize, value: f64 },
    #[error("StateOutOfRange: state {} is not in 1..={n}", .state + 1)]
    StateOutOfRange { state: usize, n: usize },
    #[error("ImpossibleEvidence: failed search at state {} has likelihood {likelihood}", .state + 1)]
    ImpossibleEvidence { state: usize, likelihood: f64 },
    #[error("UnreachableHistory: failed search at state {} after a prefix of length {prefix_len} has probability 0", .state + 1)]
    UnreachableHistory { prefix_len: usize, state: usize },
}

/// Posterior law of the object's location.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief(Vec<f64>);

impl Belief {
    pub fn new(probs: Vec<f64>) -> Result<Self, ModelError> {
        check_probability_vector(&probs, STOCHASTIC_TOL).map_err(ModelError::InvalidInitial)?;
        Ok(Belief(probs))
    }

    /// Point mass on `state`.
    pub fn point(n: usize, state: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[state] = 1.0;
        Belief(probs)
    }

    pub fn uniform(n: usize) -> Self {
        Belief(vec![1.0 / n as f64; n])
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

    pub fn get(&self, state: usize) -> f64 {
        self.0[state]
    }

    /// Bit pattern of the vector; equal keys mean bit-identical beliefs.
    pub(crate) fn key(&self) -> Vec<u64> {
        self.0.iter().map(|p| p.to_bits()).collect()
    }
}

fn check_probability_vector(probs: &[f64], tol: f64) -> Result<(), String> {
    if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
        return Err(format!("entry {} is {p}", i + 1));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(format!("entries sum to {sum}"));
    }
    Ok(())
}

/// Row-stochastic matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    /// Builds a matrix from rows; stochasticity is checked by [`validate_scenario`].
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(ModelError::DimensionMismatch {
                    field: "transition row".into(),
                    expected: n,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(TransitionMatrix { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        TransitionMatrix { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.data[from * self.n..(from + 1) * self.n]
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.data[from * self.n + to]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Row vector times matrix.
    pub fn propagate(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (from, &mass) in z.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (acc, &p) in out.iter_mut().zip(self.row(from)) {
                *acc += mass * p;
            }
        }
        out
    }
}

/// What happens after the explicit list of matrices runs out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailRule {
    #[default]
    RepeatLast,
    CycleAll,
    Identity,
}

impl TailRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            TailRule::RepeatLast => "repeat_last",
            TailRule::CycleAll => "cycle_all",
            TailRule::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "repeat_last" => Some(TailRule::RepeatLast),
            "cycle_all" => Some(TailRule::CycleAll),
            "identity" => Some(TailRule::Identity),
            _ => None,
        }
    }
}

/// Transition matrices indexed by period, `P_1, P_2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSchedule {
    matrices: Vec<TransitionMatrix>,
    tail: TailRule,
    identity: TransitionMatrix,
}

impl TransitionSchedule {
    pub fn new(n: usize, matrices: Vec<TransitionMatrix>, tail: TailRule) -> Self {
        TransitionSchedule {
            matrices,
            tail,
            identity: TransitionMatrix::identity(n),
        }
    }

    pub fn constant(matrix: TransitionMatrix) -> Self {
        let n = matrix.size();
        Self::new(n, vec![matrix], TailRule::RepeatLast)
    }

    pub fn matrices(&self) -> &[TransitionMatrix] {
        &self.matrices
    }

    pub fn tail_rule(&self) -> TailRule {
        self.tail
    }

    /// Matrix governing the move at the end of `period` (1-based).
    pub fn matrix_at(&self, period: usize) -> &TransitionMatrix {
        assert!(period >= 1, "periods start at 1");
        let k = period - 1;
        if k < self.matrices.len() {
            return &self.matrices[k];
        }
        match self.tail {
            TailRule::RepeatLast => self.matrices.last().unwrap_or(&self.identity),
            TailRule::CycleAll if !self.matrices.is_empty() => &self.matrices[k % self.matrices.len()],
            _ => &self.identity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Player {
    pub id: u32,
    /// Probability of being the active player in any period.
    pub q: f64,
}

/// Unvalidated scenario fields, as read from a document or built in code.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub n_states: usize,
    pub initial: Vec<f64>,
    pub matrices: Vec<Vec<Vec<f64>>>,
    pub tail_rule: TailRule,
    pub players: Vec<Player>,
    pub overlook: Option<Vec<f64>>,
    pub no_active_prob: f64,
}

/// A validated game description.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchScenario {
    n: usize,
    initial: Belief,
    transitions: TransitionSchedule,
    players: Vec<Player>,
    overlook: Vec<f64>,
    no_active: f64,
}

/// Checks every scenario invariant and returns the validated scenario.
pub fn validate_scenario(spec: ScenarioSpec) -> Result<SearchScenario, ModelError> {
    let n = spec.n_states;
    if n == 0 {
        return Err(ModelError::ZeroStates);
    }
    if spec.initial.len() != n {
        return Err(ModelError::DimensionMismatch {
            field: "initial".into(),
            expected: n,
            actual: spec.initial.len(),
        });
    }
    let initial = Belief::new(spec.initial)?;

    if spec.matrices.is_empty() && spec.tail_rule != TailRule::Identity {
        return Err(ModelError::EmptySchedule(spec.tail_rule));
    }
    let mut matrices = Vec::with_capacity(spec.matrices.len());
    for (k, rows) in spec.matrices.into_iter().enumerate() {
        if rows.len() != n {
            return Err(ModelError::DimensionMismatch {
                field: format!("P_{}", k + 1),
                expected: n,
                actual: rows.len(),
            });
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::DimensionMismatch {
                    field: format!("P_{} row {}", k + 1, r + 1),
                    expected: n,
                    actual: row.len(),
                });
            }
            let sum: f64 = row.iter().sum();
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            if min.is_nan() || min < 0.0 || !sum.is_finite() || (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(ModelError::NonStochasticRow {
                    matrix: k,
                    row: r,
                    sum,
                    min,
                });
            }
        }
        matrices.push(TransitionMatrix::from_rows(rows)?);
    }

    if spec.players.is_empty() {
        return Err(ModelError::EmptyPlayerList);
    }
    for (i, p) in spec.players.iter().enumerate() {
        if p.q.is_nan() || p.q <= 0.0 || !p.q.is_finite() {
            return Err(ModelError::NonPositiveActivation { id: p.id, q: p.q });
        }
        if spec.players[..i].iter().any(|o| o.id == p.id) {
            return Err(ModelError::DuplicatePlayerId(p.id));
        }
    }
    let r = spec.no_active_prob;
    if !(0.0..1.0).contains(&r) {
        return Err(ModelError::NoActiveOutOfRange(r));
    }
    let sum = spec.players.iter().map(|p| p.q).sum::<f64>() + r;
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(ModelError::QSumMismatch { sum });
    }

    let overlook = spec.overlook.unwrap_or_else(|| vec![0.0; n]);
    if overlook.len() != n {
        return Err(ModelError::DimensionMismatch {
            field: "overlook".into(),
            expected: n,
            actual: overlook.len(),
        });
    }
    if let Some((state, &value)) = overlook.iter().enumerate().find(|(_, d)| !(0.0..1.0).contains(*d)) {
        return Err(ModelError::OverlookOutOfRange { state, value });
    }

    Ok(SearchScenario {
        n,
        initial,
        transitions: TransitionSchedule::new(n, matrices, spec.tail_rule),
        players: spec.players,
        overlook,
        no_active: r,
    })
}

impl SearchScenario {
    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn initial(&self) -> &Belief {
        &self.initial
    }

    pub fn transitions(&self) -> &TransitionSchedule {
        &self.transitions
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn player_index(&self, id: u32) -> Option<usize> {
        self.players.iter().position(|p| p.id == id)
    }

    pub fn overlook(&self) -> &[f64] {
        &self.overlook
    }

    pub fn max_overlook(&self) -> f64 {
        self.overlook.iter().copied().fold(0.0, f64::max)
    }

    /// Probability `r` that nobody searches in a period.
    pub fn no_active_prob(&self) -> f64 {
        self.no_active
    }

    /// Probability of finding the object by searching `state` under `belief`.
    pub fn find_prob(&self, belief: &Belief, state: usize) -> f64 {
        belief.get(state) * (1.0 - self.overlook[state])
    }

    /// Back to the unvalidated form, e.g. for serialization.
    pub fn to_spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            n_states: self.n,
            initial: self.initial.probs().to_vec(),
            matrices: self.transitions.matrices().iter().map(TransitionMatrix::rows).collect(),
            tail_rule: self.transitions.tail_rule(),
            players: self.players.clone(),
            overlook: Some(self.overlook.clone()),
            no_active_prob: self.no_active,
        }
    }

    pub fn check_state(&self, state: usize) -> Result<(), ModelError> {
        if state < self.n {
            Ok(())
        } else {
            Err(ModelError::StateOutOfRange { state, n: self.n })
        }
    }

    /// Belief after moving from period `period` to the next.
    pub fn transition(&self, z: &Belief, period: usize) -> Belief {
        belief_transition(z, self.transitions.matrix_at(period))
    }

    /// Belief at the start of the period following `step`, taken in `period`.
    pub fn advance(&self, z: &Belief, step: Step, period: usize) -> Result<Belief, ModelError> {
        let conditioned = match step {
            Step::Search(s) => belief_after_failed_search(z, s, &self.overlook)?,
            Step::Idle => z.clone(),
        };
        Ok(self.transition(&conditioned, period))
    }
}

/// Conditions `z` on an unsuccessful search of `state`.
pub fn belief_after_failed_search(z: &Belief, state: usize, overlook: &[f64]) -> Result<Belief, ModelError> {
    let likelihood = 1.0 - z.get(state) * (1.0 - overlook[state]);
    if likelihood <= EVIDENCE_TOL {
        return Err(ModelError::ImpossibleEvidence { state, likelihood });
    }
    let mut probs: Vec<f64> = z.probs().to_vec();
    probs[state] *= overlook[state];
    // normalising by the sum keeps the result stochastic to rounding
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(Belief(probs))
}

/// `z` times the transition matrix.
pub fn belief_transition(z: &Belief, matrix: &TransitionMatrix) -> Belief {
    Belief(matrix.propagate(z.probs()))
}

/// One period of the public record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    /// The active player searched this state and did not find the object.
    Search(usize),
    /// Nobody was active.
    Idle,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Search(s) => write!(f, "{}", s + 1),
            Step::Idle => f.write_str("-"),
        }
    }
}

/// Public history before period `len + 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct History(Vec<Step>);

impl History {
    pub fn empty() -> Self {
        History(Vec::new())
    }

    pub fn from_steps(steps: Vec<Step>) -> Self {
        History(steps)
    }

    /// History made only of searches.
    pub fn of_searches(states: &[usize]) -> Self {
        History(states.iter().map(|&s| Step::Search(s)).collect())
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Period at which this history is current.
    pub fn period(&self) -> usize {
        self.0.len() + 1
    }

    pub fn push(&mut self, step: Step) {
        self.0.push(step);
    }

    pub fn pop(&mut self) -> Option<Step> {
        self.0.pop()
    }

    pub fn extended(&self, step: Step) -> History {
        let mut h = self.clone();
        h.0.push(step);
        h
    }

    pub fn starts_with(&self, prefix: &History) -> bool {
        self.0.starts_with(&prefix.0)
    }

    pub fn validate(&self, scenario: &SearchScenario) -> Result<(), ModelError> {
        for step in &self.0 {
            if let Step::Search(s) = step {
                scenario.check_state(*s)?;
            }
        }
        Ok(())
    }

    /// Shortlex order: shorter histories first, then step by step.
    pub fn shortlex_cmp(&self, other: &History) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(")")
    }
}

/// Folds the filter over `history`, starting from the initial law.
pub fn belief_at_history(scenario: &SearchScenario, history: &History) -> Result<Belief, ModelError> {
    history.validate(scenario)?;
    let mut z = scenario.initial().clone();
    for (k, &step) in history.steps().iter().enumerate() {
        z = scenario.advance(&z, step, k + 1).map_err(|e| match e {
            ModelError::ImpossibleEvidence { state, .. } => ModelError::UnreachableHistory { prefix_len: k, state },
            other => other,
        })?;
    }
    Ok(z)
}

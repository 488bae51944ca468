//! Run reports: one JSON object per line, or a flat CSV table.

use std::collections::BTreeMap;

use searchgame::analysis::{DeviationFinding, DeviationMethod, SpeReport, ValueReport};
use searchgame::engine::MonteCarloReport;
use searchgame::SearchScenario;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    /// Subcommand and every argument that affects the results.
    pub command: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario_digest: Option<String>,
    pub results: Results,
    pub wall_clock_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Validation(ValidationResult),
    Exact(ExactResult),
    MonteCarlo(MonteCarloResult),
    Spe(SpeResult),
    Experiments(ExperimentsResult),
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationResult {
    pub valid: bool,
    pub n_states: usize,
    pub player_ids: Vec<u32>,
    pub no_active_prob: f64,
    pub max_overlook: f64,
}

impl ValidationResult {
    pub fn of(s: &SearchScenario) -> Self {
        ValidationResult {
            valid: true,
            n_states: s.n_states(),
            player_ids: s.players().iter().map(|p| p.id).collect(),
            no_active_prob: s.no_active_prob(),
            max_overlook: s.max_overlook(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayerValue {
    pub player: u32,
    pub q: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactResult {
    pub horizon: usize,
    pub players: Vec<PlayerValue>,
    pub residual: f64,
    pub pruned_mass: f64,
    pub residual_bound: Option<f64>,
    /// `Σ u_i + residual`, which is 1 up to rounding.
    pub accounting_total: f64,
    pub nodes: usize,
}

impl ExactResult {
    pub fn of(s: &SearchScenario, v: &ValueReport) -> Self {
        ExactResult {
            horizon: v.horizon,
            players: s
                .players()
                .iter()
                .zip(&v.values)
                .map(|(p, &u)| PlayerValue { player: p.id, q: p.q, u })
                .collect(),
            residual: v.residual,
            pruned_mass: v.pruned,
            residual_bound: v.residual_bound,
            accounting_total: v.total(),
            nodes: v.nodes,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayerEstimate {
    pub player: u32,
    pub wins: u64,
    pub frequency: f64,
    /// 95% normal-approximation half-width.
    pub half_width: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloResult {
    pub episodes: u64,
    pub horizon: usize,
    pub players: Vec<PlayerEstimate>,
    pub not_found: u64,
    pub not_found_frequency: f64,
    pub not_found_half_width: f64,
}

impl MonteCarloResult {
    pub fn of(m: &MonteCarloReport) -> Self {
        MonteCarloResult {
            episodes: m.episodes,
            horizon: m.horizon,
            players: m
                .player_ids
                .iter()
                .zip(&m.wins)
                .zip(m.win_frequencies().into_iter().zip(m.half_widths()))
                .map(|((&player, &wins), (frequency, half_width))| PlayerEstimate {
                    player,
                    wins,
                    frequency,
                    half_width,
                })
                .collect(),
            not_found: m.not_found,
            not_found_frequency: m.not_found_frequency(),
            not_found_half_width: m.not_found_half_width(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FindingDto {
    /// States are 1-based and `-` marks an idle period.
    pub history: String,
    pub player: u32,
    pub action: usize,
    pub gain: f64,
    pub method: String,
    pub error_bound: f64,
}

impl FindingDto {
    pub fn of(f: &DeviationFinding) -> Self {
        let (method, error_bound) = match f.method {
            DeviationMethod::ClosedForm => ("closed_form".to_string(), 0.0),
            DeviationMethod::Truncated { horizon, error_bound } => (format!("truncated({horizon})"), error_bound),
        };
        FindingDto {
            history: f.history.to_string(),
            player: f.player_id,
            action: f.action + 1,
            gain: f.gain,
            method,
            error_bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpeResult {
    pub verdict: String,
    pub depth: usize,
    pub horizon: usize,
    pub finite_game: bool,
    pub tol: f64,
    pub histories_checked: usize,
    pub max_error_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finding: Option<FindingDto>,
    pub findings_total: usize,
}

impl SpeResult {
    pub fn of(r: &SpeReport, depth: usize, horizon: usize, finite_game: bool, tol: f64) -> Self {
        SpeResult {
            verdict: if r.passed() { "PASS" } else { "DEVIATION" }.into(),
            depth,
            horizon,
            finite_game,
            tol,
            histories_checked: r.histories_checked,
            max_error_bound: r.max_error_bound,
            finding: r.findings.first().map(FindingDto::of),
            findings_total: r.findings.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Claim {
    pub experiment: String,
    pub claim: String,
    pub status: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentsResult {
    pub claims: Vec<Claim>,
    pub passed: usize,
    pub failed: usize,
}

impl RunReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }

    /// Flat `section,key,player,value` table.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<[String; 4]> = Vec::new();
        let mut row = |section: &str, key: &str, player: String, value: String| {
            rows.push([section.into(), key.into(), player, value]);
        };
        for (k, v) in &self.command {
            row("command", k, String::new(), v.clone());
        }
        if let Some(d) = &self.scenario_digest {
            row("meta", "scenario_digest", String::new(), d.clone());
        }
        if let Some(seed) = self.seed {
            row("meta", "seed", String::new(), seed.to_string());
        }
        row("meta", "wall_clock_seconds", String::new(), format!("{:.6}", self.wall_clock_seconds));
        let none = String::new;
        match &self.results {
            Results::Validation(v) => {
                row("result", "valid", none(), v.valid.to_string());
                row("result", "n_states", none(), v.n_states.to_string());
                for id in &v.player_ids {
                    row("result", "player", id.to_string(), String::new());
                }
                row("result", "no_active_prob", none(), v.no_active_prob.to_string());
                row("result", "max_overlook", none(), v.max_overlook.to_string());
            }
            Results::Exact(e) => {
                row("result", "horizon", none(), e.horizon.to_string());
                for p in &e.players {
                    row("result", "q", p.player.to_string(), p.q.to_string());
                    row("result", "u", p.player.to_string(), p.u.to_string());
                }
                row("result", "residual", none(), e.residual.to_string());
                row("result", "pruned_mass", none(), e.pruned_mass.to_string());
                row(
                    "result",
                    "residual_bound",
                    none(),
                    e.residual_bound.map_or(String::new(), |b| b.to_string()),
                );
                row("result", "accounting_total", none(), e.accounting_total.to_string());
                row("result", "nodes", none(), e.nodes.to_string());
            }
            Results::MonteCarlo(m) => {
                row("result", "episodes", none(), m.episodes.to_string());
                row("result", "horizon", none(), m.horizon.to_string());
                for p in &m.players {
                    row("result", "wins", p.player.to_string(), p.wins.to_string());
                    row("result", "frequency", p.player.to_string(), p.frequency.to_string());
                    row("result", "half_width", p.player.to_string(), p.half_width.to_string());
                }
                row("result", "not_found", none(), m.not_found.to_string());
                row("result", "not_found_frequency", none(), m.not_found_frequency.to_string());
                row("result", "not_found_half_width", none(), m.not_found_half_width.to_string());
            }
            Results::Spe(s) => {
                row("result", "verdict", none(), s.verdict.clone());
                row("result", "depth", none(), s.depth.to_string());
                row("result", "horizon", none(), s.horizon.to_string());
                row("result", "finite_game", none(), s.finite_game.to_string());
                row("result", "histories_checked", none(), s.histories_checked.to_string());
                row("result", "max_error_bound", none(), s.max_error_bound.to_string());
                row("result", "findings_total", none(), s.findings_total.to_string());
                if let Some(f) = &s.finding {
                    let p = f.player.to_string();
                    row("finding", "history", p.clone(), f.history.clone());
                    row("finding", "action", p.clone(), f.action.to_string());
                    row("finding", "gain", p.clone(), f.gain.to_string());
                    row("finding", "method", p, f.method.clone());
                }
            }
            Results::Experiments(x) => {
                for c in &x.claims {
                    row("claim", &format!("{}/{}", c.experiment, c.claim), String::new(), c.status.clone());
                }
                row("result", "passed", none(), x.passed.to_string());
                row("result", "failed", none(), x.failed.to_string());
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["section", "key", "player", "value"]).expect("in-memory write");
        for r in rows {
            w.write_record(&r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

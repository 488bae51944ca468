//! Monte Carlo simulation of the search game.
//!
//! Every episode draws from its own ChaCha stream, selected by the episode
//! index under one root seed, so a report depends only on
//! `(scenario, profile, seed, episodes, horizon)` and not on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{History, ModelError, SearchScenario, Step};
use crate::strategy::{Decision, MixedAction, StrategyProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    /// Index into the scenario's player list.
    Player(usize),
    NotFound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub winner: Winner,
    pub find_period: Option<usize>,
    /// Public record of the failed searches.
    pub play: History,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub player_ids: Vec<u32>,
    pub wins: Vec<u64>,
    pub not_found: u64,
    pub episodes: u64,
    pub horizon: usize,
    pub seed: u64,
}

/// 95% normal-approximation half-width for a frequency.
pub fn half_width(p: f64, episodes: u64) -> f64 {
    1.96 * (p * (1.0 - p) / episodes as f64).sqrt()
}

impl MonteCarloReport {
    pub fn win_frequencies(&self) -> Vec<f64> {
        self.wins.iter().map(|&w| w as f64 / self.episodes as f64).collect()
    }

    pub fn not_found_frequency(&self) -> f64 {
        self.not_found as f64 / self.episodes as f64
    }

    pub fn half_widths(&self) -> Vec<f64> {
        self.win_frequencies().into_iter().map(|p| half_width(p, self.episodes)).collect()
    }

    pub fn not_found_half_width(&self) -> f64 {
        half_width(self.not_found_frequency(), self.episodes)
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    wins: Vec<u64>,
    not_found: u64,
}

impl Tally {
    fn record(mut self, outcome: &EpisodeOutcome) -> Self {
        match outcome.winner {
            Winner::Player(i) => self.wins[i] += 1,
            Winner::NotFound => self.not_found += 1,
        }
        self
    }

    fn merge(mut self, other: Tally) -> Self {
        for (a, b) in self.wins.iter_mut().zip(other.wins) {
            *a += b;
        }
        self.not_found += other.not_found;
        self
    }
}

/// Random stream for episode `index` under `seed`.
pub fn episode_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn sample_index<R: Rng>(rng: &mut R, weights: impl IntoIterator<Item = f64>) -> Option<usize> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for (i, w) in weights.into_iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(i);
        if u < acc {
            return Some(i);
        }
    }
    // rounding left the total a hair below 1
    last
}

fn sample_action<R: Rng>(rng: &mut R, action: &MixedAction) -> usize {
    match action.as_pure() {
        Some(s) => s,
        None => sample_index(rng, action.probs().iter().copied()).expect("mixed action has support"),
    }
}

/// Plays one episode of at most `horizon` periods.
pub fn simulate_episode<R: Rng>(
    scenario: &SearchScenario,
    profile: &StrategyProfile,
    horizon: usize,
    rng: &mut R,
) -> Result<EpisodeOutcome, ModelError> {
    let players = scenario.players();
    let mut location = sample_index(rng, scenario.initial().probs().iter().copied()).expect("initial law has support");
    let mut belief = scenario.initial().clone();
    let mut play = History::empty();

    for period in 1..=horizon {
        // the last slot is "nobody active"
        let active = sample_index(
            rng,
            players.iter().map(|p| p.q).chain(std::iter::once(scenario.no_active_prob())),
        )
        .filter(|&i| i < players.len());
        let step = match active {
            Some(i) => {
                let action = profile.strategy(i).act(&Decision {
                    scenario,
                    history: &play,
                    belief: &belief,
                });
                let s = sample_action(rng, &action);
                if s == location {
                    let seen: f64 = rng.random();
                    if seen >= scenario.overlook()[s] {
                        return Ok(EpisodeOutcome {
                            winner: Winner::Player(i),
                            find_period: Some(period),
                            play,
                        });
                    }
                }
                Step::Search(s)
            }
            None => Step::Idle,
        };
        belief = scenario.advance(&belief, step, period)?;
        play.push(step);
        let row = scenario.transitions().matrix_at(period).row(location);
        location = sample_index(rng, row.iter().copied()).expect("transition row has support");
    }
    Ok(EpisodeOutcome {
        winner: Winner::NotFound,
        find_period: None,
        play,
    })
}

/// Aggregates `episodes` independent episodes; runs on the current rayon pool.
pub fn monte_carlo(
    scenario: &SearchScenario,
    profile: &StrategyProfile,
    episodes: u64,
    horizon: usize,
    seed: u64,
) -> Result<MonteCarloReport, ModelError> {
    assert!(episodes >= 1, "at least one episode");
    let empty = || Tally {
        wins: vec![0; scenario.players().len()],
        not_found: 0,
    };
    let tally = (0..episodes)
        .into_par_iter()
        .map(|k| {
            let mut rng = episode_rng(seed, k);
            simulate_episode(scenario, profile, horizon, &mut rng)
        })
        .try_fold(empty, |t, outcome| outcome.map(|o| t.record(&o)))
        .try_reduce(empty, |a, b| Ok(a.merge(b)))?;
    Ok(MonteCarloReport {
        player_ids: profile.ids().to_vec(),
        wins: tally.wins,
        not_found: tally.not_found,
        episodes,
        horizon,
        seed,
    })
}

/// Runs [`monte_carlo`] on a dedicated pool with `jobs` threads.
pub fn monte_carlo_with_jobs(
    scenario: &SearchScenario,
    profile: &StrategyProfile,
    episodes: u64,
    horizon: usize,
    seed: u64,
    jobs: usize,
) -> Result<MonteCarloReport, ModelError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| monte_carlo(scenario, profile, episodes, horizon, seed))
}

//! `searchgame`: validate, analyse and simulate competitive search games.
//!
//! Exit codes: 0 success, 1 I/O or usage error (or a failed reproduction
//! claim), 2 invalid scenario or profile, 3 the equilibrium check found a
//! profitable deviation.

mod experiments;
mod inputs;
mod report;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use searchgame::analysis::{exact_win_probs, horizon_for_bound, verify_spe, GreedyCertifier, SpeOptions};
use searchgame::engine::monte_carlo_with_jobs;
use searchgame::model::DERIVED_TOL;
use searchgame::scenarios::{serialize_profile, serialize_scenario, Metadata};
use searchgame::{History, SearchScenario, StrategyProfile};

use inputs::{load_profile, load_scenario, scenario_digest, CliError};
use report::{Claim, ExactResult, ExperimentsResult, MonteCarloResult, Results, RunReport, SpeResult, ValidationResult};

/// Residual bound targeted by the default horizon.
const DEFAULT_RESIDUAL_TARGET: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "searchgame", version, about = "Competitive search for a moving target")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Output {
    /// Report format: one JSON object per line, or a flat CSV table.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct Game {
    /// Scenario document path, or `preset:<name>` (e.g. `preset:two_state(0.2)`).
    scenario: String,
    /// Profile document path, a built-in (greedy, greedy_highest,
    /// greedy_uniform_ties, uniform, always:<state>) or a profile named by the preset.
    #[arg(default_value = "greedy")]
    profile: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a scenario document.
    Validate {
        scenario: String,
        #[command(flatten)]
        output: Output,
    },
    /// Exact winning probabilities over a finite horizon.
    Exact {
        #[command(flatten)]
        game: Game,
        /// Periods to evaluate; defaults to the smallest with residual bound <= 1e-9.
        #[arg(long)]
        horizon: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo estimates of the winning probabilities.
    Simulate {
        #[command(flatten)]
        game: Game,
        #[arg(long, default_value_t = 100_000)]
        episodes: u64,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, env = "SEARCHGAME_SEED", default_value_t = 0)]
        seed: u64,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// One-shot deviation check at every history shorter than `--depth`.
    SpeCheck {
        #[command(flatten)]
        game: Game,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Periods used for continuations that are not certified greedy;
        /// with `--finite` the total length of the game.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = DERIVED_TOL)]
        tol: f64,
        /// Treat the game as ending after `--horizon` periods.
        #[arg(long)]
        finite: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Check the numeric claims about the built-in games.
    Reproduce {
        /// case1, case2, fig2, overlook, no_active, discount or all.
        #[arg(long, default_value = "all")]
        experiment: String,
        #[command(flatten)]
        output: Output,
    },
    /// Print the canonical document of a scenario, or of a profile with `--profile`.
    Export {
        scenario: String,
        #[arg(long)]
        profile: Option<String>,
    },
}

fn default_horizon(s: &SearchScenario, p: &StrategyProfile, given: Option<usize>) -> Result<usize, CliError> {
    if let Some(t) = given {
        if t == 0 {
            return Err(CliError::Usage("--horizon must be at least 1".into()));
        }
        return Ok(t);
    }
    let q = GreedyCertifier::new(s, p).greedy_from(&History::empty()).ok_or_else(|| {
        CliError::Usage("no player is greedy throughout, so there is no default horizon; pass --horizon".into())
    })?;
    Ok(horizon_for_bound(q, s.n_states(), s.max_overlook(), DEFAULT_RESIDUAL_TARGET))
}

fn command_map(sub: &str, pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    let mut m: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    m.insert("subcommand".into(), sub.into());
    m
}

fn analysis_error(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

struct Emitted {
    report: RunReport,
    format: Format,
    code: u8,
}

fn run(cmd: Command) -> Result<Option<Emitted>, CliError> {
    let start = Instant::now();
    let finish = |command, digest, results, seed, format, code| {
        Ok(Some(Emitted {
            report: RunReport {
                command,
                scenario_digest: digest,
                results,
                wall_clock_seconds: start.elapsed().as_secs_f64(),
                seed,
            },
            format,
            code,
        }))
    };
    match cmd {
        Command::Validate { scenario, output } => {
            let loaded = load_scenario(&scenario)?;
            let s = &loaded.scenario;
            finish(
                command_map("validate", &[("scenario", scenario.clone())]),
                Some(scenario_digest(s)),
                Results::Validation(ValidationResult::of(s)),
                None,
                output.format,
                0,
            )
        }
        Command::Exact { game, horizon, output } => {
            let loaded = load_scenario(&game.scenario)?;
            let profile = load_profile(&game.profile, &loaded)?;
            let s = &loaded.scenario;
            let t = default_horizon(s, &profile, horizon)?;
            let v = exact_win_probs(s, &profile, t).map_err(analysis_error)?;
            finish(
                command_map(
                    "exact",
                    &[("scenario", game.scenario), ("profile", game.profile), ("horizon", t.to_string())],
                ),
                Some(scenario_digest(s)),
                Results::Exact(ExactResult::of(s, &v)),
                None,
                output.format,
                0,
            )
        }
        Command::Simulate {
            game,
            episodes,
            horizon,
            seed,
            jobs,
            output,
        } => {
            if episodes == 0 {
                return Err(CliError::Usage("--episodes must be at least 1".into()));
            }
            let loaded = load_scenario(&game.scenario)?;
            let profile = load_profile(&game.profile, &loaded)?;
            let s = &loaded.scenario;
            let t = default_horizon(s, &profile, horizon)?;
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let m = monte_carlo_with_jobs(s, &profile, episodes, t, seed, jobs).map_err(analysis_error)?;
            finish(
                command_map(
                    "simulate",
                    &[
                        ("scenario", game.scenario),
                        ("profile", game.profile),
                        ("episodes", episodes.to_string()),
                        ("horizon", t.to_string()),
                    ],
                ),
                Some(scenario_digest(s)),
                Results::MonteCarlo(MonteCarloResult::of(&m)),
                Some(seed),
                output.format,
                0,
            )
        }
        Command::SpeCheck {
            game,
            depth,
            horizon,
            tol,
            finite,
            output,
        } => {
            let loaded = load_scenario(&game.scenario)?;
            let profile = load_profile(&game.profile, &loaded)?;
            let s = &loaded.scenario;
            if finite && horizon.is_none() {
                return Err(CliError::Usage("--finite needs --horizon (the length of the game)".into()));
            }
            let t = default_horizon(s, &profile, horizon)?;
            let mut opts = SpeOptions::new(depth, t);
            opts.tol = tol;
            opts.finite_game = finite;
            let r = verify_spe(s, &profile, &opts).map_err(analysis_error)?;
            let code = if r.passed() { 0 } else { 3 };
            finish(
                command_map(
                    "spe-check",
                    &[
                        ("scenario", game.scenario),
                        ("profile", game.profile),
                        ("depth", depth.to_string()),
                        ("horizon", t.to_string()),
                        ("tol", tol.to_string()),
                        ("finite", finite.to_string()),
                    ],
                ),
                Some(scenario_digest(s)),
                Results::Spe(SpeResult::of(&r, depth, t, finite, tol)),
                None,
                output.format,
                code,
            )
        }
        Command::Reproduce { experiment, output } => {
            let claims: Vec<Claim> = experiments::run(&experiment).map_err(CliError::Usage)?;
            let passed = claims.iter().filter(|c| c.status == "PASS").count();
            let failed = claims.len() - passed;
            for c in &claims {
                eprintln!("[{}] {}/{}: {}", c.status, c.experiment, c.claim, c.detail);
            }
            finish(
                command_map("reproduce", &[("experiment", experiment)]),
                None,
                Results::Experiments(ExperimentsResult { claims, passed, failed }),
                None,
                output.format,
                if failed == 0 { 0 } else { 1 },
            )
        }
        Command::Export { scenario, profile } => {
            let loaded = load_scenario(&scenario)?;
            let text = match profile {
                None => {
                    let metadata = Metadata {
                        name: loaded.preset.as_ref().map(|p| p.name.clone()),
                        description: loaded.preset.as_ref().map(|p| p.description.clone()),
                    };
                    serialize_scenario(&loaded.scenario, metadata)
                }
                Some(name) => {
                    let p = load_profile(&name, &loaded)?;
                    serialize_profile(&p).map_err(|e| CliError::Usage(e.to_string()))?
                }
            };
            println!("{text}");
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(out)) => {
            match out.format {
                Format::Json => println!("{}", out.report.to_json_line()),
                Format::Csv => print!("{}", out.report.to_csv()),
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so progress is printed as each
//! criterion finishes. The process fails if any criterion fails, except the
//! literal no-active statement (criterion 8), whose defect is explained in the
//! printed detail and whose corrected form is checked on its own line.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{enumerate_values, oracle_greedy, oracle_table, OracleStrategy};
use searchgame::analysis::{
    discount_horizon, discounted_values, exact_win_probs, horizon_for_bound, one_shot_deviation_value, residual_bound,
    verify_spe, SpeOptions, SpeVerdict, ValueReport,
};
use searchgame::engine::monte_carlo_with_jobs;
use searchgame::model::{belief_at_history, DERIVED_TOL};
use searchgame::scenarios::{
    fig2, no_active_demo, preset, random_greedy_profile, random_opponents, random_scenario, random_scenario_with,
    two_state, RandomScenarioConfig,
};
use searchgame::strategy::{argmax_set, greedy_score, BeliefMax, DefaultRule, MixedAction, Script, TIE_TOL};
use searchgame::{History, SearchScenario, Step, Strategy, StrategyProfile, TieBreak};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Horizon with residual bound at most `target` for the largest greedy `q`.
fn horizon_for(scenario: &SearchScenario, target: f64) -> usize {
    let q = scenario.players().iter().map(|p| p.q).fold(0.0, f64::max);
    horizon_for_bound(q, scenario.n_states(), scenario.max_overlook(), target)
}

fn exact(scenario: &SearchScenario, profile: &StrategyProfile, horizon: usize) -> ValueReport {
    exact_win_probs(scenario, profile, horizon).expect("exact recursion")
}

fn c1_greedy_guarantee() -> Outcome {
    let mut worst_margin = f64::INFINITY;
    let mut slowest = Duration::ZERO;
    let mut failures = Vec::new();
    for k in 0..50u64 {
        let s = random_scenario(4, 3, 1000 + k);
        let i = (k as usize) % s.players().len();
        let profile = random_opponents(&s, i, 3, 2000 + k);
        let q = s.players()[i].q;
        let t = horizon_for_bound(q, s.n_states(), s.max_overlook(), 1e-6);
        let bound = residual_bound(q, s.n_states(), s.max_overlook(), t);
        let start = Instant::now();
        let v = exact(&s, &profile, t);
        slowest = slowest.max(start.elapsed());
        let margin = v.values[i] - (q - bound);
        worst_margin = worst_margin.min(margin);
        if margin < -DERIVED_TOL || bound > 1e-6 {
            failures.push(format!("scenario {k}: u={} q={q} bound={bound}", v.values[i]));
        }
    }
    let pass = failures.is_empty() && slowest < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "50 scenarios, min(u_i - q_i + bound) = {worst_margin:.3e}, slowest exact run {:.2}s{}",
            slowest.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn c2_all_greedy() -> Outcome {
    let mut cases: Vec<(String, SearchScenario, StrategyProfile)> = Vec::new();
    for name in ["two_state(0.2)", "two_state_half"] {
        let p = preset(name).unwrap();
        let prof = p.profile("greedy").unwrap().clone();
        cases.push((name.into(), p.scenario, prof));
    }
    for k in 0..20u64 {
        let s = random_scenario(4, 3, 3000 + k);
        let prof = random_greedy_profile(&s, 4000 + k);
        cases.push((format!("random#{k}"), s, prof));
    }
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, s, prof) in &cases {
        let t = horizon_for(s, 1e-6);
        let v = exact(s, prof, t);
        let bound = v.residual_bound.expect("greedy profile");
        for (u, p) in v.values.iter().zip(s.players()) {
            let err = (u - p.q).abs();
            worst = worst.max(err / bound.max(f64::MIN_POSITIVE));
            if err > bound + DERIVED_TOL * 1e-3 || bound > 1e-6 {
                failures.push(format!("{name}: |{u} - {}| > {bound}", p.q));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} profiles, max |u_i - q_i| / bound = {worst:.3}{}",
            cases.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn c3_case_small_c() -> Outcome {
    let (c, q2): (f64, f64) = (0.2, 0.01);
    let look2 = 1.0 - c + q2 * c * (1.0 - c);
    let look1 = c + q2 * (1.0 - c);
    let numbers = (look2 - 0.8016).abs() < 1e-12 && (look1 - 0.208).abs() < 1e-12 && look2 > look1;

    let s = two_state(c).unwrap();
    let greedy = StrategyProfile::all_greedy(&s);
    let h = History::empty();
    let v_state2 = one_shot_deviation_value(&s, &greedy, &h, 1, 1).unwrap();
    let v_state1 = one_shot_deviation_value(&s, &greedy, &h, 1, 0).unwrap();
    // given player 2 is active: own find plus its greedy continuation share
    let ranking = v_state2 > v_state1;

    let always1 = StrategyProfile::uniform(&s, Strategy::always(2, 0));
    let report = verify_spe(&s, &always1, &SpeOptions::new(1, 200)).unwrap();
    let rejected = matches!(&report.verdict, SpeVerdict::Deviation(f) if f.history.is_empty() && f.action == 1);

    outcome(
        numbers && ranking && rejected,
        format!(
            "1-c+q2*c*(1-c) = {look2:.4} > c+q2*(1-c) = {look1:.4}; one-shot values for player 2: state 2 {v_state2:.6}, state 1 {v_state1:.6}; always-state-1 rejected at empty history: {rejected}"
        ),
    )
}

fn tie_variants(n: usize) -> Vec<TieBreak> {
    vec![
        TieBreak::LowestIndex,
        TieBreak::HighestIndex,
        TieBreak::UniformOverArgmax,
        TieBreak::Fixed((0..n).rev().collect()),
    ]
}

fn c4_case_half() -> Outcome {
    let s = two_state(0.5).unwrap();
    let t = horizon_for(&s, 1e-9);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for a in tie_variants(2) {
        for b in tie_variants(2) {
            let prof = StrategyProfile::new(&s, vec![(1, Strategy::Greedy(a.clone())), (2, Strategy::Greedy(b.clone()))]).unwrap();
            let v = exact(&s, &prof, t);
            worst = worst.max((v.values[0] - 0.99).abs()).max((v.values[1] - 0.01).abs());
            count += 1;
        }
    }
    outcome(worst <= 1e-6, format!("{count} tie-break combinations, max deviation from (0.99, 0.01) = {worst:.3e}"))
}

fn c5_finite_counterexample() -> Outcome {
    let eps = 0.001;
    let s = fig2(eps).unwrap();
    let n = 3;
    let target = 0.99 * (2.0 / 3.0 + 3.0 * eps);

    let greedy = StrategyProfile::all_greedy(&s);
    let exact_greedy = exact(&s, &greedy, 2).values[0];

    let oracle: Vec<OracleStrategy> = vec![oracle_greedy(&s), oracle_greedy(&s)];
    let brute_greedy = enumerate_values(&s, &oracle, 2)[0];
    // state 3 first, then state 1 after a failed search of state 3
    let deviator = oracle_table(n, vec![(vec![], 2), (vec![Some(2)], 0)], oracle_greedy(&s));
    let oracle_dev: Vec<OracleStrategy> = vec![deviator, oracle_greedy(&s)];
    let brute_dev = enumerate_values(&s, &oracle_dev, 2)[0];

    let deviation = preset("fig2(0.001)").unwrap().profile("p1_state3_then_greedy").unwrap().clone();
    let exact_dev = exact(&s, &deviation, 2).values[0];

    let mut opts = SpeOptions::new(2, 2);
    opts.finite_game = true;
    let report = verify_spe(&s, &greedy, &opts).unwrap();
    let finding = matches!(&report.verdict,
        SpeVerdict::Deviation(f) if f.history.is_empty() && f.player_index == 0 && f.action == 2);

    let pass = (exact_greedy - target).abs() <= 1e-12
        && (brute_greedy - target).abs() <= 1e-12
        && (exact_dev - brute_dev).abs() <= 1e-12
        && brute_dev > brute_greedy
        && finding;
    outcome(
        pass,
        format!(
            "greedy u_1 = {exact_greedy:.12} (target {target:.12}, enumeration {brute_greedy:.12}); deviation u_1 = {exact_dev:.12} (enumeration {brute_dev:.12}); finite-game check finds player 1 -> state 3 at period 1: {finding}"
        ),
    )
}

/// Greedy play path of length `len` under `profile`, if feasible.
fn greedy_path(s: &SearchScenario, len: usize) -> Option<History> {
    let mut h = History::empty();
    for _ in 0..len {
        let z = belief_at_history(s, &h).ok()?;
        let scores = greedy_score(&z, s.overlook());
        let a = argmax_set(&scores, TIE_TOL)[0];
        if scores[a] >= 1.0 - 1e-12 {
            return None;
        }
        h.push(Step::Search(a));
    }
    Some(h)
}

fn c6_converse() -> Outcome {
    let cfg = RandomScenarioConfig {
        players_min: 2,
        ..RandomScenarioConfig::new(4, 3)
    };
    let mut checked = 0;
    let mut exact_first = 0;
    let mut failures = Vec::new();
    let mut seed = 5000u64;
    while checked < 50 && seed < 10_000 {
        seed += 1;
        let s = random_scenario_with(&cfg, seed);
        let len = (seed % 3) as usize;
        let Some(h) = greedy_path(&s, len) else { continue };
        let z = belief_at_history(&s, &h).unwrap();
        let scores = greedy_score(&z, s.overlook());
        let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let Some(a) = (0..s.n_states()).rev().find(|&x| best - scores[x] > 1e-3) else { continue };
        let j = (seed as usize) % s.players().len();
        let deviant = Strategy::Scripted(Script::new([(h.clone(), MixedAction::pure(s.n_states(), a))], DefaultRule::Greedy(TieBreak::LowestIndex)));
        let prof = StrategyProfile::all_greedy(&s).with_strategy(j, deviant);
        let report = verify_spe(&s, &prof, &SpeOptions::new(h.len() + 1, 400)).unwrap();
        checked += 1;
        match report.finding_at(&h, j) {
            Some(f) if f.gain > 0.0 => {
                if matches!(&report.verdict, SpeVerdict::Deviation(first) if first.history == h) {
                    exact_first += 1;
                }
            }
            _ => failures.push(format!("seed {seed}: no finding for player {} at {h}", j + 1)),
        }
    }
    outcome(
        checked == 50 && failures.is_empty(),
        format!(
            "{checked} perturbed profiles, all rejected at the perturbed history with positive gain; first finding at that history in {exact_first}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

/// Does raw-belief maximisation leave the weighted argmax at some history shorter than `depth`?
fn raw_choice_differs(s: &SearchScenario, depth: usize) -> bool {
    let mut layer = vec![History::empty()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for h in layer {
            let Ok(z) = belief_at_history(s, &h) else { continue };
            let scores = greedy_score(&z, s.overlook());
            let raw = argmax_set(z.probs(), TIE_TOL)[0];
            if !argmax_set(&scores, TIE_TOL).contains(&raw) {
                return true;
            }
            for (a, &score) in scores.iter().enumerate() {
                if score < 1.0 - 1e-12 {
                    next.push(h.extended(Step::Search(a)));
                }
            }
        }
        layer = next;
    }
    false
}

fn c7_overlook() -> Outcome {
    let cfg = RandomScenarioConfig {
        max_overlook: 0.9,
        players_min: 2,
        ..RandomScenarioConfig::new(4, 3)
    };
    let mut passes = 0;
    let mut differing = 0;
    let mut rejected = 0;
    let mut failures = Vec::new();
    for k in 0..20u64 {
        let s = random_scenario_with(&cfg, 6000 + k);
        let greedy = StrategyProfile::all_greedy(&s);
        let mut opts = SpeOptions::new(4, 1200);
        opts.tol = 1e-12;
        if verify_spe(&s, &greedy, &opts).unwrap().passed() {
            passes += 1;
        } else {
            failures.push(format!("scenario {k}: weighted greedy rejected"));
        }
        if raw_choice_differs(&s, 4) {
            differing += 1;
            let raw = StrategyProfile::uniform(&s, Strategy::custom(BeliefMax(TieBreak::LowestIndex)));
            if verify_spe(&s, &raw, &opts).unwrap().passed() {
                failures.push(format!("scenario {k}: raw-belief profile passed"));
            } else {
                rejected += 1;
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "weighted greedy passes in {passes}/20; raw-belief choice leaves the weighted argmax in {differing} scenarios, rejected in {rejected}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn c8_no_active() -> (Outcome, Outcome) {
    let s = no_active_demo();
    let prof = StrategyProfile::all_greedy(&s);
    let t = horizon_for(&s, 1e-9);
    let v = exact(&s, &prof, t);
    let r = s.no_active_prob();
    let literal = v.values.iter().zip(s.players()).all(|(u, p)| (u - p.q).abs() <= v.residual);
    let literal_detail = format!(
        "u = ({:.9}, {:.9}) vs q = (0.35, 0.35), residual {:.2e}: idle periods do not end the game, so greedy play still finds the object and each player wins q_i/(1-r) = 0.5, not q_i",
        v.values[0], v.values[1], v.residual
    );
    let bound = v.residual_bound.unwrap();
    let corrected = v
        .values
        .iter()
        .zip(s.players())
        .all(|(u, p)| (u - p.q / (1.0 - r)).abs() <= bound + 1e-15 && *u >= p.q)
        && (v.total() - 1.0).abs() <= 1e-12;
    (
        outcome(literal, literal_detail),
        outcome(
            corrected,
            format!("|u_i - q_i/(1-r)| <= bound {bound:.2e}, u_i >= q_i and sum u + residual = {:.15}", v.total()),
        ),
    )
}

fn preset_cases() -> Vec<(String, SearchScenario, StrategyProfile)> {
    ["two_state(0.2)", "two_state_half", "fig2", "overlook_demo", "no_active_demo"]
        .iter()
        .map(|name| {
            let p = preset(name).unwrap();
            let prof = p.profile("greedy").unwrap().clone();
            (name.to_string(), p.scenario, prof)
        })
        .collect()
}

fn c9_monte_carlo() -> Outcome {
    let episodes = 100_000u64;
    let mut worst_z: f64 = 0.0;
    let mut identical = true;
    let mut failures = Vec::new();
    for (k, (name, s, prof)) in preset_cases().into_iter().enumerate() {
        let t = horizon_for(&s, 1e-9);
        let v = exact(&s, &prof, t);
        let seed = 77 + k as u64;
        let one = monte_carlo_with_jobs(&s, &prof, episodes, t, seed, 1).unwrap();
        let eight = monte_carlo_with_jobs(&s, &prof, episodes, t, seed, 8).unwrap();
        identical &= one == eight;
        let freqs = one.win_frequencies();
        let mut pairs: Vec<(f64, f64)> = v.values.iter().copied().zip(freqs).collect();
        pairs.push((v.residual, one.not_found_frequency()));
        for (p, f) in pairs {
            let se = (p * (1.0 - p) / episodes as f64).sqrt();
            let dev = (f - p).abs();
            if dev > 4.0 * se + 1e-12 {
                failures.push(format!("{name}: estimate {f} vs exact {p}"));
            }
            if se > 0.0 {
                worst_z = worst_z.max(dev / se);
            }
        }
    }
    outcome(
        failures.is_empty() && identical,
        format!(
            "5 presets x 1e5 episodes, max |estimate - exact| = {worst_z:.2} standard errors; 1 vs 8 jobs bit-identical: {identical}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn c10_discounting() -> Outcome {
    let discount = 0.999;
    let t_disc = discount_horizon(discount, 1e-6);
    let mut worst: f64 = 0.0;
    for (_, s, prof) in preset_cases() {
        let v = exact(&s, &prof, horizon_for(&s, 1e-9));
        let d = discounted_values(&s, &prof, discount, t_disc).unwrap();
        for (a, b) in v.values.iter().zip(&d.values) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(
        worst <= 5e-3 && discount.powi(t_disc as i32) <= 1e-6,
        format!("discount {discount}, T = {t_disc}, max |discounted - undiscounted| = {worst:.3e} over 5 presets"),
    )
}

fn main() -> ExitCode {
    let mut hard_failures = 0;
    let mut report = |label: &str, o: Outcome, counts: bool| {
        println!("[{}] {label}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass && counts {
            hard_failures += 1;
        }
    };
    let timed = |f: fn() -> Outcome| {
        let start = Instant::now();
        let mut o = f();
        o.detail.push_str(&format!(" ({:.1}s)", start.elapsed().as_secs_f64()));
        o
    };

    report("C1 greedy player guarantee on random games", timed(c1_greedy_guarantee), true);
    report("C2 all-greedy profiles win q_i", timed(c2_all_greedy), true);
    report("C3 two-state c=0.2 deviation ranking", timed(c3_case_small_c), true);
    report("C4 two-state c=1/2 tie-break invariance", timed(c4_case_half), true);
    report("C5 three-state two-period counterexample", timed(c5_finite_counterexample), true);
    report("C6 non-greedy profiles rejected where perturbed", timed(c6_converse), true);
    report("C7 overlook-weighted greedy", timed(c7_overlook), true);
    let (literal, corrected) = c8_no_active();
    report("C8 no-active values |u_i - q_i| <= residual (as stated; known defect)", literal, false);
    report("C8' no-active values u_i = q_i/(1-r)", corrected, true);
    report("C9 Monte Carlo agrees with exact values", timed(c9_monte_carlo), true);
    report("C10 discounting changes values by at most 5e-3", timed(c10_discounting), true);

    if hard_failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{hard_failures} criteria failed");
        ExitCode::FAILURE
    }
}

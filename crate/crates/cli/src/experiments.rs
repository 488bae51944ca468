//! Numeric claims about the built-in games, each checked and reported.

use searchgame::analysis::{
    discount_horizon, discounted_values, exact_win_probs, horizon_for_bound, one_shot_deviation_value, verify_spe,
    AnalysisError, SpeOptions, SpeVerdict,
};
use searchgame::scenarios::{fig2, no_active_demo, preset, two_state, FIG2_DEFAULT_EPS};
use searchgame::{History, SearchScenario, Strategy, StrategyProfile, TieBreak};

use crate::report::Claim;

pub const EXPERIMENTS: &[&str] = &["case1", "case2", "fig2", "overlook", "no_active", "discount"];

type Experiment = fn(&mut Claims) -> Result<(), AnalysisError>;

struct Claims {
    experiment: &'static str,
    out: Vec<Claim>,
}

impl Claims {
    fn check(&mut self, claim: &str, pass: bool, detail: String) {
        self.out.push(Claim {
            experiment: self.experiment.into(),
            claim: claim.into(),
            status: if pass { "PASS" } else { "FAIL" }.into(),
            detail,
        });
    }
}

fn default_horizon(s: &SearchScenario) -> usize {
    let q = s.players().iter().map(|p| p.q).fold(0.0, f64::max);
    horizon_for_bound(q, s.n_states(), s.max_overlook(), 1e-9)
}

fn case1(c: &mut Claims) -> Result<(), AnalysisError> {
    let (cc, q2): (f64, f64) = (0.2, 0.01);
    let look2 = 1.0 - cc + q2 * cc * (1.0 - cc);
    let look1 = cc + q2 * (1.0 - cc);
    c.check(
        "player2_prefers_state2",
        look2 > look1,
        format!("1-c+q2*c*(1-c) = {look2:.6} > c+q2*(1-c) = {look1:.6} at c = {cc}"),
    );
    let s = two_state(cc).expect("valid preset");
    let greedy = StrategyProfile::all_greedy(&s);
    let h = History::empty();
    let v2 = one_shot_deviation_value(&s, &greedy, &h, 1, 1)?;
    let v1 = one_shot_deviation_value(&s, &greedy, &h, 1, 0)?;
    c.check(
        "one_shot_ranking",
        v2 > v1,
        format!("player 2 one-shot value: state 2 {v2:.9}, state 1 {v1:.9}"),
    );
    let always1 = StrategyProfile::uniform(&s, Strategy::always(2, 0));
    let report = verify_spe(&s, &always1, &SpeOptions::new(1, 200))?;
    let detail = match &report.verdict {
        SpeVerdict::Deviation(f) => format!(
            "deviation for player {} to state {} at {} with gain {:.6}",
            f.player_id,
            f.action + 1,
            f.history,
            f.gain
        ),
        SpeVerdict::Pass => "no deviation found".into(),
    };
    let ok = matches!(&report.verdict, SpeVerdict::Deviation(f) if f.history.is_empty());
    c.check("always_state1_rejected", ok, detail);
    Ok(())
}

fn case2(c: &mut Claims) -> Result<(), AnalysisError> {
    let s = two_state(0.5).expect("valid preset");
    let t = default_horizon(&s);
    for tie in [
        TieBreak::LowestIndex,
        TieBreak::HighestIndex,
        TieBreak::UniformOverArgmax,
        TieBreak::Fixed(vec![1, 0]),
    ] {
        let v = exact_win_probs(&s, &StrategyProfile::uniform(&s, Strategy::Greedy(tie.clone())), t)?;
        let err = (v.values[0] - 0.99).abs().max((v.values[1] - 0.01).abs());
        c.check(
            &format!("greedy_{}", tie_name(&tie)),
            err <= 1e-6,
            format!("u = ({:.9}, {:.9}), T = {t}", v.values[0], v.values[1]),
        );
    }
    Ok(())
}

fn tie_name(t: &TieBreak) -> &'static str {
    match t {
        TieBreak::LowestIndex => "lowest_index",
        TieBreak::HighestIndex => "highest_index",
        TieBreak::UniformOverArgmax => "uniform_over_argmax",
        TieBreak::Fixed(_) => "fixed_order",
    }
}

fn fig2_claims(c: &mut Claims) -> Result<(), AnalysisError> {
    let eps = FIG2_DEFAULT_EPS;
    let s = fig2(eps).expect("valid preset");
    let target = 0.99 * (2.0 / 3.0 + 3.0 * eps);
    let greedy = exact_win_probs(&s, &StrategyProfile::all_greedy(&s), 2)?.values[0];
    c.check(
        "greedy_value_two_periods",
        (greedy - target).abs() <= 1e-12,
        format!("u_1 = {greedy:.12}, expected 0.99*(2/3+3*eps) = {target:.12}"),
    );
    let p = preset("fig2").expect("valid preset");
    let deviation = exact_win_probs(&s, p.profile("p1_state3_then_greedy").expect("listed"), 2)?.values[0];
    c.check(
        "deviation_is_profitable",
        deviation > greedy,
        format!("state 3 then greedy: u_1 = {deviation:.12} > {greedy:.12}"),
    );
    let mut opts = SpeOptions::new(2, 2);
    opts.finite_game = true;
    let report = verify_spe(&s, &StrategyProfile::all_greedy(&s), &opts)?;
    let ok = matches!(&report.verdict,
        SpeVerdict::Deviation(f) if f.history.is_empty() && f.player_index == 0 && f.action == 2);
    c.check(
        "finite_game_check_finds_deviation",
        ok,
        format!("{} findings in the two-period game", report.findings.len()),
    );
    Ok(())
}

fn overlook(c: &mut Claims) -> Result<(), AnalysisError> {
    let p = preset("overlook_demo").expect("valid preset");
    let s = &p.scenario;
    let mut opts = SpeOptions::new(4, 1200);
    opts.tol = 1e-12;
    let greedy = verify_spe(s, p.profile("greedy").expect("listed"), &opts)?;
    c.check(
        "weighted_greedy_passes",
        greedy.passed(),
        format!("{} histories checked", greedy.histories_checked),
    );
    let raw = verify_spe(s, p.profile("belief_max").expect("listed"), &opts)?;
    let detail = match &raw.verdict {
        SpeVerdict::Deviation(f) => format!(
            "player {} gains {:.6} by searching state {} at {}",
            f.player_id,
            f.gain,
            f.action + 1,
            f.history
        ),
        SpeVerdict::Pass => "no deviation found".into(),
    };
    c.check("raw_belief_max_rejected", !raw.passed(), detail);
    Ok(())
}

fn no_active(c: &mut Claims) -> Result<(), AnalysisError> {
    let s = no_active_demo();
    let t = default_horizon(&s);
    let v = exact_win_probs(&s, &StrategyProfile::all_greedy(&s), t)?;
    let r = s.no_active_prob();
    let bound = v.residual_bound.unwrap_or(1.0);
    let ok = v
        .values
        .iter()
        .zip(s.players())
        .all(|(u, p)| (u - p.q / (1.0 - r)).abs() <= bound);
    c.check(
        "greedy_wins_q_over_1_minus_r",
        ok,
        format!(
            "u = ({:.9}, {:.9}), q/(1-r) = ({:.9}, {:.9}), bound {bound:.2e}",
            v.values[0],
            v.values[1],
            s.players()[0].q / (1.0 - r),
            s.players()[1].q / (1.0 - r)
        ),
    );
    c.check(
        "accounting",
        (v.total() - 1.0).abs() <= 1e-12,
        format!("sum u + residual = {:.15}", v.total()),
    );
    Ok(())
}

fn discount(c: &mut Claims) -> Result<(), AnalysisError> {
    let d = 0.999;
    let t = discount_horizon(d, 1e-6);
    for name in ["two_state(0.2)", "two_state_half", "fig2", "overlook_demo", "no_active_demo"] {
        let p = preset(name).expect("valid preset");
        let prof = p.profile("greedy").expect("listed");
        let u = exact_win_probs(&p.scenario, prof, default_horizon(&p.scenario))?;
        let dv = discounted_values(&p.scenario, prof, d, t)?;
        let gap = u.values.iter().zip(&dv.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        c.check(
            name,
            gap <= 5e-3,
            format!("max |discounted - undiscounted| = {gap:.3e} at discount {d}, T = {t}"),
        );
    }
    Ok(())
}

/// Runs one experiment by name, or every experiment for `all`.
pub fn run(name: &str) -> Result<Vec<Claim>, String> {
    let names: Vec<&str> = if name == "all" { EXPERIMENTS.to_vec() } else { vec![name] };
    let mut out = Vec::new();
    for n in names {
        let (experiment, f): (&'static str, Experiment) = match n {
            "case1" => ("case1", case1),
            "case2" => ("case2", case2),
            "fig2" => ("fig2", fig2_claims),
            "overlook" => ("overlook", overlook),
            "no_active" => ("no_active", no_active),
            "discount" => ("discount", discount),
            other => return Err(format!("unknown experiment {other:?}; expected one of {EXPERIMENTS:?} or all")),
        };
        let mut claims = Claims { experiment, out: Vec::new() };
        f(&mut claims).map_err(|e| format!("{experiment}: {e}"))?;
        out.extend(claims.out);
    }
    Ok(out)
}

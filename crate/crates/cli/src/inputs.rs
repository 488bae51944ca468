//! Resolving scenario and profile arguments.

use std::fs;
use std::path::Path;

use searchgame::scenarios::{parse_profile, parse_scenario, preset, serialize_scenario, Metadata, Preset};
use searchgame::{SearchScenario, Strategy, StrategyProfile, TieBreak};
use sha2::{Digest, Sha256};

/// Failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable file or bad arguments (exit 1).
    Usage(String),
    /// Document or scenario rejected (exit 2).
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Invalid(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Invalid(m) => m,
        }
    }
}

pub const PRESET_PREFIX: &str = "preset:";

pub struct LoadedScenario {
    pub scenario: SearchScenario,
    /// Set when the argument named a built-in game.
    pub preset: Option<Preset>,
}

pub fn load_scenario(arg: &str) -> Result<LoadedScenario, CliError> {
    if let Some(name) = arg.strip_prefix(PRESET_PREFIX) {
        let p = preset(name).map_err(|e| CliError::Usage(e.to_string()))?;
        return Ok(LoadedScenario {
            scenario: p.scenario.clone(),
            preset: Some(p),
        });
    }
    let text = fs::read_to_string(arg).map_err(|e| CliError::Usage(format!("cannot read scenario file {arg}: {e}")))?;
    let scenario = parse_scenario(&text).map_err(|e| CliError::Invalid(format!("{arg}: {e}")))?;
    Ok(LoadedScenario { scenario, preset: None })
}

pub const BUILTIN_PROFILES: &str = "greedy, greedy_highest, greedy_uniform_ties, uniform, always:<state>";

/// A profile file, a built-in name, or a profile suggested by the preset.
pub fn load_profile(arg: &str, loaded: &LoadedScenario) -> Result<StrategyProfile, CliError> {
    let s = &loaded.scenario;
    if Path::new(arg).is_file() {
        let text = fs::read_to_string(arg).map_err(|e| CliError::Usage(format!("cannot read profile file {arg}: {e}")))?;
        return parse_profile(&text, s).map_err(|e| CliError::Invalid(format!("{arg}: {e}")));
    }
    let builtin = match arg {
        "greedy" => Some(StrategyProfile::all_greedy(s)),
        "greedy_highest" => Some(StrategyProfile::uniform(s, Strategy::Greedy(TieBreak::HighestIndex))),
        "greedy_uniform_ties" => Some(StrategyProfile::uniform(s, Strategy::Greedy(TieBreak::UniformOverArgmax))),
        "uniform" => Some(StrategyProfile::uniform(s, Strategy::UniformRandom)),
        _ => None,
    };
    if let Some(p) = builtin {
        return Ok(p);
    }
    if let Some(state) = arg.strip_prefix("always:") {
        let k: usize = state
            .parse()
            .ok()
            .filter(|k| (1..=s.n_states()).contains(k))
            .ok_or_else(|| CliError::Usage(format!("always:<state> needs a state in 1..={}", s.n_states())))?;
        return Ok(StrategyProfile::uniform(s, Strategy::always(s.n_states(), k - 1)));
    }
    if let Some(p) = loaded.preset.as_ref().and_then(|p| p.profile(arg)) {
        return Ok(p.clone());
    }
    Err(CliError::Usage(format!(
        "profile {arg:?} is neither a file nor a built-in ({BUILTIN_PROFILES}{})",
        loaded
            .preset
            .as_ref()
            .map(|p| p.profiles.iter().map(|(n, _)| format!(", {n}")).collect::<String>())
            .unwrap_or_default()
    )))
}

/// SHA-256 of the canonical scenario document.
pub fn scenario_digest(s: &SearchScenario) -> String {
    hex::encode(Sha256::digest(serialize_scenario(s, Metadata::default()).as_bytes()))
}

//! Built-in scenarios, the document formats and random generators.

pub mod document;
pub mod presets;
pub mod random;

pub use document::{
    parse_probability, parse_profile, parse_scenario, parse_scenario_document, serialize_profile, serialize_scenario,
    DocumentError, Metadata, ProfileDocument, ScenarioDocument, SCHEMA_VERSION,
};
pub use presets::{
    fig2, greedy_profile, no_active_demo, overlook_demo, preset, two_state, Preset, PresetError, DOMINANT_Q, FIG2_DEFAULT_EPS,
    PRESET_NAMES, TWO_STATE_DEFAULT_C,
};
pub use random::{
    random_greedy_profile, random_opponents, random_scenario, random_scenario_with, random_scripted_strategy,
    RandomScenarioConfig,
};

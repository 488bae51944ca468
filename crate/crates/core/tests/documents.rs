use searchgame::scenarios::{
    parse_profile, parse_scenario, preset, random_opponents, random_scenario_with, serialize_profile, serialize_scenario,
    Metadata, RandomScenarioConfig,
};

#[test]
fn random_scenarios_round_trip() {
    let cfg = RandomScenarioConfig {
        max_overlook: 0.9,
        max_no_active: 0.4,
        matrices: 3,
        ..RandomScenarioConfig::new(5, 4)
    };
    for seed in 0..100 {
        let s = random_scenario_with(&cfg, seed);
        let text = serialize_scenario(&s, Metadata::default());
        let back = parse_scenario(&text).unwrap();
        assert_eq!(back, s, "seed {seed}");
        assert_eq!(serialize_scenario(&back, Metadata::default()), text);

        let profile = random_opponents(&s, 0, 2, seed);
        let ptext = serialize_profile(&profile).unwrap();
        let pback = parse_profile(&ptext, &s).unwrap();
        assert_eq!(serialize_profile(&pback).unwrap(), ptext, "seed {seed}");
    }
}

#[test]
fn every_preset_validates_and_round_trips() {
    for name in ["two_state(0.2)", "two_state_half", "fig2(0.001)", "overlook_demo", "no_active_demo"] {
        let p = preset(name).unwrap();
        let text = serialize_scenario(&p.scenario, Metadata::default());
        assert_eq!(parse_scenario(&text).unwrap(), p.scenario, "{name}");
        for (label, profile) in &p.profiles {
            if let Ok(ptext) = serialize_profile(profile) {
                parse_profile(&ptext, &p.scenario).unwrap_or_else(|e| panic!("{name}/{label}: {e}"));
            }
        }
    }
}

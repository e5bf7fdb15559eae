use envelope_vote::mechanism::settle_round;
use envelope_vote::sim::{generate_scenario, run_scenario, GeneratorConfig, RunReport, Scenario};
use envelope_vote::verification::{replay, run_property, Property};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn reports_round_trip_and_pass_surplus_through(
        players in 1usize..=12,
        alternatives in 2usize..=6,
        seed in any::<u64>(),
    ) {
        let cfg = GeneratorConfig { players, alternatives, omega: 100.0 };
        let s = generate_scenario(&cfg, seed).unwrap();
        prop_assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s.clone());
        let r = run_scenario(&s).unwrap();
        prop_assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r.clone());
        let d: Vec<_> = s.players().unwrap().into_iter().flat_map(|p| p.envelopes).collect();
        let out = settle_round(&d, s.tie_break).unwrap();
        prop_assert_eq!(r.surplus, out.surplus);
        prop_assert_eq!(r.selected, out.selected);
        prop_assert_eq!(r.players.len(), players);
    }
}

#[test]
fn every_recorded_seed_replays_its_violation() {
    for report in run_property(Property::All, 200, 3) {
        for &seed in &report.violation_seeds {
            let again = replay(&report.property, seed).unwrap();
            assert!(!again.passed(), "{} seed {seed}", report.property);
        }
    }
}

#[test]
fn indifferent_players_select_first_alternative() {
    let text = r#"{
        "m": 4, "omega": 50.0,
        "players": [
            {"valuations": [3.0, 3.0, 3.0, 3.0], "belief": {"p0": [0.25, 0.25, 0.25, 0.25], "p": 0.001}},
            {"valuations": [9.0, 9.0, 9.0, 9.0], "belief": {"p0": [0.1, 0.2, 0.3, 0.4], "p": 0.001}}
        ]
    }"#;
    let r = run_scenario(&Scenario::from_json(text).unwrap()).unwrap();
    assert_eq!(r.selected, 0);
    assert!(r.surplus.abs() < 1e-9);
}

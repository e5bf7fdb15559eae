//! Draws random equilibrium scenarios and settles each one.

use envelope_vote::sim::{generate_scenario, run_scenario, trial_seed, GeneratorConfig};

fn main() -> envelope_vote::Result<()> {
    let cfg = GeneratorConfig {
        players: 6,
        alternatives: 4,
        omega: 100.0,
    };
    for i in 0..5 {
        let scenario = generate_scenario(&cfg, trial_seed(1, 0, i))?;
        let report = run_scenario(&scenario)?;
        println!(
            "{}  winner {}  surplus {:.4}",
            &report.scenario_digest[..12],
            report.selected_label,
            report.surplus
        );
    }
    Ok(())
}

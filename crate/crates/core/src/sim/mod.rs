//! Scenario files, seeded generation and end-to-end settlement reports.

mod generate;
mod run;
mod scenario;
mod seed;

pub use generate::{generate_scenario, sample_simplex, GeneratorConfig};
pub use run::{
    run_scenario, run_scenario_checked, EnvelopeReport, PlayerReport, RunReport, CSV_HEADER,
};
pub use scenario::{worked_example, BeliefSpec, Player, PlayerSpec, Scenario, SybilSpec};
pub use seed::{trial_rng, trial_seed};

//! Property checks on single instances and seeded randomized suites that
//! aggregate them into [`PropertyReport`]s.

mod checks;
mod report;
mod suites;

pub use checks::{
    check_efficiency, check_participation, check_participation_gap, check_scale_ratio,
    check_split_inequality, check_surplus, check_sybil_proofness, participation_gain,
    single_participation_utility, two_thirds_pow, SybilPlan,
};
pub use report::{PropertyReport, MAX_RECORDED_SEEDS};
pub use suites::{
    consistency_suite, efficiency_suite, gradient_suite, oracle_suite, participation_gap_suite,
    participation_suite, probability_sum_suite, replay, run_property, scale_ratio_suite,
    split_inequality_suite, surplus_suite, sybil_optimal_split_suite, sybil_random_strategy_suite,
    Property,
};

//! Every property suite, plus the numerical checks, as JSON lines.

use envelope_vote::verification::{
    consistency_suite, gradient_suite, oracle_suite, probability_sum_suite, run_property, Property,
};

fn main() {
    let seed = 42;
    let mut reports = run_property(Property::All, 1_000, seed);
    reports.push(consistency_suite(1_000, seed));
    reports.push(oracle_suite(200, seed));
    reports.push(gradient_suite(1_000, seed));
    reports.push(probability_sum_suite(1_000, seed));
    for r in &reports {
        println!("{}", r.to_json());
    }
}

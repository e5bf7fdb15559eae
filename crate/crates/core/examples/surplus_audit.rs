//! Runs the surplus suite and replays the first violating round.

use envelope_vote::verification::{replay, surplus_suite};

fn main() -> envelope_vote::Result<()> {
    let report = surplus_suite(20_000, 7);
    println!("{}", report.to_json());
    if let Some(&seed) = report.violation_seeds.first() {
        let again = replay("surplus", seed)?;
        println!(
            "replayed seed {seed}: worst margin {:?}",
            again.worst_margin
        );
    }
    Ok(())
}

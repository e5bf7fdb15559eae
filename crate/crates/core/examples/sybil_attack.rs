//! Compares single participation with splitting into several envelopes,
//! both with equilibrium play per envelope and with the best joint votes.

use envelope_vote::agents::{optimal_votes, Belief, ValuationVector};
use envelope_vote::mechanism::{scale_param, VoteVector};
use envelope_vote::verification::{check_sybil_proofness, single_participation_utility, SybilPlan};

fn main() -> envelope_vote::Result<()> {
    let u = ValuationVector::new(vec![10.0, 4.0, 1.0], 100.0)?;
    let b = Belief::uniform(3, 0.001)?;
    let n_others = 1;
    let single = single_participation_utility(&u, &b, n_others)?;
    println!("single envelope: {single:.6}");

    for w in 2..=5 {
        let equal = SybilPlan::equal_split(&u, w)?;
        let split = check_sybil_proofness(&u, &b, n_others, std::slice::from_ref(&equal))?;
        // every envelope casts the single-envelope optimum at the inflated scale
        let a = scale_param(n_others + w)?;
        let x = optimal_votes(&u, &a)?;
        let joint: Vec<VoteVector> = vec![x; w];
        let plan = SybilPlan::with_strategies(&u, equal.split, joint)?;
        let coordinated = check_sybil_proofness(&u, &b, n_others, &[plan])?;
        println!(
            "w = {w}: equal split margin {:+.3e}, coordinated votes margin {:+.3e}",
            split.worst_margin.unwrap_or(0.0),
            coordinated.worst_margin.unwrap_or(0.0),
        );
    }
    Ok(())
}

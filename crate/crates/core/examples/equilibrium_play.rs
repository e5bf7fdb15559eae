//! Equilibrium votes for one player, checked against the numerical best
//! response, and the participation gain they earn.

use envelope_vote::agents::{
    best_response_numeric, equilibrium_utility, expected_utility, feasible_p_bound,
    optimal_deposits, optimal_votes, Belief, SearchSpec, ValuationVector,
};
use envelope_vote::mechanism::{scale_param, VoteVector};

fn main() -> envelope_vote::Result<()> {
    let u = ValuationVector::new(vec![10.0, 4.0, 1.0], 100.0)?;
    let a = scale_param(2)?;
    let p0 = vec![0.2, 0.3, 0.5];
    let p_max = feasible_p_bound(&p0, u.omega(), &a)?;
    let b = Belief::new(p0, 0.5 * p_max)?;

    let closed = optimal_votes(&u, &a)?;
    let numeric = best_response_numeric(&u, &b, &a, &SearchSpec::default())?;
    println!("deposits        = {:?}", optimal_deposits(&u)?.as_slice());
    println!("closed-form x*  = {:?}", closed.as_slice());
    println!("numerical x     = {:?}", numeric.as_slice());

    let on = expected_utility(&u, &b, &closed, &a)?;
    let off = expected_utility(&u, &b, &VoteVector::zeros(u.len()), &a)?;
    println!("participation gain (realized)    = {:.6e}", on - off);
    println!(
        "participation gain (closed form) = {:.6e}",
        equilibrium_utility(&u, &b, &a)? - off
    );
    Ok(())
}

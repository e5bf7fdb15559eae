use super::{check_index, Tally, TieBreakPolicy, VoteVector};
use crate::error::{Error, Result};

fn width(votes: &[VoteVector]) -> Result<usize> {
    let first = votes.first().ok_or(Error::NoParticipants)?;
    let m = first.len();
    if let Some(bad) = votes.iter().find(|v| v.len() != m) {
        return Err(Error::Shape {
            expected: m,
            found: bad.len(),
        });
    }
    Ok(m)
}

/// Sums votes over participants, in participant order.
pub fn tally(votes: &[VoteVector]) -> Result<Tally> {
    let m = width(votes)?;
    Ok(tally_with(votes, m, |_, v| v.as_slice().to_vec()))
}

// Tallies with participant `i`'s row replaced by `replace(i, row)`.
fn tally_with<F>(votes: &[VoteVector], m: usize, replace: F) -> Tally
where
    F: Fn(usize, &VoteVector) -> Vec<f64>,
{
    let mut totals = vec![0.0; m];
    for (i, v) in votes.iter().enumerate() {
        for (t, x) in totals.iter_mut().zip(replace(i, v)) {
            *t += x;
        }
    }
    Tally::new(totals)
}

/// Index of the largest total. Exact comparison; ties resolved by `tie`.
pub fn select(t: &Tally, tie: TieBreakPolicy) -> Result<usize> {
    let totals = t.totals();
    if totals.is_empty() {
        return Err(Error::Empty("tally"));
    }
    match tie {
        TieBreakPolicy::LowestIndex => {
            let mut best = 0;
            for (j, &v) in totals.iter().enumerate().skip(1) {
                if v > totals[best] {
                    best = j;
                }
            }
            Ok(best)
        }
    }
}

/// Winner with participant `i`'s votes all replaced by zero.
pub fn counterfactual_select_zeroed(
    votes: &[VoteVector],
    i: usize,
    tie: TieBreakPolicy,
) -> Result<usize> {
    let m = width(votes)?;
    check_index(i, votes.len())?;
    let t = tally_with(votes, m, |k, v| {
        if k == i {
            vec![0.0; m]
        } else {
            v.as_slice().to_vec()
        }
    });
    select(&t, tie)
}

/// Winner with participant `i`'s votes zeroed everywhere except alternative `j`.
pub fn counterfactual_select_only_j(
    votes: &[VoteVector],
    i: usize,
    j: usize,
    tie: TieBreakPolicy,
) -> Result<usize> {
    let m = width(votes)?;
    check_index(i, votes.len())?;
    check_index(j, m)?;
    let t = tally_with(votes, m, |k, v| {
        if k == i {
            let mut row = vec![0.0; m];
            row[j] = v.as_slice()[j];
            row
        } else {
            v.as_slice().to_vec()
        }
    });
    select(&t, tie)
}

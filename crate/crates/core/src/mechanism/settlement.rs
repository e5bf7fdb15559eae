use super::{
    check_index, counterfactual_select_only_j, counterfactual_select_zeroed, mean_other_deposits,
    scale_param, select, tally, votes_from_deposits, DepositVector, RoundOutcome, ScaleParam,
    Tally, TieBreakPolicy, TransferBreakdown, VoteVector,
};
use crate::error::{Error, Result};

/// Transfer owed to participant `i`.
///
/// For each alternative `j`:
/// * `r0_j = a · Σ_{r≠j} x_ir` unless `j` wins the tally with `i` zeroed,
/// * `r1_j = a · x_ij` unless `j` wins the tally with `i` reduced to coordinate `j`,
/// * `t_j` is the mean deposit on the other alternatives.
pub fn transfer_breakdown(
    votes: &[VoteVector],
    deposits: &[DepositVector],
    i: usize,
    a: &ScaleParam,
    tie: TieBreakPolicy,
) -> Result<TransferBreakdown> {
    if votes.len() != deposits.len() {
        return Err(Error::Shape {
            expected: votes.len(),
            found: deposits.len(),
        });
    }
    check_index(i, votes.len())?;
    let x = votes[i].as_slice();
    let d = &deposits[i];
    let m = x.len();
    if d.len() != m {
        return Err(Error::Shape {
            expected: m,
            found: d.len(),
        });
    }
    let scale = a.value();
    let zeroed_winner = counterfactual_select_zeroed(votes, i, tie)?;

    let mut r0 = vec![0.0; m];
    let mut r1 = vec![0.0; m];
    let mut t = vec![0.0; m];
    for j in 0..m {
        if zeroed_winner != j {
            let others: f64 = x
                .iter()
                .enumerate()
                .filter(|&(r, _)| r != j)
                .map(|(_, v)| v)
                .sum();
            r0[j] = scale * others;
        }
        if counterfactual_select_only_j(votes, i, j, tie)? != j {
            r1[j] = scale * x[j];
        }
        t[j] = mean_other_deposits(d, j)?;
    }
    let total = (0..m).map(|j| r0[j] + r1[j] + t[j]).sum();
    Ok(TransferBreakdown { r0, r1, t, total })
}

/// Settles a round: votes, winner, every transfer and the surplus.
///
/// `a` is computed from the number of envelopes. With a single alternative
/// no votes exist; the alternative is selected and deposits are refunded.
pub fn settle_round(deposits: &[DepositVector], tie: TieBreakPolicy) -> Result<RoundOutcome> {
    let first = deposits.first().ok_or(Error::NoParticipants)?;
    let m = first.len();
    if let Some(bad) = deposits.iter().find(|d| d.len() != m) {
        return Err(Error::Shape {
            expected: m,
            found: bad.len(),
        });
    }
    let scale = scale_param(deposits.len())?;

    if m == 1 {
        let transfers = deposits
            .iter()
            .map(|d| TransferBreakdown {
                r0: vec![0.0],
                r1: vec![0.0],
                t: vec![d.total()],
                total: d.total(),
            })
            .collect();
        return Ok(RoundOutcome {
            scale,
            selected: 0,
            tallies: Tally::new(vec![0.0]),
            votes: vec![VoteVector::zeros(1); deposits.len()],
            transfers,
            surplus: 0.0,
        });
    }

    let votes = deposits
        .iter()
        .map(|d| votes_from_deposits(d, &scale))
        .collect::<Result<Vec<_>>>()?;
    let tallies = tally(&votes)?;
    let selected = select(&tallies, tie)?;
    let transfers = (0..deposits.len())
        .map(|i| transfer_breakdown(&votes, deposits, i, &scale, tie))
        .collect::<Result<Vec<_>>>()?;
    let surplus = deposits
        .iter()
        .zip(&transfers)
        .map(|(d, r)| d.total() - r.total)
        .sum();

    Ok(RoundOutcome {
        scale,
        selected,
        tallies,
        votes,
        transfers,
        surplus,
    })
}

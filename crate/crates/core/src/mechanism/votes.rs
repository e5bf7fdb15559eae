use super::{check_index, DepositVector, ScaleParam, VoteVector, TOLERANCE};
use crate::error::{Error, Result};

/// `a = (3/2)^h`, by repeated multiplication so the value is bit-stable.
pub fn scale_param(h: usize) -> Result<ScaleParam> {
    if h == 0 {
        return Err(Error::InvalidParticipantCount(h));
    }
    let a = (0..h).fold(1.0_f64, |acc, _| acc * 1.5);
    if !a.is_finite() {
        return Err(Error::ScaleOverflow(h));
    }
    Ok(ScaleParam { h, a })
}

/// Mean of the deposits on every alternative except `j`.
pub fn mean_other_deposits(d: &DepositVector, j: usize) -> Result<f64> {
    let m = d.len();
    if m < 2 {
        return Err(Error::DegenerateAlternatives(m));
    }
    check_index(j, m)?;
    let others: f64 = d
        .as_slice()
        .iter()
        .enumerate()
        .filter(|&(r, _)| r != j)
        .map(|(_, v)| v)
        .sum();
    Ok(others / (m - 1) as f64)
}

/// Votes of one envelope: `x_j = (d_j − t_j) / (a (m − 1))`.
pub fn votes_from_deposits(d: &DepositVector, a: &ScaleParam) -> Result<VoteVector> {
    let m = d.len();
    if m < 2 {
        return Err(Error::DegenerateAlternatives(m));
    }
    let denom = a.value() * (m - 1) as f64;
    let x = (0..m)
        .map(|j| Ok((d.as_slice()[j] - mean_other_deposits(d, j)?) / denom))
        .collect::<Result<Vec<_>>>()?;
    Ok(VoteVector::new(x))
}

/// Inverse of [`votes_from_deposits`] for zero-sum votes:
/// `D_j = a (m − 1)² / m · x_j + shift`.
///
/// Any admissible `shift` yields the same votes; the smallest admissible one
/// is `max(0, −min_j coeff · x_j)`.
pub fn deposits_from_votes(x: &VoteVector, a: &ScaleParam, shift: f64) -> Result<DepositVector> {
    let m = x.len();
    if m < 2 {
        return Err(Error::DegenerateAlternatives(m));
    }
    let sum = x.sum();
    if !sum.is_finite() || sum.abs() > TOLERANCE {
        return Err(Error::NonZeroSum(sum));
    }
    let coeff = a.value() * ((m - 1) * (m - 1)) as f64 / m as f64;
    let mut d = Vec::with_capacity(m);
    for (j, &xj) in x.as_slice().iter().enumerate() {
        let value = coeff * xj + shift;
        if value < -TOLERANCE || value.is_nan() {
            return Err(Error::NegativeDeposit {
                alternative: j,
                value,
            });
        }
        d.push(value.max(0.0));
    }
    DepositVector::new(d)
}

/// Smallest shift accepted by [`deposits_from_votes`] for `x`.
pub fn minimal_shift(x: &VoteVector, a: &ScaleParam) -> f64 {
    let m = x.len();
    if m < 2 {
        return 0.0;
    }
    let coeff = a.value() * ((m - 1) * (m - 1)) as f64 / m as f64;
    x.as_slice()
        .iter()
        .map(|&xj| -coeff * xj)
        .fold(0.0, f64::max)
}

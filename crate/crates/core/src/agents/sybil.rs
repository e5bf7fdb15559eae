use super::{belief_probability, check_len, Belief, ValuationVector};
use crate::error::{Error, Result};
use crate::mechanism::{scale_param, VoteVector};

/// Total expected utility of one player who casts every vote vector in
/// `envelopes` as a separate envelope, next to `n_others` other envelopes.
///
/// The alternative's value uses the combined votes. Each envelope pays its
/// own deposit and collects its own transfers, whose counterfactuals zero
/// only that envelope; the player's other envelopes stay cast. `a` is taken
/// at `h = n_others + w`.
pub fn sybil_expected_utility(
    u: &ValuationVector,
    b: &Belief,
    envelopes: &[VoteVector],
    n_others: usize,
) -> Result<f64> {
    let m = u.len();
    check_len(m, b.len())?;
    if m < 2 {
        return Err(Error::DegenerateAlternatives(m));
    }
    if envelopes.is_empty() {
        return Err(Error::Empty("sybil envelopes"));
    }
    for x in envelopes {
        check_len(m, x.len())?;
    }
    let a = scale_param(n_others + envelopes.len())?;
    let scale = a.value();
    let k = (m - 1) as f64;

    let combined = sum_rows(envelopes.iter(), m);
    let probs = belief_probability(b, &VoteVector::new(combined))?;
    let mut total: f64 = u.values().iter().zip(&probs).map(|(v, p)| v * p).sum();

    for (q, x) in envelopes.iter().enumerate() {
        let rest = sum_rows(
            envelopes
                .iter()
                .enumerate()
                .filter(|&(r, _)| r != q)
                .map(|(_, v)| v),
            m,
        );
        let zeroed = belief_probability(b, &VoteVector::new(rest.clone()))?;
        let xs = x.as_slice();
        for j in 0..m {
            let mut only_j = rest.clone();
            only_j[j] += xs[j];
            let p_only_j = belief_probability(b, &VoteVector::new(only_j))?[j];
            let others: f64 = (0..m).filter(|&r| r != j).map(|r| xs[r]).sum();
            total += -scale * k * xs[j]
                + (1.0 - p_only_j) * scale * xs[j]
                + (1.0 - zeroed[j]) * scale * others;
        }
    }
    Ok(total)
}

fn sum_rows<'a>(rows: impl Iterator<Item = &'a VoteVector>, m: usize) -> Vec<f64> {
    let mut acc = vec![0.0; m];
    for row in rows {
        for (s, v) in acc.iter_mut().zip(row.as_slice()) {
            *s += v;
        }
    }
    acc
}

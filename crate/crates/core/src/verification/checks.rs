use serde::{Deserialize, Serialize};

use super::PropertyReport;
use crate::agents::{
    expected_utility, optimal_deposits, optimal_votes, participation_mass, sybil_expected_utility,
    Belief, ValuationVector,
};
use crate::error::{Error, Result};
use crate::mechanism::{
    scale_param, settle_round, DepositVector, ScaleParam, TieBreakPolicy, VoteVector, TOLERANCE,
};

/// One player casting `w ≥ 2` envelopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SybilPlan {
    /// Non-negative sub-valuations, one per envelope, summing to `u`.
    pub split: Vec<Vec<f64>>,
    /// Explicit votes per envelope. When absent each envelope plays the
    /// equilibrium votes of its sub-valuation.
    pub strategies: Option<Vec<VoteVector>>,
}

impl SybilPlan {
    pub fn new(u: &ValuationVector, split: Vec<Vec<f64>>) -> Result<Self> {
        let plan = Self {
            split,
            strategies: None,
        };
        plan.validate(u)?;
        Ok(plan)
    }

    pub fn with_strategies(
        u: &ValuationVector,
        split: Vec<Vec<f64>>,
        strategies: Vec<VoteVector>,
    ) -> Result<Self> {
        let plan = Self {
            split,
            strategies: Some(strategies),
        };
        plan.validate(u)?;
        Ok(plan)
    }

    /// `w` equal shares of `u`.
    pub fn equal_split(u: &ValuationVector, w: usize) -> Result<Self> {
        let share: Vec<f64> = u.values().iter().map(|v| v / w as f64).collect();
        Self::new(u, vec![share; w])
    }

    pub fn w(&self) -> usize {
        self.split.len()
    }

    pub fn validate(&self, u: &ValuationVector) -> Result<()> {
        let m = u.len();
        if self.split.is_empty() {
            return Err(Error::Empty("sybil split"));
        }
        for row in &self.split {
            if row.len() != m {
                return Err(Error::Shape {
                    expected: m,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidValuation("negative split entry".into()));
            }
        }
        for (j, &want) in u.values().iter().enumerate() {
            let got: f64 = self.split.iter().map(|row| row[j]).sum();
            if (got - want).abs() > TOLERANCE * want.max(1.0) {
                return Err(Error::InvalidValuation(format!(
                    "split sums to {got} on alternative {j}, valuation is {want}"
                )));
            }
        }
        if let Some(s) = &self.strategies {
            if s.len() != self.split.len() {
                return Err(Error::Shape {
                    expected: self.split.len(),
                    found: s.len(),
                });
            }
        }
        Ok(())
    }

    /// Vote vectors the plan casts when `a` is taken at `h`.
    pub fn envelopes(&self, u: &ValuationVector, a: &ScaleParam) -> Result<Vec<VoteVector>> {
        match &self.strategies {
            Some(s) => Ok(s.clone()),
            None => self
                .split
                .iter()
                .map(|row| optimal_votes(&ValuationVector::new(row.clone(), u.omega())?, a))
                .collect(),
        }
    }
}

/// Every player plays the equilibrium once; the winner must maximize the
/// summed valuations. With welfare ties (within 1e-9) the vote tally must
/// tie on the same set.
pub fn check_efficiency(
    valuations: &[ValuationVector],
    tie: TieBreakPolicy,
) -> Result<PropertyReport> {
    let first = valuations.first().ok_or(Error::NoParticipants)?;
    let m = first.len();
    let deposits = valuations
        .iter()
        .map(optimal_deposits)
        .collect::<Result<Vec<_>>>()?;
    let out = settle_round(&deposits, tie)?;
    let a = out.scale.value();

    let welfare: Vec<f64> = (0..m)
        .map(|j| valuations.iter().map(|u| u.values()[j]).sum())
        .collect();
    let totals = out.tallies.totals();
    // welfare differences map onto tally differences by m / (2a(m − 1))
    let to_welfare = 2.0 * a * (m - 1) as f64 / m as f64;

    let best_welfare = argmax_set(&welfare, TOLERANCE);
    let mut report = PropertyReport::new("efficiency");
    if let [winner] = best_welfare[..] {
        let runner_up = (0..m)
            .filter(|&j| j != winner)
            .map(|j| totals[j])
            .fold(f64::NEG_INFINITY, f64::max);
        let margin = if m > 1 {
            (totals[winner] - runner_up) * to_welfare
        } else {
            0.0
        };
        report.record(out.selected == winner, margin);
    } else {
        let best_tally = argmax_set(totals, TOLERANCE / to_welfare);
        report.record(best_tally == best_welfare, 0.0);
    }
    Ok(report)
}

fn argmax_set(values: &[f64], tol: f64) -> Vec<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len())
        .filter(|&j| values[j] >= max - tol)
        .collect()
}

/// Utility of single equilibrium participation, evaluated directly.
pub fn single_participation_utility(
    u: &ValuationVector,
    b: &Belief,
    n_others: usize,
) -> Result<f64> {
    let a = scale_param(n_others + 1)?;
    expected_utility(u, b, &optimal_votes(u, &a)?, &a)
}

/// Each plan's total utility must not exceed single participation
/// (within 1e-9). Margins are `single − sybil`.
pub fn check_sybil_proofness(
    u: &ValuationVector,
    b: &Belief,
    n_others: usize,
    plans: &[SybilPlan],
) -> Result<PropertyReport> {
    let single = single_participation_utility(u, b, n_others)?;
    let mut report = PropertyReport::new("sybil");
    for plan in plans {
        plan.validate(u)?;
        let a = scale_param(n_others + plan.w())?;
        let envelopes = plan.envelopes(u, &a)?;
        let sybil = sybil_expected_utility(u, b, &envelopes, n_others)?;
        let margin = single - sybil;
        report.record(margin >= -TOLERANCE, margin);
    }
    Ok(report)
}

/// The quadratic form `m² Σ_j v_j² − (Σ_j v_j)²`.
fn spread(v: &[f64]) -> f64 {
    let m = v.len() as f64;
    let total: f64 = v.iter().sum();
    m * m * v.iter().map(|x| x * x).sum::<f64>() - total * total
}

/// `(2/3)^w`.
pub fn two_thirds_pow(w: usize) -> f64 {
    (0..w).fold(1.0, |acc, _| acc * (2.0 / 3.0))
}

/// Checks, for the plan's split `u_q`,
/// `m² Σ_j (Σ_q u_qj)² − (Σ_q Σ_j u_qj)² ≥ (2/3)^w · Σ_q (m² Σ_j u_qj² − (Σ_j u_qj)²)`.
/// Margins are `(lhs − rhs) / max(|lhs|, |rhs|, 1)`.
pub fn check_split_inequality(plan: &SybilPlan) -> Result<PropertyReport> {
    let m = plan.split.first().ok_or(Error::Empty("sybil split"))?.len();
    let combined: Vec<f64> = (0..m)
        .map(|j| plan.split.iter().map(|row| row[j]).sum())
        .collect();
    let lhs = spread(&combined);
    let rhs = two_thirds_pow(plan.w()) * plan.split.iter().map(|row| spread(row)).sum::<f64>();
    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    let mut report = PropertyReport::new("split-inequality");
    report.record(lhs >= rhs - TOLERANCE * scale, (lhs - rhs) / scale);
    Ok(report)
}

/// Compares `a_n / a_{n+w−1}` against `(2/3)^w`, relative tolerance 1e-12.
pub fn check_scale_ratio(n: usize, w: usize) -> Result<PropertyReport> {
    if w == 0 {
        return Err(Error::InvalidParticipantCount(0));
    }
    let ratio = scale_param(n)?.value() / scale_param(n + w - 1)?.value();
    let target = two_thirds_pow(w);
    let rel = (ratio - target).abs() / target;
    let mut report = PropertyReport::new("scale-ratio-identity");
    report.record(rel <= 1e-12, -rel);
    Ok(report)
}

/// Realized participation gain: utility at the equilibrium votes minus
/// utility of abstaining, both from the expected-utility function.
pub fn participation_gain(u: &ValuationVector, b: &Belief, a: &ScaleParam) -> Result<f64> {
    let m = u.len();
    let on = expected_utility(u, b, &optimal_votes(u, a)?, a)?;
    let off = expected_utility(u, b, &VoteVector::zeros(m), a)?;
    Ok(on - off)
}

/// The gain must be strictly positive for a non-indifferent player and zero
/// for an indifferent one.
pub fn check_participation(
    u: &ValuationVector,
    b: &Belief,
    a: &ScaleParam,
) -> Result<PropertyReport> {
    let gain = participation_gain(u, b, a)?;
    let mut report = PropertyReport::new("participation");
    if u.is_indifferent(TOLERANCE) {
        report.record(gain.abs() <= TOLERANCE, -gain.abs());
    } else {
        report.record(gain > 0.0, gain);
    }
    Ok(report)
}

/// The realized gain must equal `p/(4a) · Σ_j (m² u_j² − (Σ_s u_s)²)` to a
/// relative 1e-9. The gain is a difference of two utilities, so it is only
/// known to about 1e-12 of their size; that floor is added to the
/// tolerance. Margins are minus the relative error.
pub fn check_participation_gap(
    u: &ValuationVector,
    b: &Belief,
    a: &ScaleParam,
) -> Result<PropertyReport> {
    let m = u.len();
    let on = expected_utility(u, b, &optimal_votes(u, a)?, a)?;
    let off = expected_utility(u, b, &VoteVector::zeros(m), a)?;
    let gain = on - off;
    let closed = b.p() / (4.0 * a.value()) * participation_mass(u.values());
    let floor = 1e-12 * on.abs().max(off.abs());
    let diff = (gain - closed).abs();
    let mut report = PropertyReport::new("participation-gap");
    report.record(
        diff <= 1e-9 * closed.abs() + floor,
        -diff / closed.abs().max(floor),
    );
    Ok(report)
}

/// Settles the round and requires every transfer and the surplus to be
/// non-negative (within 1e-9). Margin is `min(min_i R_i, S)`.
pub fn check_surplus(deposits: &[DepositVector], tie: TieBreakPolicy) -> Result<PropertyReport> {
    let out = settle_round(deposits, tie)?;
    let min_transfer = out
        .transfers
        .iter()
        .map(|t| t.total)
        .fold(f64::INFINITY, f64::min);
    let paid_in: f64 = deposits.iter().map(|d| d.total()).sum();
    let paid_out = out.total_transfers();
    let ok =
        min_transfer >= -TOLERANCE && out.surplus >= -TOLERANCE && paid_in >= paid_out - TOLERANCE;
    let mut report = PropertyReport::new("surplus");
    report.record(ok, min_transfer.min(out.surplus));
    Ok(report)
}

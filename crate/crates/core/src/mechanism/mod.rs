//! The mechanism pipeline: deposits → votes → selection → counterfactual
//! transfers → settlement.
//!
//! Everything here is a pure function of its inputs. Alternatives are
//! indexed from zero; the alternative printed as `A2` is index `1`.

mod selection;
mod settlement;
mod votes;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use selection::{counterfactual_select_only_j, counterfactual_select_zeroed, select, tally};
pub use settlement::{settle_round, transfer_breakdown};
pub use votes::{
    deposits_from_votes, mean_other_deposits, minimal_shift, scale_param, votes_from_deposits,
};

/// Absolute tolerance used for zero-sum and accounting identities.
pub const TOLERANCE: f64 = 1e-9;

/// Non-negative money amounts pledged by one envelope, one per alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DepositVector(Vec<f64>);

impl DepositVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("deposit vector"));
        }
        if let Some((alternative, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::NegativeDeposit { alternative, value });
        }
        Ok(Self(values))
    }

    /// The same amount `c` on each of `m` alternatives.
    pub fn uniform(m: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Adds `c ≥ 0` to every entry.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|d| d + c).collect())
    }
}

impl TryFrom<Vec<f64>> for DepositVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<DepositVector> for Vec<f64> {
    fn from(d: DepositVector) -> Self {
        d.0
    }
}

/// Signed vote intensities, one per alternative.
///
/// Vectors produced by [`votes_from_deposits`] sum to zero; hand-built ones
/// need not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VoteVector(Vec<f64>);

impl VoteVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for VoteVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// The participant count `h` together with the scale `a = (3/2)^h`.
///
/// `h` counts envelopes, not players: a Sybil attacker's extra envelopes
/// raise `a` for everybody.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleParam {
    h: usize,
    a: f64,
}

impl ScaleParam {
    pub fn participants(&self) -> usize {
        self.h
    }

    pub fn value(&self) -> f64 {
        self.a
    }
}

/// Per-alternative vote totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tally(Vec<f64>);

impl Tally {
    pub fn new(totals: Vec<f64>) -> Self {
        Self(totals)
    }

    pub fn totals(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// How equal maxima in a tally are resolved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreakPolicy {
    /// Ties go to the alternative with the smallest index.
    #[default]
    LowestIndex,
}

/// The components of one envelope's transfer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferBreakdown {
    /// Paid on alternatives that lose the tally with this envelope zeroed.
    pub r0: Vec<f64>,
    /// Paid on alternatives that lose the tally with only that coordinate kept.
    pub r1: Vec<f64>,
    /// Mean deposit on the other alternatives; always refunded.
    pub t: Vec<f64>,
    pub total: f64,
}

/// Result of settling one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub scale: ScaleParam,
    pub selected: usize,
    pub tallies: Tally,
    pub votes: Vec<VoteVector>,
    pub transfers: Vec<TransferBreakdown>,
    /// Total deposits minus total transfers.
    pub surplus: f64,
}

impl RoundOutcome {
    pub fn total_transfers(&self) -> f64 {
        self.transfers.iter().map(|t| t.total).sum()
    }
}

pub(crate) fn check_index(index: usize, len: usize) -> Result<()> {
    if index < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index, len })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deposit_vector_rejects_negative_and_nan() {
        assert!(matches!(
            DepositVector::new(vec![1.0, -0.5]),
            Err(Error::NegativeDeposit { alternative: 1, .. })
        ));
        assert!(DepositVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(DepositVector::new(vec![]).is_err());
        assert_eq!(DepositVector::new(vec![0.0, 2.5]).unwrap().total(), 2.5);
    }

    #[test]
    fn deposit_vector_deserialization_validates() {
        let ok: DepositVector = serde_json::from_str("[1.0, 0.0, 3.5]").unwrap();
        assert_eq!(ok.as_slice(), &[1.0, 0.0, 3.5]);
        assert!(serde_json::from_str::<DepositVector>("[1.0, -2.0]").is_err());
    }

    #[test]
    fn tie_break_serializes_kebab_case() {
        let s = serde_json::to_string(&TieBreakPolicy::LowestIndex).unwrap();
        assert_eq!(s, "\"lowest-index\"");
    }
}

//! Player-side model: beliefs, expected utility, equilibrium strategies and a
//! numerical best-response oracle.

mod oracle;
mod sybil;
mod utility;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::{votes_from_deposits, DepositVector, ScaleParam, VoteVector};

pub use oracle::{best_response_numeric, SearchSpec};
pub use sybil::sybil_expected_utility;
pub(crate) use utility::participation_mass;
pub use utility::{
    belief_probability, equilibrium_utility, expected_utility, optimal_deposits, optimal_votes,
    utility_gradient,
};

const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// A player's private value for each alternative, bounded by `omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationVector {
    values: Vec<f64>,
    omega: f64,
}

impl ValuationVector {
    pub fn new(values: Vec<f64>, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidValuation(format!(
                "bound omega must be positive, got {omega}"
            )));
        }
        if values.is_empty() {
            return Err(Error::Empty("valuation vector"));
        }
        if let Some((j, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0 && **v <= omega))
        {
            return Err(Error::InvalidValuation(format!(
                "value {v} for alternative {j} outside [0, {omega}]"
            )));
        }
        Ok(Self { values, omega })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every alternative is valued the same, within `tol`.
    pub fn is_indifferent(&self, tol: f64) -> bool {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo <= tol
    }
}

/// Beliefs in the linear family: baseline selection probabilities `p0`
/// and the marginal probability `p` of one vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    p0: Vec<f64>,
    p: f64,
}

impl Belief {
    pub fn new(p0: Vec<f64>, p: f64) -> Result<Self> {
        if p0.is_empty() {
            return Err(Error::Empty("prior probabilities"));
        }
        if let Some((j, v)) = p0
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0 && **v <= 1.0))
        {
            return Err(Error::InvalidBelief(format!(
                "prior {v} for alternative {j} outside [0, 1]"
            )));
        }
        let sum: f64 = p0.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidBelief(format!("priors sum to {sum}")));
        }
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidBelief(format!(
                "marginal probability must be positive, got {p}"
            )));
        }
        Ok(Self { p0, p })
    }

    /// Uniform priors over `m` alternatives.
    pub fn uniform(m: usize, p: f64) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m], p)
    }

    pub fn p0(&self) -> &[f64] {
        &self.p0
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.p0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p0.is_empty()
    }

    /// Same priors, different marginal probability.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.p0.clone(), p)
    }

    /// Fails unless `p` is within [`feasible_p_bound`] for `omega` and `a`.
    pub fn check_feasible(&self, omega: f64, a: &ScaleParam) -> Result<()> {
        let bound = feasible_p_bound(&self.p0, omega, a)?;
        if self.p > bound * (1.0 + PROBABILITY_TOLERANCE) {
            return Err(Error::InvalidBelief(format!(
                "marginal probability {} exceeds feasible bound {bound}",
                self.p
            )));
        }
        Ok(())
    }
}

/// Largest admissible marginal probability:
/// `0.5 · min_j min(p0_j, 1 − p0_j) · 2a(m − 1) / (ω m)`.
///
/// Equilibrium votes satisfy `|x_j| ≤ ω / (2a)`, so the probabilities they
/// induce stay inside `[0, 1]` with room for twice that magnitude.
pub fn feasible_p_bound(p0: &[f64], omega: f64, a: &ScaleParam) -> Result<f64> {
    let m = p0.len();
    if m < 2 {
        return Err(Error::DegenerateAlternatives(m));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Config(format!(
            "omega must be positive, got {omega}"
        )));
    }
    let margin = p0
        .iter()
        .map(|&q| q.min(1.0 - q))
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    Ok(0.5 * margin * 2.0 * a.value() * (m - 1) as f64 / (omega * m as f64))
}

/// Equilibrium deposits and the votes they produce, one entry per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub deposits: Vec<DepositVector>,
    pub votes: Vec<VoteVector>,
}

impl StrategyProfile {
    /// Every player deposits `(m − 1)/2 · u`; votes follow from the deposits.
    pub fn optimal(valuations: &[ValuationVector], a: &ScaleParam) -> Result<Self> {
        let deposits = valuations
            .iter()
            .map(optimal_deposits)
            .collect::<Result<Vec<_>>>()?;
        let votes = deposits
            .iter()
            .map(|d| votes_from_deposits(d, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { deposits, votes })
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Shape { expected, found })
    }
}

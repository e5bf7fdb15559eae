use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agents::{optimal_deposits, Belief, ValuationVector};
use crate::error::{Error, Result};
use crate::mechanism::{
    deposits_from_votes, minimal_shift, scale_param, DepositVector, ScaleParam, TieBreakPolicy,
    VoteVector, TOLERANCE,
};

/// A complete experiment: alternatives, players and how each of them plays.
///
/// This is the on-disk JSON schema; see the README for an example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub m: usize,
    pub omega: f64,
    #[serde(default)]
    pub tie_break: TieBreakPolicy,
    #[serde(default)]
    pub seed: u64,
    pub players: Vec<PlayerSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerSpec {
    pub valuations: Vec<f64>,
    pub belief: BeliefSpec,
    /// Fixed deposits mode: submit exactly these deposits instead of the
    /// equilibrium ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deposits: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sybil: Option<SybilSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeliefSpec {
    pub p0: Vec<f64>,
    pub p: f64,
}

/// A player splitting into several envelopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SybilSpec {
    /// Sub-valuations, one per envelope, summing to the player's valuations.
    pub split: Vec<Vec<f64>>,
    /// Explicit zero-sum votes per envelope; when absent each envelope plays
    /// the equilibrium deposits of its sub-valuation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategies: Option<Vec<Vec<f64>>>,
}

/// A validated player with its envelopes expanded.
#[derive(Debug, Clone)]
pub struct Player {
    pub valuation: ValuationVector,
    pub belief: Belief,
    pub envelopes: Vec<DepositVector>,
    pub plays_equilibrium: bool,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    /// Hex SHA-256 of the compact JSON encoding.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn envelope_count(&self) -> usize {
        self.players
            .iter()
            .map(|p| p.sybil.as_ref().map_or(1, |s| s.split.len()))
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        self.players().map(|_| ())
    }

    /// Validates every invariant and expands envelopes.
    pub fn players(&self) -> Result<Vec<Player>> {
        if self.m < 2 {
            return Err(Error::Scenario(format!(
                "need at least two alternatives, got {}",
                self.m
            )));
        }
        if self.players.is_empty() {
            return Err(Error::NoParticipants);
        }
        let h = self.envelope_count();
        let scale = scale_param(h)?;
        self.players
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                self.build_player(spec, &scale)
                    .map_err(|e| Error::Scenario(format!("player {i}: {e}")))
            })
            .collect()
    }

    fn build_player(&self, spec: &PlayerSpec, scale: &ScaleParam) -> Result<Player> {
        let m = self.m;
        let shape = |found: usize| {
            if found == m {
                Ok(())
            } else {
                Err(Error::Shape { expected: m, found })
            }
        };
        shape(spec.valuations.len())?;
        shape(spec.belief.p0.len())?;
        let valuation = ValuationVector::new(spec.valuations.clone(), self.omega)?;
        let belief = Belief::new(spec.belief.p0.clone(), spec.belief.p)?;
        belief.check_feasible(self.omega, scale)?;

        let (envelopes, plays_equilibrium) = match (&spec.deposits, &spec.sybil) {
            (Some(_), Some(_)) => {
                return Err(Error::Scenario(
                    "fixed deposits and a sybil plan are exclusive".into(),
                ))
            }
            (Some(d), None) => {
                shape(d.len())?;
                (vec![DepositVector::new(d.clone())?], false)
            }
            (None, Some(plan)) => (sybil_envelopes(&valuation, plan, scale)?, false),
            (None, None) => (vec![optimal_deposits(&valuation)?], true),
        };
        Ok(Player {
            valuation,
            belief,
            envelopes,
            plays_equilibrium,
        })
    }
}

fn sybil_envelopes(
    valuation: &ValuationVector,
    plan: &SybilSpec,
    scale: &ScaleParam,
) -> Result<Vec<DepositVector>> {
    let m = valuation.len();
    if plan.split.len() < 2 {
        return Err(Error::Scenario(
            "a sybil plan needs at least two envelopes".into(),
        ));
    }
    for row in &plan.split {
        if row.len() != m {
            return Err(Error::Shape {
                expected: m,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Scenario("split entries must be non-negative".into()));
        }
    }
    for j in 0..m {
        let sum: f64 = plan.split.iter().map(|row| row[j]).sum();
        let want = valuation.values()[j];
        if (sum - want).abs() > TOLERANCE * want.abs().max(1.0) {
            return Err(Error::Scenario(format!(
                "split sums to {sum} on alternative {j}, valuation is {want}"
            )));
        }
    }
    match &plan.strategies {
        Some(rows) => {
            if rows.len() != plan.split.len() {
                return Err(Error::Shape {
                    expected: plan.split.len(),
                    found: rows.len(),
                });
            }
            rows.iter()
                .map(|row| {
                    if row.len() != m {
                        return Err(Error::Shape {
                            expected: m,
                            found: row.len(),
                        });
                    }
                    let x = VoteVector::new(row.clone());
                    deposits_from_votes(&x, scale, minimal_shift(&x, scale))
                })
                .collect()
        }
        None => plan
            .split
            .iter()
            .map(|row| optimal_deposits(&ValuationVector::new(row.clone(), valuation.omega())?))
            .collect(),
    }
}

/// Two players, three alternatives, deposits pinned so that the votes are
/// `(3, 1, −4)` and `(−3, 2, 1)` at `a = 2.25`.
///
/// Valuations equal the deposits, so the pinned deposits are also the
/// equilibrium ones.
pub fn worked_example() -> Scenario {
    let player = |d: [f64; 3]| PlayerSpec {
        valuations: d.to_vec(),
        belief: BeliefSpec {
            p0: vec![1.0 / 3.0; 3],
            p: 0.001,
        },
        deposits: Some(d.to_vec()),
        sybil: None,
    };
    Scenario {
        m: 3,
        omega: 100.0,
        tie_break: TieBreakPolicy::LowestIndex,
        seed: 0,
        players: vec![player([21.0, 15.0, 0.0]), player([0.0, 15.0, 12.0])],
    }
}

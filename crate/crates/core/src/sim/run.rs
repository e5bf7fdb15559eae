use serde::{Deserialize, Serialize};

use super::scenario::{Player, Scenario};
use crate::agents::{expected_utility, sybil_expected_utility};
use crate::error::{Error, Result};
use crate::mechanism::{settle_round, DepositVector, RoundOutcome};
use crate::verification::{check_efficiency, check_surplus, PropertyReport};

/// Settlement of one scenario, per player and per envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario_digest: String,
    pub seed: u64,
    pub alternatives: usize,
    pub envelopes: usize,
    pub scale: f64,
    /// Zero-based index of the selected alternative.
    pub selected: usize,
    /// One-based label of the selected alternative, `A1`, `A2`, ...
    pub selected_label: String,
    pub tallies: Vec<f64>,
    pub surplus: f64,
    pub players: Vec<PlayerReport>,
    pub envelope_details: Vec<EnvelopeReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub properties: Option<Vec<PropertyReport>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerReport {
    pub player: usize,
    /// Indices into `envelope_details`.
    pub envelopes: Vec<usize>,
    pub deposits: f64,
    pub transfers: f64,
    /// Value of the selected alternative minus deposits plus transfers.
    pub realized_utility: f64,
    /// Ex-ante utility under the player's belief; absent when the votes
    /// push a probability outside `[0, 1]`.
    pub expected_utility: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub envelope: usize,
    pub player: usize,
    pub deposits: Vec<f64>,
    pub votes: Vec<f64>,
    pub r0: Vec<f64>,
    pub r1: Vec<f64>,
    pub t: Vec<f64>,
    pub transfer: f64,
}

/// Column order of [`RunReport::to_csv`].
pub const CSV_HEADER: [&str; 21] = [
    "scenario_digest",
    "seed",
    "alternatives",
    "envelopes",
    "scale",
    "selected",
    "selected_label",
    "tallies",
    "surplus",
    "envelope",
    "player",
    "deposits",
    "votes",
    "r0",
    "r1",
    "t",
    "transfer",
    "player_deposits",
    "player_transfers",
    "realized_utility",
    "expected_utility",
];

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    /// One row per envelope; round and player values repeat on each row and
    /// vectors are joined with `;`. Property outcomes are not included.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for e in &self.envelope_details {
            let p = &self.players[e.player];
            w.write_record([
                self.scenario_digest.clone(),
                self.seed.to_string(),
                self.alternatives.to_string(),
                self.envelopes.to_string(),
                self.scale.to_string(),
                self.selected.to_string(),
                self.selected_label.clone(),
                join(&self.tallies),
                self.surplus.to_string(),
                e.envelope.to_string(),
                e.player.to_string(),
                join(&e.deposits),
                join(&e.votes),
                join(&e.r0),
                join(&e.r1),
                join(&e.t),
                e.transfer.to_string(),
                p.deposits.to_string(),
                p.transfers.to_string(),
                p.realized_utility.to_string(),
                p.expected_utility
                    .map(|v| v.to_string())
                    .unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    /// Property violations across all attached reports.
    pub fn violations(&self) -> u64 {
        self.properties.iter().flatten().map(|r| r.violations).sum()
    }
}

/// Validates and settles a scenario.
pub fn run_scenario(s: &Scenario) -> Result<RunReport> {
    let players = s.players()?;
    let envelopes: Vec<DepositVector> = players
        .iter()
        .flat_map(|p| p.envelopes.iter().cloned())
        .collect();
    let outcome = settle_round(&envelopes, s.tie_break)?;
    build_report(s, &players, &outcome)
}

/// [`run_scenario`] plus the surplus check on the settled round and, when
/// every player plays the equilibrium once, the efficiency check.
pub fn run_scenario_checked(s: &Scenario) -> Result<RunReport> {
    let players = s.players()?;
    let envelopes: Vec<DepositVector> = players
        .iter()
        .flat_map(|p| p.envelopes.iter().cloned())
        .collect();
    let outcome = settle_round(&envelopes, s.tie_break)?;
    let mut report = build_report(s, &players, &outcome)?;
    let mut props = vec![check_surplus(&envelopes, s.tie_break)?];
    if players.iter().all(|p| p.plays_equilibrium) {
        let vals: Vec<_> = players.iter().map(|p| p.valuation.clone()).collect();
        props.push(check_efficiency(&vals, s.tie_break)?);
    }
    report.properties = Some(props);
    Ok(report)
}

fn build_report(s: &Scenario, players: &[Player], out: &RoundOutcome) -> Result<RunReport> {
    let h = out.votes.len();
    let mut envelope_details = Vec::with_capacity(h);
    let mut player_reports = Vec::with_capacity(players.len());
    let mut next = 0;
    for (i, player) in players.iter().enumerate() {
        let ids: Vec<usize> = (next..next + player.envelopes.len()).collect();
        next += player.envelopes.len();
        for (&e, d) in ids.iter().zip(&player.envelopes) {
            let tr = &out.transfers[e];
            envelope_details.push(EnvelopeReport {
                envelope: e,
                player: i,
                deposits: d.as_slice().to_vec(),
                votes: out.votes[e].as_slice().to_vec(),
                r0: tr.r0.clone(),
                r1: tr.r1.clone(),
                t: tr.t.clone(),
                transfer: tr.total,
            });
        }
        let deposits: f64 = player.envelopes.iter().map(DepositVector::total).sum();
        let transfers: f64 = ids.iter().map(|&e| out.transfers[e].total).sum();
        let realized = player.valuation.values()[out.selected] - deposits + transfers;

        let votes: Vec<_> = ids.iter().map(|&e| out.votes[e].clone()).collect();
        let expected = if votes.len() == 1 {
            expected_utility(&player.valuation, &player.belief, &votes[0], &out.scale)
        } else {
            sybil_expected_utility(&player.valuation, &player.belief, &votes, h - votes.len())
        };
        let expected = match expected {
            Ok(v) => Some(v),
            Err(Error::BeliefInfeasible { .. }) => None,
            Err(e) => return Err(e),
        };
        player_reports.push(PlayerReport {
            player: i,
            envelopes: ids,
            deposits,
            transfers,
            realized_utility: realized,
            expected_utility: expected,
        });
    }
    Ok(RunReport {
        scenario_digest: s.digest(),
        seed: s.seed,
        alternatives: s.m,
        envelopes: h,
        scale: out.scale.value(),
        selected: out.selected,
        selected_label: format!("A{}", out.selected + 1),
        tallies: out.tallies.totals().to_vec(),
        surplus: out.surplus,
        players: player_reports,
        envelope_details,
        properties: None,
    })
}

use serde::{Deserialize, Serialize};

/// How many violation seeds a report keeps.
pub const MAX_RECORDED_SEEDS: usize = 32;

/// Outcome of one property over many trials.
///
/// `worst_margin` is the smallest margin seen; margins are oriented so that
/// negative values mean the property failed or came closest to failing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub trials: u64,
    pub violations: u64,
    pub worst_margin: Option<f64>,
    /// Trial seeds that reproduce violations, capped at [`MAX_RECORDED_SEEDS`].
    pub violation_seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_seed: Option<u64>,
}

impl PropertyReport {
    pub fn new(property: impl Into<String>) -> Self {
        Self {
            property: property.into(),
            trials: 0,
            violations: 0,
            worst_margin: None,
            violation_seeds: Vec::new(),
            root_seed: None,
        }
    }

    /// Records one checked instance.
    pub fn record(&mut self, ok: bool, margin: f64) {
        self.trials += 1;
        if !ok {
            self.violations += 1;
        }
        self.note_margin(margin);
    }

    fn note_margin(&mut self, margin: f64) {
        if margin.is_nan() {
            return;
        }
        self.worst_margin = Some(match self.worst_margin {
            Some(w) => w.min(margin),
            None => margin,
        });
    }

    /// Folds a single trial's report into this one, remembering `seed` when
    /// the trial found violations.
    pub fn absorb(&mut self, trial: PropertyReport, seed: u64) {
        self.trials += trial.trials;
        self.violations += trial.violations;
        if let Some(m) = trial.worst_margin {
            self.note_margin(m);
        }
        if trial.violations > 0 && self.violation_seeds.len() < MAX_RECORDED_SEEDS {
            self.violation_seeds.push(seed);
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorb_tracks_seeds_and_margins() {
        let mut suite = PropertyReport::new("demo");
        let mut good = PropertyReport::new("demo");
        good.record(true, 0.5);
        let mut bad = PropertyReport::new("demo");
        bad.record(false, -2.0);
        bad.record(true, 1.0);
        suite.absorb(good, 11);
        suite.absorb(bad, 12);
        assert_eq!(suite.trials, 3);
        assert_eq!(suite.violations, 1);
        assert_eq!(suite.worst_margin, Some(-2.0));
        assert_eq!(suite.violation_seeds, vec![12]);
        assert!(!suite.passed());
    }

    #[test]
    fn json_round_trip() {
        let mut r = PropertyReport::new("surplus");
        r.record(true, 3.25);
        r.root_seed = Some(42);
        let back: PropertyReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}

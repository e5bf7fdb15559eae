use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scenario::{BeliefSpec, PlayerSpec, Scenario};
use super::seed::trial_rng;
use crate::agents::feasible_p_bound;
use crate::error::{Error, Result};
use crate::mechanism::{scale_param, TieBreakPolicy};

/// Shape of randomly generated scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub players: usize,
    pub alternatives: usize,
    pub omega: f64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.players == 0 {
            return Err(Error::Config("need at least one player".into()));
        }
        if self.alternatives < 2 {
            return Err(Error::Config(format!(
                "need at least two alternatives, got {}",
                self.alternatives
            )));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::Config(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        Ok(())
    }
}

/// A random probability vector: independent draws in `(0, 1]`, normalized.
pub fn sample_simplex<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

/// Draws a scenario where every player plays the equilibrium once.
///
/// Valuations are uniform on `[0, ω]`, priors uniform on the simplex and the
/// marginal probability uniform on `(0, p_max]` with `p_max` taken at
/// `h = players`.
pub fn generate_scenario(config: &GeneratorConfig, seed: u64) -> Result<Scenario> {
    config.validate()?;
    let GeneratorConfig {
        players: n,
        alternatives: m,
        omega,
    } = *config;
    let scale = scale_param(n)?;
    let mut rng = trial_rng(seed);
    let players = (0..n)
        .map(|_| {
            let valuations = (0..m).map(|_| rng.gen_range(0.0..=omega)).collect();
            let p0 = sample_simplex(&mut rng, m);
            let p_max = feasible_p_bound(&p0, omega, &scale)?;
            let p = p_max * (1.0 - rng.gen::<f64>());
            Ok(PlayerSpec {
                valuations,
                belief: BeliefSpec { p0, p },
                deposits: None,
                sybil: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario {
        m,
        omega,
        tie_break: TieBreakPolicy::LowestIndex,
        seed,
        players,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_scenario() {
        let cfg = GeneratorConfig {
            players: 5,
            alternatives: 4,
            omega: 100.0,
        };
        assert_eq!(
            generate_scenario(&cfg, 9).unwrap(),
            generate_scenario(&cfg, 9).unwrap()
        );
        assert_ne!(
            generate_scenario(&cfg, 9).unwrap(),
            generate_scenario(&cfg, 10).unwrap()
        );
    }

    #[test]
    fn smallest_scenario_shape() {
        let cfg = GeneratorConfig {
            players: 1,
            alternatives: 2,
            omega: 1.0,
        };
        let s = generate_scenario(&cfg, 0).unwrap();
        assert_eq!(s.players.len(), 1);
        let p0 = &s.players[0].belief.p0;
        assert_eq!(p0.len(), 2);
        assert!((p0.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_configs() {
        for cfg in [
            GeneratorConfig {
                players: 0,
                alternatives: 3,
                omega: 1.0,
            },
            GeneratorConfig {
                players: 2,
                alternatives: 1,
                omega: 1.0,
            },
            GeneratorConfig {
                players: 2,
                alternatives: 3,
                omega: -1.0,
            },
        ] {
            assert!(matches!(generate_scenario(&cfg, 1), Err(Error::Config(_))));
        }
    }

    #[test]
    fn generated_scenarios_satisfy_invariants() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for seed in 0..10_000u64 {
            let cfg = GeneratorConfig {
                players: rng.gen_range(1..=20),
                alternatives: rng.gen_range(2..=6),
                omega: 100.0,
            };
            let s = generate_scenario(&cfg, seed).unwrap();
            s.validate().unwrap();
        }
    }
}

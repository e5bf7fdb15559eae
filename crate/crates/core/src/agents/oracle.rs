use serde::{Deserialize, Serialize};

use super::{belief_probability, expected_utility, utility_gradient, Belief, ValuationVector};
use crate::error::{Error, Result};
use crate::mechanism::{ScaleParam, VoteVector};

/// Search settings for [`best_response_numeric`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    /// Grid points per axis in the coarse stage.
    pub grid_points: usize,
    /// Maximum refinement iterations.
    pub refine_steps: usize,
    /// Half-width of the search box per coordinate; `None` means `ω / a`.
    pub radius: Option<f64>,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            grid_points: 21,
            refine_steps: 100,
            radius: None,
        }
    }
}

fn project_zero_sum(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], s: f64, d: &[f64]) -> VoteVector {
    VoteVector::new(x.iter().zip(d).map(|(p, q)| p + s * q).collect())
}

/// Numerically maximizes [`expected_utility`] over zero-sum vote vectors.
///
/// A coarse line grid along each axis of the zero-sum subspace is followed by
/// steepest ascent with an exact secant step on the directional derivative.
/// Only the utility and its gradient are used; the closed-form optimum is not.
pub fn best_response_numeric(
    u: &ValuationVector,
    b: &Belief,
    a: &ScaleParam,
    search: &SearchSpec,
) -> Result<VoteVector> {
    let m = u.len();
    if m < 2 {
        return Err(Error::DegenerateAlternatives(m));
    }
    if b.len() != m {
        return Err(Error::Shape {
            expected: m,
            found: b.len(),
        });
    }
    if search.grid_points < 2 {
        return Err(Error::Config("grid needs at least two points".into()));
    }
    let radius = search.radius.unwrap_or(u.omega() / a.value());
    check_box(b, radius)?;

    // coarse stage
    let mut x = vec![0.0; m];
    let mut best = expected_utility(u, b, &VoteVector::new(x.clone()), a)?;
    let steps = search.grid_points - 1;
    for axis in 0..m {
        let mut dir = vec![0.0; m];
        dir[axis] = 1.0;
        project_zero_sum(&mut dir);
        let start = x.clone();
        for g in 0..=steps {
            let t = -radius + 2.0 * radius * g as f64 / steps as f64;
            let cand = axpy(&start, t, &dir);
            if cand.as_slice().iter().any(|v| v.abs() > radius) {
                continue;
            }
            if let Ok(val) = expected_utility(u, b, &cand, a) {
                if val > best {
                    best = val;
                    x = cand.into_inner();
                }
            }
        }
    }

    // refinement
    for _ in 0..search.refine_steps {
        let mut g = utility_gradient(u, b, &VoteVector::new(x.clone()), a)?;
        project_zero_sum(&mut g);
        let norm = g.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if norm == 0.0 {
            break;
        }
        let probe = 0.1 * radius / norm;
        let mut g2 = utility_gradient(u, b, &axpy(&x, probe, &g), a)?;
        project_zero_sum(&mut g2);
        let d0 = dot(&g, &g);
        let d1 = dot(&g2, &g);
        let step = if d1 < d0 {
            probe * d0 / (d0 - d1)
        } else {
            probe
        };
        let next = axpy(&x, step, &g).into_inner();
        let moved = next
            .iter()
            .zip(&x)
            .fold(0.0_f64, |acc, (p, q)| acc.max((p - q).abs()));
        x = next;
        if moved <= 1e-15 * radius.max(1.0) {
            break;
        }
    }
    project_zero_sum(&mut x);
    Ok(VoteVector::new(x))
}

// The most extreme zero-sum vector in the box moves probability by
// `p · m / (m − 1) · radius`.
fn check_box(b: &Belief, radius: f64) -> Result<()> {
    let m = b.len();
    let reach = b.p() * m as f64 / (m - 1) as f64 * radius;
    for (j, &q) in b.p0().iter().enumerate() {
        for probability in [q - reach, q + reach] {
            if !(-1e-9..=1.0 + 1e-9).contains(&probability) {
                return Err(Error::BeliefInfeasible {
                    alternative: j,
                    probability,
                });
            }
        }
    }
    // the origin is always evaluated
    belief_probability(b, &VoteVector::zeros(m)).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{feasible_p_bound, optimal_votes};
    use crate::mechanism::scale_param;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_diff(a: &VoteVector, b: &VoteVector) -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .fold(0.0, |acc, (p, q)| f64::max(acc, (p - q).abs()))
    }

    #[test]
    fn two_alternatives() {
        let u = ValuationVector::new(vec![6.0, 2.0], 10.0).unwrap();
        let a = scale_param(1).unwrap();
        let b = Belief::uniform(2, 0.01).unwrap();
        let x = best_response_numeric(&u, &b, &a, &SearchSpec::default()).unwrap();
        assert!((x.as_slice()[0] - 4.0 / 3.0).abs() < 1e-6);
        assert!((x.as_slice()[1] + 4.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn indifferent_player_stays_out() {
        let u = ValuationVector::new(vec![3.0; 4], 10.0).unwrap();
        let a = scale_param(3).unwrap();
        let b = Belief::new(vec![0.1, 0.2, 0.3, 0.4], 0.001).unwrap();
        let x = best_response_numeric(&u, &b, &a, &SearchSpec::default()).unwrap();
        assert!(x.as_slice().iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn matches_closed_form_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let m = rng.gen_range(2..=6);
            let u =
                ValuationVector::new((0..m).map(|_| rng.gen_range(0.0..100.0)).collect(), 100.0)
                    .unwrap();
            let a = scale_param(rng.gen_range(1..=8)).unwrap();
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let p0: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let bound = feasible_p_bound(&p0, 100.0, &a).unwrap();
            let b = Belief::new(p0, bound * rng.gen_range(0.01..=1.0)).unwrap();
            let x = best_response_numeric(&u, &b, &a, &SearchSpec::default()).unwrap();
            let closed = optimal_votes(&u, &a).unwrap();
            assert!(max_diff(&x, &closed) <= 1e-6, "{x:?} vs {closed:?}");
        }
    }

    #[test]
    fn box_outside_feasible_region_is_rejected() {
        let u = ValuationVector::new(vec![6.0, 2.0], 100.0).unwrap();
        let a = scale_param(1).unwrap();
        let b = Belief::uniform(2, 0.2).unwrap();
        assert!(matches!(
            best_response_numeric(&u, &b, &a, &SearchSpec::default()),
            Err(Error::BeliefInfeasible { .. })
        ));
    }
}

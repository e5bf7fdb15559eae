use super::{check_len, Belief, ValuationVector, PROBABILITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::mechanism::{DepositVector, ScaleParam, VoteVector};

fn sum_except(values: &[f64], j: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|&(r, _)| r != j)
        .map(|(_, v)| v)
        .sum()
}

/// Selection probabilities a player expects after casting `x`:
/// `P_j = p0_j + p · (x_j − mean_{r≠j} x_r)`.
pub fn belief_probability(b: &Belief, x: &VoteVector) -> Result<Vec<f64>> {
    let m = b.len();
    check_len(m, x.len())?;
    if m < 2 {
        return Err(Error::DegenerateAlternatives(m));
    }
    let xs = x.as_slice();
    let k = (m - 1) as f64;
    (0..m)
        .map(|j| {
            let prob = b.p0()[j] + b.p() * (xs[j] - sum_except(xs, j) / k);
            if !(-PROBABILITY_TOLERANCE..=1.0 + PROBABILITY_TOLERANCE).contains(&prob) {
                return Err(Error::BeliefInfeasible {
                    alternative: j,
                    probability: prob,
                });
            }
            Ok(prob)
        })
        .collect()
}

// Probability of `j` when the player keeps only coordinate `j` of `x`.
fn only_j_probability(b: &Belief, x: &VoteVector, j: usize) -> Result<f64> {
    let mut row = vec![0.0; x.len()];
    row[j] = x.as_slice()[j];
    Ok(belief_probability(b, &VoteVector::new(row))?[j])
}

fn check_shapes(u: &ValuationVector, b: &Belief, x: &VoteVector) -> Result<usize> {
    let m = u.len();
    check_len(m, b.len())?;
    check_len(m, x.len())?;
    if m < 2 {
        return Err(Error::DegenerateAlternatives(m));
    }
    Ok(m)
}

/// Expected utility of casting votes `x` when everyone else plays the
/// equilibrium.
///
/// Per alternative: expected value of the alternative, minus the deposit net
/// of its refunded `t_j`, plus the two outcome-contingent transfers weighted
/// by the probability that `j` loses the matching counterfactual.
pub fn expected_utility(
    u: &ValuationVector,
    b: &Belief,
    x: &VoteVector,
    a: &ScaleParam,
) -> Result<f64> {
    let m = check_shapes(u, b, x)?;
    let probs = belief_probability(b, x)?;
    let xs = x.as_slice();
    let scale = a.value();
    let k = (m - 1) as f64;

    let mut total = 0.0;
    for j in 0..m {
        let value = u.values()[j] * probs[j];
        let deposit = -scale * k * xs[j];
        let lose_only_j = 1.0 - only_j_probability(b, x, j)?;
        let lose_zeroed = 1.0 - b.p0()[j];
        total +=
            value + deposit + lose_only_j * scale * xs[j] + lose_zeroed * scale * sum_except(xs, j);
    }
    Ok(total)
}

/// Analytic gradient of [`expected_utility`] with respect to each vote.
pub fn utility_gradient(
    u: &ValuationVector,
    b: &Belief,
    x: &VoteVector,
    a: &ScaleParam,
) -> Result<Vec<f64>> {
    let m = check_shapes(u, b, x)?;
    // same feasibility contract as expected_utility
    belief_probability(b, x)?;
    for j in 0..m {
        only_j_probability(b, x, j)?;
    }
    let xs = x.as_slice();
    let us = u.values();
    let (p, scale, k) = (b.p(), a.value(), (m - 1) as f64);

    Ok((0..m)
        .map(|c| {
            let value = p * (us[c] - sum_except(us, c) / k);
            let deposit = -scale * k;
            let only_j = scale * (1.0 - b.p0()[c] - 2.0 * p * xs[c]);
            let zeroed: f64 = (0..m)
                .filter(|&j| j != c)
                .map(|j| scale * (1.0 - b.p0()[j]))
                .sum();
            value + deposit + only_j + zeroed
        })
        .collect())
}

/// Equilibrium votes `x*_j = (u_j − mean_{r≠j} u_r) / (2a)`.
///
/// They do not depend on the player's belief.
pub fn optimal_votes(u: &ValuationVector, a: &ScaleParam) -> Result<VoteVector> {
    let m = u.len();
    if m < 2 {
        return Err(Error::DegenerateAlternatives(m));
    }
    let us = u.values();
    let k = (m - 1) as f64;
    Ok(VoteVector::new(
        (0..m)
            .map(|j| (us[j] - sum_except(us, j) / k) / (2.0 * a.value()))
            .collect(),
    ))
}

/// Equilibrium deposits `D*_j = (m − 1)/2 · u_j`. No knowledge of `a` needed.
pub fn optimal_deposits(u: &ValuationVector) -> Result<DepositVector> {
    let m = u.len();
    if m < 2 {
        return Err(Error::DegenerateAlternatives(m));
    }
    let half = (m - 1) as f64 / 2.0;
    DepositVector::new(u.values().iter().map(|v| half * v).collect())
}

/// Closed-form equilibrium utility
/// `Σ_j p0_j u_j + p/(4a) · Σ_j (m² u_j² − (Σ_s u_s)²)`.
///
/// Evaluating [`expected_utility`] at [`optimal_votes`] gives the same base
/// term but a participation term smaller by `(m − 1)²`; the two agree only
/// for two alternatives.
pub fn equilibrium_utility(u: &ValuationVector, b: &Belief, a: &ScaleParam) -> Result<f64> {
    let m = u.len();
    check_len(m, b.len())?;
    let us = u.values();
    let base: f64 = us.iter().zip(b.p0()).map(|(v, q)| v * q).sum();
    Ok(base + b.p() / (4.0 * a.value()) * participation_mass(us))
}

/// `Σ_j (m² u_j² − (Σ_s u_s)²)`, non-negative by Cauchy–Schwarz.
pub(crate) fn participation_mass(u: &[f64]) -> f64 {
    let m = u.len() as f64;
    let total: f64 = u.iter().sum();
    u.iter().map(|v| m * m * v * v - total * total).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::{scale_param, votes_from_deposits};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn val(v: &[f64]) -> ValuationVector {
        ValuationVector::new(v.to_vec(), 100.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn probabilities() {
        let b = Belief::uniform(3, 0.01).unwrap();
        assert_eq!(
            belief_probability(&b, &VoteVector::zeros(3)).unwrap(),
            b.p0()
        );
        let p = belief_probability(&b, &VoteVector::new(vec![3.0, 1.0, -4.0])).unwrap();
        let third = 1.0 / 3.0;
        let want = [third + 0.045, third + 0.015, third - 0.06];
        for (x, y) in p.iter().zip(want) {
            assert!(close(*x, y, 1e-12));
        }
        assert!(close(p.iter().sum(), 1.0, 1e-12));
    }

    #[test]
    fn probabilities_sum_to_one_for_non_zero_sum_votes() {
        let b = Belief::new(vec![0.2, 0.3, 0.5], 0.01).unwrap();
        let p = belief_probability(&b, &VoteVector::new(vec![2.0, 5.0, 1.0])).unwrap();
        assert!(close(p.iter().sum(), 1.0, 1e-12));
    }

    #[test]
    fn infeasible_probability_is_reported() {
        let b = Belief::uniform(2, 0.5).unwrap();
        let err = belief_probability(&b, &VoteVector::new(vec![2.0, -2.0])).unwrap_err();
        assert!(matches!(
            err,
            Error::BeliefInfeasible { alternative: 0, .. }
        ));
        let u = val(&[1.0, 0.0]);
        let a = scale_param(1).unwrap();
        assert!(expected_utility(&u, &b, &VoteVector::new(vec![2.0, -2.0]), &a).is_err());
    }

    #[test]
    fn utility_without_votes_is_prior_value() {
        let u = val(&[10.0, 4.0, 1.0]);
        let b = Belief::new(vec![0.2, 0.3, 0.5], 0.001).unwrap();
        let a = scale_param(2).unwrap();
        let got = expected_utility(&u, &b, &VoteVector::zeros(3), &a).unwrap();
        assert!(close(got, 2.0 + 1.2 + 0.5, 1e-12));
    }

    #[test]
    fn optimal_vote_examples() {
        let a = scale_param(2).unwrap();
        let x = optimal_votes(&val(&[10.0, 4.0, 1.0]), &a).unwrap();
        for (p, q) in x.as_slice().iter().zip([5.0 / 3.0, -1.0 / 3.0, -4.0 / 3.0]) {
            assert!(close(*p, q, 1e-12));
        }
        let a1 = scale_param(1).unwrap();
        let x = optimal_votes(&val(&[6.0, 2.0]), &a1).unwrap();
        assert!(close(x.as_slice()[0], 4.0 / 3.0, 1e-12));
        assert!(close(x.as_slice()[1], -4.0 / 3.0, 1e-12));
        let x = optimal_votes(&val(&[7.0; 4]), &a).unwrap();
        assert!(x.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn optimal_deposit_examples() {
        let d = optimal_deposits(&val(&[10.0, 4.0, 1.0])).unwrap();
        assert_eq!(d.as_slice(), &[10.0, 4.0, 1.0]);
        let d = optimal_deposits(&val(&[0.0, 0.0])).unwrap();
        assert_eq!(d.as_slice(), &[0.0, 0.0]);
        let d = optimal_deposits(&val(&[1.0, 0.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(d.as_slice(), &[2.0, 0.0, 0.0, 0.0, 0.0]);
        for h in 1..=8 {
            let a = scale_param(h).unwrap();
            let x = votes_from_deposits(&optimal_deposits(&val(&[10.0, 4.0, 1.0])).unwrap(), &a)
                .unwrap();
            let y = optimal_votes(&val(&[10.0, 4.0, 1.0]), &a).unwrap();
            for (p, q) in x.as_slice().iter().zip(y.as_slice()) {
                assert!(close(*p, *q, 1e-12));
            }
        }
    }

    #[test]
    fn equilibrium_utility_examples() {
        let a = scale_param(2).unwrap();
        let b = Belief::uniform(3, 0.001).unwrap();
        let got = equilibrium_utility(&val(&[10.0, 4.0, 1.0]), &b, &a).unwrap();
        // 5 + 0.001 · 378 / 9
        assert!(close(got, 5.042, 1e-12));
        let got = equilibrium_utility(&val(&[5.0, 5.0, 5.0]), &b, &a).unwrap();
        assert!(close(got, 5.0, 1e-12));
    }

    #[test]
    fn closed_form_matches_realized_utility_for_two_alternatives() {
        let u = val(&[6.0, 2.0]);
        let b = Belief::uniform(2, 0.001).unwrap();
        let a = scale_param(1).unwrap();
        let x = optimal_votes(&u, &a).unwrap();
        let realized = expected_utility(&u, &b, &x, &a).unwrap();
        let closed = equilibrium_utility(&u, &b, &a).unwrap();
        assert!(close(realized, closed, 1e-12));
        // 4 + 0.001 · (4·36 + 4·4 − 2·64) / (4 · 1.5)
        assert!(close(realized, 4.0 + 0.001 * 32.0 / 6.0, 1e-12));
    }

    #[test]
    fn closed_form_overstates_realized_gain_by_m_minus_one_squared() {
        let b = Belief::uniform(3, 0.001).unwrap();
        let a = scale_param(2).unwrap();
        let u = val(&[10.0, 4.0, 1.0]);
        let x = optimal_votes(&u, &a).unwrap();
        let realized = expected_utility(&u, &b, &x, &a).unwrap() - 5.0;
        let closed = equilibrium_utility(&u, &b, &a).unwrap() - 5.0;
        assert!(close(realized, 0.0105, 1e-12));
        assert!(close(closed, 0.042, 1e-12));
        assert!(close(closed, 4.0 * realized, 1e-12));
    }

    fn random_instance(rng: &mut ChaCha8Rng) -> (ValuationVector, Belief, ScaleParam, VoteVector) {
        let m = rng.gen_range(2..=6);
        let u = ValuationVector::new((0..m).map(|_| rng.gen_range(0.0..100.0)).collect(), 100.0)
            .unwrap();
        let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let a = scale_param(rng.gen_range(1..=8)).unwrap();
        let p0: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let bound = crate::agents::feasible_p_bound(&p0, 100.0, &a).unwrap();
        let b = Belief::new(p0, bound * rng.gen_range(0.1..=1.0)).unwrap();
        let x = VoteVector::new(
            (0..m)
                .map(|_| rng.gen_range(-1.0..1.0) * 50.0 / a.value())
                .collect(),
        );
        (u, b, a, x)
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let (u, b, a, x) = random_instance(&mut rng);
            let g = utility_gradient(&u, &b, &x, &a).unwrap();
            let step = 1e-5;
            let norm = g.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            for c in 0..x.len() {
                let mut plus = x.clone().into_inner();
                let mut minus = plus.clone();
                plus[c] += step;
                minus[c] -= step;
                let fd = (expected_utility(&u, &b, &VoteVector::new(plus), &a).unwrap()
                    - expected_utility(&u, &b, &VoteVector::new(minus), &a).unwrap())
                    / (2.0 * step);
                assert!((fd - g[c]).abs() <= 1e-5 * norm, "fd {fd} vs {}", g[c]);
            }
        }
    }

    #[test]
    fn gradient_vanishes_at_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (u, b, a, _) = random_instance(&mut rng);
            let x = optimal_votes(&u, &a).unwrap();
            let g = utility_gradient(&u, &b, &x, &a).unwrap();
            assert!(g.iter().all(|v| v.abs() <= 1e-7), "{g:?}");
        }
    }

    #[test]
    fn indifferent_player_has_flat_zero_sum_directions() {
        let u = val(&[4.0, 4.0, 4.0]);
        let b = Belief::new(vec![0.2, 0.5, 0.3], 0.001).unwrap();
        let a = scale_param(3).unwrap();
        let x = VoteVector::zeros(3);
        let g = utility_gradient(&u, &b, &x, &a).unwrap();
        let dir = [1.0, -0.5, -0.5];
        let along: f64 = g.iter().zip(dir).map(|(g, d)| g * d).sum();
        assert!(along.abs() < 1e-12);
        // finite difference along the same direction
        let h = 1e-4;
        let at = |s: f64| {
            expected_utility(
                &u,
                &b,
                &VoteVector::new(dir.iter().map(|d| d * s).collect()),
                &a,
            )
            .unwrap()
        };
        assert!(((at(h) - at(-h)) / (2.0 * h)).abs() < 1e-9);
    }

    #[test]
    fn utility_is_concave() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let (u, b, a, x) = random_instance(&mut rng);
            let y = VoteVector::new(
                x.as_slice()
                    .iter()
                    .map(|v| -0.5 * v + 1.0 / a.value())
                    .collect(),
            );
            let lambda: f64 = rng.gen_range(0.01..0.99);
            let mix = VoteVector::new(
                x.as_slice()
                    .iter()
                    .zip(y.as_slice())
                    .map(|(p, q)| lambda * p + (1.0 - lambda) * q)
                    .collect(),
            );
            let (ux, uy, um) = match (
                expected_utility(&u, &b, &x, &a),
                expected_utility(&u, &b, &y, &a),
                expected_utility(&u, &b, &mix, &a),
            ) {
                (Ok(p), Ok(q), Ok(r)) => (p, q, r),
                _ => continue,
            };
            assert!(um >= lambda * ux + (1.0 - lambda) * uy - 1e-9);
        }
    }
}

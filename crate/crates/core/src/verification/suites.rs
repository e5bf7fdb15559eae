use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checks::{
    check_efficiency, check_participation, check_participation_gap, check_scale_ratio,
    check_split_inequality, check_surplus, check_sybil_proofness, SybilPlan,
};
use super::PropertyReport;
use crate::agents::{
    belief_probability, best_response_numeric, expected_utility, feasible_p_bound,
    optimal_deposits, optimal_votes, utility_gradient, Belief, SearchSpec, ValuationVector,
};
use crate::error::{Error, Result};
use crate::mechanism::{
    scale_param, votes_from_deposits, DepositVector, ScaleParam, TieBreakPolicy, VoteVector,
};
use crate::sim::{generate_scenario, sample_simplex, trial_rng, trial_seed, GeneratorConfig};

const OMEGA: f64 = 100.0;
const MAX_PLAYERS: usize = 20;
const MAX_ALTERNATIVES: usize = 6;
const MAX_SURPLUS_ENVELOPES: usize = 8;
const MAX_SCALE_EXPONENT: usize = 8;
const TIE: TieBreakPolicy = TieBreakPolicy::LowestIndex;

// One keystream per suite so suites never share trial seeds.
const STREAM_EFFICIENCY: u64 = 1;
const STREAM_SYBIL_SPLIT: u64 = 2;
const STREAM_SYBIL_RANDOM: u64 = 3;
const STREAM_SPLIT_INEQUALITY: u64 = 4;
const STREAM_SCALE_RATIO: u64 = 5;
const STREAM_PARTICIPATION: u64 = 6;
const STREAM_PARTICIPATION_GAP: u64 = 7;
const STREAM_SURPLUS: u64 = 8;
const STREAM_CONSISTENCY: u64 = 9;
const STREAM_ORACLE: u64 = 10;
const STREAM_GRADIENT: u64 = 11;
const STREAM_PROBABILITY: u64 = 12;

/// Property groups selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Efficiency,
    Sybil,
    Participation,
    Surplus,
    SplitInequality,
    All,
}

impl Property {
    pub const NAMES: [&'static str; 6] = [
        "efficiency",
        "sybil",
        "participation",
        "surplus",
        "split-inequality",
        "all",
    ];
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Property::Efficiency => "efficiency",
            Property::Sybil => "sybil",
            Property::Participation => "participation",
            Property::Surplus => "surplus",
            Property::SplitInequality => "split-inequality",
            Property::All => "all",
        };
        f.write_str(name)
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "efficiency" => Property::Efficiency,
            "sybil" => Property::Sybil,
            "participation" => Property::Participation,
            "surplus" => Property::Surplus,
            "split-inequality" => Property::SplitInequality,
            "all" => Property::All,
            other => return Err(Error::Config(format!("unknown property {other:?}"))),
        })
    }
}

/// Runs the suites behind `property`, `trials` instances each, from
/// `root_seed`. Sybil suites run `trials` instances per envelope count.
pub fn run_property(property: Property, trials: u64, root_seed: u64) -> Vec<PropertyReport> {
    let mut out = Vec::new();
    let all = property == Property::All;
    if all || property == Property::Efficiency {
        out.push(efficiency_suite(trials, root_seed));
    }
    if all || property == Property::Sybil {
        out.push(sybil_optimal_split_suite(trials, root_seed));
        out.push(sybil_random_strategy_suite(trials, root_seed));
    }
    if all || property == Property::SplitInequality {
        out.push(split_inequality_suite(trials, root_seed));
        out.push(scale_ratio_suite(trials, root_seed));
    }
    if all || property == Property::Participation {
        out.push(participation_suite(trials, root_seed));
        out.push(participation_gap_suite(trials, root_seed));
    }
    if all || property == Property::Surplus {
        out.push(surplus_suite(trials, root_seed));
    }
    out
}

type Trial = fn(u64) -> Result<PropertyReport>;

fn trial_fn(property: &str) -> Option<Trial> {
    Some(match property {
        "efficiency" => efficiency_trial,
        "sybil-optimal-split" => sybil_optimal_split_trial,
        "sybil-random-strategy" => sybil_random_strategy_trial,
        "split-inequality" => split_inequality_trial,
        "scale-ratio-identity" => scale_ratio_trial,
        "participation" => participation_trial,
        "participation-gap" => participation_gap_trial,
        "surplus" => surplus_trial,
        "equilibrium-consistency" => consistency_trial,
        "best-response-oracle" => oracle_trial,
        "gradient-finite-difference" => gradient_trial,
        "probability-sum" => probability_sum_trial,
        _ => return None,
    })
}

/// Re-runs the single trial behind a recorded seed of the named report.
pub fn replay(property: &str, seed: u64) -> Result<PropertyReport> {
    let f = trial_fn(property)
        .ok_or_else(|| Error::Config(format!("unknown property report {property:?}")))?;
    Ok(run_one(property, f, seed))
}

fn run_one(name: &str, f: Trial, seed: u64) -> PropertyReport {
    match f(seed) {
        Ok(mut r) => {
            r.property = name.to_string();
            r
        }
        // a trial that cannot be evaluated counts against the property
        Err(_) => {
            let mut r = PropertyReport::new(name);
            r.record(false, f64::NAN);
            r
        }
    }
}

fn run_suite(
    name: &str,
    stream: u64,
    trials: u64,
    root_seed: u64,
    seed_of: impl Fn(u64) -> u64,
) -> PropertyReport {
    let f = trial_fn(name).expect("suite has a trial function");
    let mut report = PropertyReport::new(name);
    report.root_seed = Some(root_seed);
    for i in 0..trials {
        let seed = seed_of(trial_seed(root_seed, stream, i));
        report.absorb(run_one(name, f, seed), seed);
    }
    report
}

fn plain_suite(name: &str, stream: u64, trials: u64, root_seed: u64) -> PropertyReport {
    run_suite(name, stream, trials, root_seed, |s| s)
}

// Envelope-count suites encode w − 2 in the two low bits of each trial seed,
// so a seed alone replays the trial and every w gets exactly `trials` runs.
fn per_w_suite(name: &str, stream: u64, trials: u64, root_seed: u64) -> PropertyReport {
    let f = trial_fn(name).expect("suite has a trial function");
    let mut report = PropertyReport::new(name);
    report.root_seed = Some(root_seed);
    for i in 0..trials {
        for w in 2..=5u64 {
            let seed = (trial_seed(root_seed, stream, i * 4 + (w - 2)) & !3) | (w - 2);
            report.absorb(run_one(name, f, seed), seed);
        }
    }
    report
}

fn envelopes_of(seed: u64) -> usize {
    2 + (seed & 3) as usize
}

fn random_valuation(rng: &mut ChaCha8Rng, m: usize) -> Result<ValuationVector> {
    ValuationVector::new((0..m).map(|_| rng.gen_range(0.0..=OMEGA)).collect(), OMEGA)
}

// Valuation that is constant with probability `constant`.
fn maybe_constant_valuation(
    rng: &mut ChaCha8Rng,
    m: usize,
    constant: f64,
) -> Result<ValuationVector> {
    if rng.gen_bool(constant) {
        let c = rng.gen_range(0.0..=OMEGA);
        ValuationVector::new(vec![c; m], OMEGA)
    } else {
        random_valuation(rng, m)
    }
}

// Priors on the simplex and `p` uniform on `(0, p_max]` at `a`.
fn random_belief(rng: &mut ChaCha8Rng, m: usize, a: &ScaleParam) -> Result<Belief> {
    let p0 = sample_simplex(rng, m);
    let p_max = feasible_p_bound(&p0, OMEGA, a)?;
    let p = p_max * (1.0 - rng.gen::<f64>());
    Belief::new(p0, p)
}

// Non-negative split of `u` into `w` rows; equal shares with probability
// `equal`.
fn random_split(rng: &mut ChaCha8Rng, u: &ValuationVector, w: usize, equal: f64) -> Vec<Vec<f64>> {
    let m = u.len();
    if rng.gen_bool(equal) {
        return vec![u.values().iter().map(|v| v / w as f64).collect(); w];
    }
    let mut rows = vec![vec![0.0; m]; w];
    for j in 0..m {
        let weights = sample_simplex(rng, w);
        for (row, share) in rows.iter_mut().zip(weights) {
            row[j] = u.values()[j] * share;
        }
    }
    rows
}

fn zero_sum(mut v: Vec<f64>) -> VoteVector {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    VoteVector::new(v)
}

/// Equilibrium scenarios with up to 20 players and 6 alternatives; a quarter
/// of them have valuations rounded to multiples of 10 so welfare ties occur.
pub fn efficiency_suite(trials: u64, root_seed: u64) -> PropertyReport {
    plain_suite("efficiency", STREAM_EFFICIENCY, trials, root_seed)
}

fn efficiency_trial(seed: u64) -> Result<PropertyReport> {
    let mut rng = trial_rng(seed);
    let cfg = GeneratorConfig {
        players: rng.gen_range(1..=MAX_PLAYERS),
        alternatives: rng.gen_range(2..=MAX_ALTERNATIVES),
        omega: OMEGA,
    };
    let quantize = rng.gen_bool(0.25);
    let scenario = generate_scenario(&cfg, rng.gen())?;
    let valuations = scenario
        .players
        .iter()
        .map(|p| {
            let values = p
                .valuations
                .iter()
                .map(|&v| {
                    if quantize {
                        (v / 10.0).round() * 10.0
                    } else {
                        v
                    }
                })
                .collect();
            ValuationVector::new(values, OMEGA)
        })
        .collect::<Result<Vec<_>>>()?;
    check_efficiency(&valuations, TIE)
}

struct SybilInstance {
    u: ValuationVector,
    belief: Belief,
    n_others: usize,
    split: Vec<Vec<f64>>,
    // bound on combined votes that keeps every probability feasible
    vote_radius: f64,
}

fn sybil_instance(seed: u64) -> Result<SybilInstance> {
    let w = envelopes_of(seed);
    let mut rng = trial_rng(seed);
    let m = rng.gen_range(2..=MAX_ALTERNATIVES);
    let n_others = rng.gen_range(0..MAX_PLAYERS);
    let u = random_valuation(&mut rng, m)?;
    // the feasible bound grows with a, so the single-participation scale is
    // the binding one
    let a_single = scale_param(n_others + 1)?;
    let belief = random_belief(&mut rng, m, &a_single)?;
    let split = random_split(&mut rng, &u, w, 0.1);
    Ok(SybilInstance {
        u,
        belief,
        n_others,
        split,
        vote_radius: OMEGA / a_single.value(),
    })
}

/// Each envelope plays the equilibrium of its own sub-valuation; 10% of the
/// splits are equal shares. Runs `trials` instances for each `w` in 2..=5.
pub fn sybil_optimal_split_suite(trials: u64, root_seed: u64) -> PropertyReport {
    per_w_suite("sybil-optimal-split", STREAM_SYBIL_SPLIT, trials, root_seed)
}

fn sybil_optimal_split_trial(seed: u64) -> Result<PropertyReport> {
    let inst = sybil_instance(seed)?;
    let plan = SybilPlan::new(&inst.u, inst.split)?;
    check_sybil_proofness(&inst.u, &inst.belief, inst.n_others, &[plan])
}

/// Envelopes cast arbitrary zero-sum votes, each coordinate drawn uniformly
/// so that the combined votes stay inside the feasible region.
pub fn sybil_random_strategy_suite(trials: u64, root_seed: u64) -> PropertyReport {
    per_w_suite(
        "sybil-random-strategy",
        STREAM_SYBIL_RANDOM,
        trials,
        root_seed,
    )
}

fn sybil_random_strategy_trial(seed: u64) -> Result<PropertyReport> {
    let inst = sybil_instance(seed)?;
    let w = inst.split.len();
    let m = inst.u.len();
    // after centering each coordinate is within radius / w
    let half = inst.vote_radius / (2.0 * w as f64);
    let mut rng = trial_rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let strategies = (0..w)
        .map(|_| zero_sum((0..m).map(|_| rng.gen_range(-half..=half)).collect()))
        .collect();
    let plan = SybilPlan::with_strategies(&inst.u, inst.split, strategies)?;
    check_sybil_proofness(&inst.u, &inst.belief, inst.n_others, &[plan])
}

/// Random non-negative splits for `w` in 2..=5, `trials` per `w`.
pub fn split_inequality_suite(trials: u64, root_seed: u64) -> PropertyReport {
    per_w_suite(
        "split-inequality",
        STREAM_SPLIT_INEQUALITY,
        trials,
        root_seed,
    )
}

fn split_inequality_trial(seed: u64) -> Result<PropertyReport> {
    let inst = sybil_instance(seed)?;
    check_split_inequality(&SybilPlan::new(&inst.u, inst.split)?)
}

/// Ratio `a_n / a_{n+w−1}` against `(2/3)^w` for `n ≤ 20` and `w` in 2..=5.
pub fn scale_ratio_suite(trials: u64, root_seed: u64) -> PropertyReport {
    per_w_suite(
        "scale-ratio-identity",
        STREAM_SCALE_RATIO,
        trials,
        root_seed,
    )
}

fn scale_ratio_trial(seed: u64) -> Result<PropertyReport> {
    let w = envelopes_of(seed);
    let n = trial_rng(seed).gen_range(1..=MAX_PLAYERS);
    check_scale_ratio(n, w)
}

fn participation_instance(seed: u64) -> Result<(ValuationVector, Belief, ScaleParam)> {
    let mut rng = trial_rng(seed);
    let m = rng.gen_range(2..=MAX_ALTERNATIVES);
    let a = scale_param(rng.gen_range(1..=MAX_PLAYERS))?;
    let u = maybe_constant_valuation(&mut rng, m, 0.1)?;
    let b = random_belief(&mut rng, m, &a)?;
    Ok((u, b, a))
}

/// Participation gain is positive exactly for non-constant valuations;
/// 10% of instances are constant.
pub fn participation_suite(trials: u64, root_seed: u64) -> PropertyReport {
    plain_suite("participation", STREAM_PARTICIPATION, trials, root_seed)
}

fn participation_trial(seed: u64) -> Result<PropertyReport> {
    let (u, b, a) = participation_instance(seed)?;
    check_participation(&u, &b, &a)
}

/// Realized participation gain against its closed form.
pub fn participation_gap_suite(trials: u64, root_seed: u64) -> PropertyReport {
    plain_suite(
        "participation-gap",
        STREAM_PARTICIPATION_GAP,
        trials,
        root_seed,
    )
}

fn participation_gap_trial(seed: u64) -> Result<PropertyReport> {
    let (u, b, a) = participation_instance(seed)?;
    check_participation_gap(&u, &b, &a)
}

/// Rounds of up to 8 envelopes: half play equilibrium deposits, half submit
/// arbitrary deposits with 30% zero entries.
pub fn surplus_suite(trials: u64, root_seed: u64) -> PropertyReport {
    plain_suite("surplus", STREAM_SURPLUS, trials, root_seed)
}

fn surplus_trial(seed: u64) -> Result<PropertyReport> {
    let mut rng = trial_rng(seed);
    let h = rng.gen_range(1..=MAX_SURPLUS_ENVELOPES);
    let m = rng.gen_range(2..=MAX_ALTERNATIVES);
    let equilibrium = rng.gen_bool(0.5);
    let deposits = (0..h)
        .map(|_| {
            if equilibrium {
                optimal_deposits(&random_valuation(&mut rng, m)?)
            } else {
                DepositVector::new(
                    (0..m)
                        .map(|_| {
                            if rng.gen_bool(0.3) {
                                0.0
                            } else {
                                rng.gen_range(0.0..=OMEGA)
                            }
                        })
                        .collect(),
                )
            }
        })
        .collect::<Result<Vec<_>>>()?;
    check_surplus(&deposits, TIE)
}

/// Votes recovered from equilibrium deposits against the closed-form votes,
/// for `a` in `(3/2)^1 ..= (3/2)^8`. Error is relative to `‖x*‖∞`; the bar
/// is 1e-12.
pub fn consistency_suite(trials: u64, root_seed: u64) -> PropertyReport {
    plain_suite(
        "equilibrium-consistency",
        STREAM_CONSISTENCY,
        trials,
        root_seed,
    )
}

fn consistency_trial(seed: u64) -> Result<PropertyReport> {
    let mut rng = trial_rng(seed);
    let m = rng.gen_range(2..=MAX_ALTERNATIVES);
    let a = scale_param(rng.gen_range(1..=MAX_SCALE_EXPONENT))?;
    let u = maybe_constant_valuation(&mut rng, m, 0.05)?;
    let recovered = votes_from_deposits(&optimal_deposits(&u)?, &a)?;
    let closed = optimal_votes(&u, &a)?;
    let err = max_abs_diff(recovered.as_slice(), closed.as_slice())
        / inf_norm(closed.as_slice()).max(1.0);
    let mut r = PropertyReport::new("equilibrium-consistency");
    r.record(err <= 1e-12, -err);
    Ok(r)
}

/// Numerical best response against the closed form (1e-6 per coordinate),
/// then again under a resampled feasible belief (1e-6 from the first
/// answer). One trial checks both.
pub fn oracle_suite(trials: u64, root_seed: u64) -> PropertyReport {
    plain_suite("best-response-oracle", STREAM_ORACLE, trials, root_seed)
}

fn oracle_trial(seed: u64) -> Result<PropertyReport> {
    let mut rng = trial_rng(seed);
    let m = rng.gen_range(2..=MAX_ALTERNATIVES);
    let a = scale_param(rng.gen_range(1..=MAX_PLAYERS))?;
    let u = random_valuation(&mut rng, m)?;
    let b = random_belief(&mut rng, m, &a)?;
    let perturbed = random_belief(&mut rng, m, &a)?;
    let search = SearchSpec::default();
    let closed = optimal_votes(&u, &a)?;
    let first = best_response_numeric(&u, &b, &a, &search)?;
    let second = best_response_numeric(&u, &perturbed, &a, &search)?;
    let err = max_abs_diff(first.as_slice(), closed.as_slice())
        .max(max_abs_diff(first.as_slice(), second.as_slice()));
    let mut r = PropertyReport::new("best-response-oracle");
    r.record(err <= 1e-6, -err);
    Ok(r)
}

/// Analytic gradient against central differences at random feasible
/// points. Error is normwise, relative to `‖∇U‖∞`. Utility is quadratic in
/// the votes, so the step only trades off rounding and is tied to the vote
/// range `ω / a`.
pub fn gradient_suite(trials: u64, root_seed: u64) -> PropertyReport {
    plain_suite(
        "gradient-finite-difference",
        STREAM_GRADIENT,
        trials,
        root_seed,
    )
}

fn hygiene_instance(seed: u64) -> Result<(ValuationVector, Belief, ScaleParam, VoteVector)> {
    let mut rng = trial_rng(seed);
    let m = rng.gen_range(2..=MAX_ALTERNATIVES);
    let a = scale_param(rng.gen_range(1..=MAX_PLAYERS))?;
    let u = random_valuation(&mut rng, m)?;
    let b = random_belief(&mut rng, m, &a)?;
    // zero-sum votes with |x_j| ≤ ω / (2a), half the feasible range, leave
    // room for finite-difference probes
    let half = OMEGA / (4.0 * a.value());
    let x = zero_sum((0..m).map(|_| rng.gen_range(-half..=half)).collect());
    Ok((u, b, a, x))
}

fn gradient_trial(seed: u64) -> Result<PropertyReport> {
    let (u, b, a, x) = hygiene_instance(seed)?;
    let g = utility_gradient(&u, &b, &x, &a)?;
    let step = 1e-3 * OMEGA / a.value();
    let mut worst: f64 = 0.0;
    for c in 0..x.len() {
        let mut plus = x.clone().into_inner();
        let mut minus = plus.clone();
        plus[c] += step;
        minus[c] -= step;
        let fd = (expected_utility(&u, &b, &VoteVector::new(plus), &a)?
            - expected_utility(&u, &b, &VoteVector::new(minus), &a)?)
            / (2.0 * step);
        worst = worst.max((fd - g[c]).abs());
    }
    let err = worst / inf_norm(&g).max(f64::MIN_POSITIVE);
    let mut r = PropertyReport::new("gradient-finite-difference");
    r.record(err <= 1e-5, -err);
    Ok(r)
}

/// Belief probabilities at random feasible votes sum to one within 1e-9.
pub fn probability_sum_suite(trials: u64, root_seed: u64) -> PropertyReport {
    plain_suite("probability-sum", STREAM_PROBABILITY, trials, root_seed)
}

fn probability_sum_trial(seed: u64) -> Result<PropertyReport> {
    let (_, b, _, x) = hygiene_instance(seed)?;
    let err = (belief_probability(&b, &x)?.iter().sum::<f64>() - 1.0).abs();
    let mut r = PropertyReport::new("probability-sum");
    r.record(err <= 1e-9, -err);
    Ok(r)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

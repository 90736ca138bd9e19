//! Seeded Monte Carlo measurement of relationship frequencies.
//!
//! Trials are cut into fixed blocks of [`BLOCK_TRIALS`]; block `b` draws from
//! its own xoshiro256** stream seeded with `derive_seed(seed, b)`. Blocks are
//! counted in parallel and summed as integers, so results do not depend on the
//! number of worker threads.

mod rng;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

pub use rng::{derive_seed, Seed, SplitMix64, Xoshiro256StarStar};

use crate::algebra::StructureOfLevels;
use crate::error::{Error, Result};
use crate::id::ElementId;
use crate::probability::{probability_of, Probability};
use crate::value::{render, ProbabilityValue};

pub const BLOCK_TRIALS: u64 = 1 << 16;

/// Occurrences `g_s` of a relationship in `s` trials and the relative
/// frequency `F_s = g_s / s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRecord {
    pub relation: ElementId,
    pub trials: u64,
    pub occurrences: u64,
    pub relative: f64,
}

impl FrequencyRecord {
    pub fn new(relation: ElementId, trials: u64, occurrences: u64) -> Self {
        debug_assert!(trials >= 1 && occurrences <= trials);
        Self {
            relation,
            trials,
            occurrences,
            relative: occurrences as f64 / trials as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub probability: ProbabilityValue,
    pub sample_sizes: Vec<u64>,
    pub replications: u32,
    /// Mean over replications of `|F_s - p|`, keyed by sample size.
    pub mean_abs_deviation: BTreeMap<u64, f64>,
}

impl ConvergenceReport {
    pub fn deviation(&self, size: u64) -> Option<f64> {
        self.mean_abs_deviation.get(&size).copied()
    }

    /// `deviation(small) / deviation(large)`.
    pub fn ratio(&self, small: u64, large: u64) -> Option<f64> {
        Some(self.deviation(small)? / self.deviation(large)?)
    }

    /// Number of adjacent size pairs where the deviation grows.
    pub fn inversions(&self) -> usize {
        let devs: Vec<f64> = self
            .sample_sizes
            .iter()
            .filter_map(|s| self.deviation(*s))
            .collect();
        devs.windows(2).filter(|w| w[1] > w[0]).count()
    }
}

/// Runs `f` on a dedicated pool of `workers` threads; `0` uses the global pool.
pub fn with_workers<T, F>(workers: usize, f: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Per-block results in block order.
fn run_blocks<C, F>(trials: u64, seed: Seed, per_block: F) -> Vec<C>
where
    C: Send,
    F: Fn(&mut Xoshiro256StarStar, u64) -> C + Sync,
{
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS);
            let mut stream = Xoshiro256StarStar::from_seed(derive_seed(seed, b));
            per_block(&mut stream, len)
        })
        .collect()
}

fn count_successes(trials: u64, seed: Seed, success: impl Fn(f64) -> bool + Sync) -> u64 {
    run_blocks(trials, seed, |stream, len| {
        (0..len).filter(|_| success(stream.next_f64())).count() as u64
    })
    .into_iter()
    .sum()
}

fn require_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    Ok(())
}

/// Draws `trials` categorical samples over the members of alternative group
/// `group`, weighted by their probabilities.
pub fn simulate_group(
    s: &StructureOfLevels,
    group: &str,
    trials: u64,
    seed: Seed,
) -> Result<Vec<FrequencyRecord>> {
    require_trials(trials)?;
    let members = s.alt_group_members(group);
    if members.is_empty() {
        return Err(Error::UnknownGroup(group.to_string()));
    }
    let mut cumulative = Vec::with_capacity(members.len());
    let mut running = BigRational::zero();
    let mut complete = true;
    for m in &members {
        match probability_of(s, m.id.as_str())? {
            Probability::Known(p) => running += p.ratio(),
            Probability::Unknown => complete = false,
        }
        cumulative.push(crate::value::ratio_to_f64(&running));
    }
    if !complete || !running.is_one() {
        return Err(Error::UnnormalizedAlternatives {
            group: group.to_string(),
            sum: if complete {
                render(&running)
            } else {
                "an unknown value".into()
            },
        });
    }
    *cumulative.last_mut().expect("non-empty group") = 1.0;

    let k = members.len();
    let counts = run_blocks(trials, seed, |stream, len| {
        let mut counts = vec![0u64; k];
        for _ in 0..len {
            let u = stream.next_f64();
            let pick = cumulative.iter().position(|c| u < *c).unwrap_or(k - 1);
            counts[pick] += 1;
        }
        counts
    })
    .into_iter()
    .fold(vec![0u64; k], |mut acc, block| {
        for (a, b) in acc.iter_mut().zip(block) {
            *a += b;
        }
        acc
    });

    Ok(members
        .iter()
        .zip(counts)
        .map(|(m, g)| FrequencyRecord::new(m.id.clone(), trials, g))
        .collect())
}

/// Chord dropped parallel to a side of the inscribed equilateral triangle, at
/// signed distance `d` from the centre of the unit circle. It beats the side
/// `sqrt(3)` exactly when `|d| < 1/2`.
#[inline]
pub fn parallel_chord_is_long(d: f64) -> bool {
    d.abs() < 0.5
}

/// Chord from a fixed vertex to the point at angle `theta` along the circle.
/// It beats the side exactly when the point falls inside the opposite arc.
#[inline]
pub fn endpoint_chord_is_long(theta: f64) -> bool {
    theta > TAU / 3.0 && theta < 2.0 * TAU / 3.0
}

/// First chord dynamic: offset uniform on `[-1, 1)` along a diameter.
pub fn bertrand_parallel(trials: u64, seed: Seed) -> Result<FrequencyRecord> {
    require_trials(trials)?;
    let hits = count_successes(trials, seed, |u| parallel_chord_is_long(2.0 * u - 1.0));
    Ok(FrequencyRecord::new(
        ElementId::new("R_1").expect("valid id"),
        trials,
        hits,
    ))
}

/// Second chord dynamic: one extreme pinned, the other at an angle uniform on
/// `[0, 2π)`.
pub fn bertrand_endpoint(trials: u64, seed: Seed) -> Result<FrequencyRecord> {
    require_trials(trials)?;
    let hits = count_successes(trials, seed, |u| endpoint_chord_is_long(TAU * u));
    Ok(FrequencyRecord::new(
        ElementId::new("R_2").expect("valid id"),
        trials,
        hits,
    ))
}

/// Mean absolute deviation of the relative frequency of a Bernoulli(`p`)
/// relationship from `p`, for each sample size.
///
/// Replication `r` at size index `i` draws from the stream seeded with
/// `derive_seed(derive_seed(seed, i), r)`.
pub fn convergence_study(
    p: &ProbabilityValue,
    sample_sizes: &[u64],
    replications: u32,
    seed: Seed,
) -> Result<ConvergenceReport> {
    if p.is_zero() || p.is_one() {
        return Err(Error::DegenerateProbability(p.to_string()));
    }
    if replications < 30 {
        return Err(Error::InvalidArgument(format!(
            "at least 30 replications are required, got {replications}"
        )));
    }
    if sample_sizes.is_empty() || sample_sizes[0] == 0 {
        return Err(Error::InvalidArgument(
            "sample sizes must be non-empty and positive".into(),
        ));
    }
    if sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "sample sizes must be strictly ascending".into(),
        ));
    }

    let target = p.to_f64();
    let mut mean_abs_deviation = BTreeMap::new();
    for (index, &size) in sample_sizes.iter().enumerate() {
        let size_seed = derive_seed(seed, index as u64);
        let deviations: Vec<f64> = (0..replications)
            .into_par_iter()
            .map(|r| {
                let mut stream = Xoshiro256StarStar::from_seed(derive_seed(size_seed, r as u64));
                let hits = (0..size).filter(|_| stream.next_f64() < target).count();
                (hits as f64 / size as f64 - target).abs()
            })
            .collect();
        let mean = deviations.iter().sum::<f64>() / replications as f64;
        mean_abs_deviation.insert(size, mean);
    }
    Ok(ConvergenceReport {
        probability: p.clone(),
        sample_sizes: sample_sizes.to_vec(),
        replications,
        mean_abs_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    fn coin() -> StructureOfLevels {
        builtin::load("coin").unwrap().remove(0)
    }

    fn dice() -> StructureOfLevels {
        builtin::load("dice").unwrap().remove(0)
    }

    #[test]
    fn parallel_predicate_matches_chord_length() {
        // chord length 2*sqrt(1 - d^2) against the side sqrt(3)
        let by_length = |d: f64| 2.0 * (1.0 - d * d).sqrt() > 3f64.sqrt();
        assert!(parallel_chord_is_long(0.0));
        assert!(!parallel_chord_is_long(0.9));
        for d in [-0.99, -0.51, -0.49, -0.25, 0.0, 0.1, 0.4999, 0.5001, 0.75, 0.999] {
            assert_eq!(parallel_chord_is_long(d), by_length(d), "d = {d}");
        }
        assert!(!parallel_chord_is_long(0.5));
        assert!(!parallel_chord_is_long(-0.5));
    }

    #[test]
    fn endpoint_predicate_matches_chord_length() {
        let by_length = |t: f64| 2.0 * (t / 2.0).sin() > 3f64.sqrt();
        assert!(endpoint_chord_is_long(std::f64::consts::PI));
        assert!(!endpoint_chord_is_long(0.1));
        let third = TAU / 3.0;
        for t in [0.0, 0.1, 1.0, third - 1e-6, third + 1e-6, 3.0, 4.0, 2.0 * third - 1e-6, 2.0 * third + 1e-6, 6.0] {
            assert_eq!(endpoint_chord_is_long(t), by_length(t), "theta = {t}");
        }
        assert!(!endpoint_chord_is_long(third));
        assert!(!endpoint_chord_is_long(2.0 * third));
    }

    #[test]
    fn group_counts_are_conserved() {
        let records = simulate_group(&dice(), "faces", 10_007, Seed(3)).unwrap();
        assert_eq!(records.len(), 6);
        assert_eq!(records.iter().map(|r| r.occurrences).sum::<u64>(), 10_007);
        assert!(records.iter().all(|r| (0.0..=1.0).contains(&r.relative)));
    }

    #[test]
    fn single_trial_hits_exactly_one_member() {
        for seed in 0..20 {
            let records = simulate_group(&dice(), "faces", 1, Seed(seed)).unwrap();
            assert_eq!(records.iter().filter(|r| r.occurrences == 1).count(), 1);
            assert_eq!(records.iter().filter(|r| r.occurrences == 0).count(), 5);
        }
    }

    #[test]
    fn small_samples_unbalance_the_faces() {
        let sixth = 1.0 / 6.0;
        for seed in 0..50 {
            let records = simulate_group(&dice(), "faces", 7, Seed(seed)).unwrap();
            assert!(records.iter().any(|r| (r.relative - sixth).abs() > 1e-9));
        }
    }

    #[test]
    fn rejects_unnormalized_or_unknown_groups() {
        let open = crate::dsl::parse(
            "structure s { level 1 { rel R; } level 2 { rel A of R [alt=g]; rel B of R [alt=g]; } }",
        )
        .unwrap()
        .remove(0);
        assert!(matches!(
            simulate_group(&open, "g", 10, Seed(0)),
            Err(Error::UnnormalizedAlternatives { .. })
        ));
        assert_eq!(
            simulate_group(&coin(), "nope", 10, Seed(0)),
            Err(Error::UnknownGroup("nope".into()))
        );
        assert!(matches!(
            simulate_group(&coin(), "sides", 0, Seed(0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn zero_mass_member_never_occurs() {
        let s = crate::dsl::parse(
            "structure s { level 1 { rel R; } level 2 { rel A of R [alt=g, p=0]; rel B of R [alt=g, p=1]; } }",
        )
        .unwrap()
        .remove(0);
        let records = simulate_group(&s, "g", 5000, Seed(9)).unwrap();
        assert_eq!(records[0].occurrences, 0);
        assert_eq!(records[1].occurrences, 5000);
    }

    #[test]
    fn one_trial_bertrand_is_zero_or_one() {
        let mut saw_hit = false;
        for seed in 0..64 {
            let r = bertrand_parallel(1, Seed(seed)).unwrap();
            assert!(r.relative == 0.0 || r.relative == 1.0);
            saw_hit |= r.relative == 1.0;
        }
        assert!(saw_hit);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let trials = 3 * BLOCK_TRIALS + 17;
        let one = with_workers(1, || bertrand_endpoint(trials, Seed(5)).unwrap());
        let many = with_workers(4, || bertrand_endpoint(trials, Seed(5)).unwrap());
        assert_eq!(one, many);
        let one = with_workers(1, || simulate_group(&dice(), "faces", trials, Seed(8)).unwrap());
        let many = with_workers(3, || simulate_group(&dice(), "faces", trials, Seed(8)).unwrap());
        assert_eq!(one, many);
    }

    #[test]
    fn convergence_preconditions() {
        let half = ProbabilityValue::new(1, 2).unwrap();
        assert_eq!(
            convergence_study(&ProbabilityValue::one(), &[10], 30, Seed(0)),
            Err(Error::DegenerateProbability("1".into()))
        );
        assert!(convergence_study(&ProbabilityValue::zero(), &[10], 30, Seed(0)).is_err());
        assert!(convergence_study(&half, &[10], 29, Seed(0)).is_err());
        assert!(convergence_study(&half, &[10, 10], 30, Seed(0)).is_err());
        assert!(convergence_study(&half, &[], 30, Seed(0)).is_err());
        assert!(convergence_study(&half, &[0, 5], 30, Seed(0)).is_err());
    }

    #[test]
    fn deviations_shrink_with_sample_size() {
        let half = ProbabilityValue::new(1, 2).unwrap();
        let report = convergence_study(&half, &[100, 1000, 10_000], 100, Seed(11)).unwrap();
        assert!(report.inversions() <= 1);
        assert!(report.deviation(100).unwrap() > report.deviation(10_000).unwrap());
        assert!(report.mean_abs_deviation.values().all(|d| *d > 0.0));
    }
}

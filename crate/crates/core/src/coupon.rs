//! Coupon collection with non-uniform coupons.
//!
//! Each of `Δ` sources draws one color from its own list with its own
//! distribution. The quantities of interest are the probability that a target
//! list is fully collected, the per-color collection probabilities, their
//! product, and the closed-form exponential bound on the collection
//! probability.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bias::{BiasProfile, IndexSampler};
use crate::error::{Error, Result};
use crate::lists::Color;
use crate::seed;

/// Outcome-tuple limit for exact enumeration.
pub const ENUMERATION_CAP: f64 = 1e7;
/// Products of `(1 − P)` below this are treated as zero.
pub const UNDERFLOW_GUARD: f64 = 1e-300;
const NORMALIZATION_TOL: f64 = 1e-12;
const MC_BATCH: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct CouponInstance {
    target: Vec<Color>,
    sources: Vec<Vec<Color>>,
    probs: Vec<Vec<f64>>,
    p_cap: f64,
}

impl CouponInstance {
    /// `probs[i][j]` is the probability that source `i` draws `sources[i][j]`.
    /// Without an explicit cap, the cap is the largest probability plus 1e-12.
    pub fn new(
        mut target: Vec<Color>,
        sources: Vec<Vec<Color>>,
        probs: Vec<Vec<f64>>,
        p_cap: Option<f64>,
    ) -> Result<Self> {
        if sources.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} sources but {} distributions",
                sources.len(),
                probs.len()
            )));
        }
        for (i, (s, p)) in sources.iter().zip(&probs).enumerate() {
            if s.len() != p.len() {
                return Err(Error::InvalidDistribution(format!(
                    "source {i}: list and distribution lengths differ"
                )));
            }
            if s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidDistribution(format!(
                    "source {i}: colors not strictly increasing"
                )));
            }
            if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidDistribution(format!(
                    "source {i}: probability outside [0, 1]"
                )));
            }
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "source {i}: probabilities sum to {total}"
                )));
            }
        }
        target.sort_unstable();
        target.dedup();
        let p_cap =
            p_cap.unwrap_or_else(|| probs.iter().flatten().copied().fold(0.0, f64::max) + 1e-12);
        Ok(Self {
            target,
            sources,
            probs,
            p_cap,
        })
    }

    /// Sources weighted by a bias profile applied to their list positions.
    pub fn from_profile(
        target: Vec<Color>,
        sources: Vec<Vec<Color>>,
        profile: &BiasProfile,
        p_cap: Option<f64>,
    ) -> Result<Self> {
        let probs = sources
            .iter()
            .map(|s| profile.index_weights(s.len()))
            .collect();
        Self::new(target, sources, probs, p_cap)
    }

    /// Target and `delta` sources drawn as uniform `k`-subsets of `1..=pool`.
    pub fn random(
        delta: usize,
        k: usize,
        pool: usize,
        profile: &BiasProfile,
        seed: u64,
    ) -> Result<Self> {
        if pool < k {
            return Err(Error::PoolTooSmall { pool, k });
        }
        let mut rng = seed::rng(seed);
        let mut draw = || {
            let mut l: Vec<Color> = sample(&mut rng, pool, k)
                .into_iter()
                .map(|c| c as Color + 1)
                .collect();
            l.sort_unstable();
            l
        };
        let target = draw();
        let sources = (0..delta).map(|_| draw()).collect();
        Self::from_profile(target, sources, profile, None)
    }

    pub fn target(&self) -> &[Color] {
        &self.target
    }

    pub fn sources(&self) -> &[Vec<Color>] {
        &self.sources
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn p_cap(&self) -> f64 {
        self.p_cap
    }

    pub fn delta(&self) -> usize {
        self.sources.len()
    }

    /// `P_i(c)`, zero off-list.
    pub fn source_prob(&self, i: usize, c: Color) -> f64 {
        self.sources[i]
            .binary_search(&c)
            .map_or(0.0, |j| self.probs[i][j])
    }

    /// `ρ(c) = Σ_i P_i(c)`.
    pub fn rho(&self, c: Color) -> f64 {
        (0..self.delta()).map(|i| self.source_prob(i, c)).sum()
    }

    pub fn cap_holds(&self) -> bool {
        self.probs.iter().flatten().all(|&p| p < self.p_cap)
    }

    fn samplers(&self) -> Vec<IndexSampler> {
        self.probs
            .iter()
            .map(|p| IndexSampler::new(p.clone()))
            .collect()
    }
}

fn draw_with<R: Rng + ?Sized>(
    inst: &CouponInstance,
    samplers: &[IndexSampler],
    rng: &mut R,
    out: &mut Vec<Color>,
) {
    out.clear();
    out.extend(
        samplers
            .iter()
            .zip(&inst.sources)
            .map(|(s, list)| list[s.sample(rng)]),
    );
}

/// One independent draw per source.
pub fn sample_draws(inst: &CouponInstance, seed: u64) -> Vec<Color> {
    let mut rng = seed::rng(seed);
    let mut out = Vec::with_capacity(inst.delta());
    draw_with(inst, &inst.samplers(), &mut rng, &mut out);
    out
}

/// True iff every target color appears among the draws.
pub fn is_collected(target: &[Color], draws: &[Color]) -> bool {
    target.iter().all(|c| draws.contains(c))
}

/// Exact collection probability by enumerating all outcome tuples.
pub fn exact_collection_prob(inst: &CouponInstance) -> Result<f64> {
    let tuples: f64 = inst.sources.iter().map(|s| s.len() as f64).product();
    if tuples > ENUMERATION_CAP {
        return Err(Error::TooLargeToEnumerate(format!(
            "{tuples} outcome tuples exceed {ENUMERATION_CAP}"
        )));
    }
    let m = inst.target.len();
    if m == 0 {
        return Ok(1.0);
    }
    if m > inst.delta() {
        return Ok(0.0);
    }
    // Position of each source color in the target, if any.
    let hits: Vec<Vec<Option<usize>>> = inst
        .sources
        .iter()
        .map(|s| {
            s.iter()
                .map(|c| inst.target.binary_search(c).ok())
                .collect()
        })
        .collect();
    let mut counts = vec![0u32; m];
    let mut total = 0.0;
    enumerate(inst, &hits, 0, 1.0, m, &mut counts, &mut total);
    Ok(total)
}

fn enumerate(
    inst: &CouponInstance,
    hits: &[Vec<Option<usize>>],
    i: usize,
    mass: f64,
    uncovered: usize,
    counts: &mut [u32],
    total: &mut f64,
) {
    if uncovered == 0 {
        *total += mass;
        return;
    }
    if uncovered > inst.delta() - i {
        return;
    }
    for (j, &p) in inst.probs[i].iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        match hits[i][j] {
            Some(t) => {
                counts[t] += 1;
                let newly = usize::from(counts[t] == 1);
                enumerate(
                    inst,
                    hits,
                    i + 1,
                    mass * p,
                    uncovered - newly,
                    counts,
                    total,
                );
                counts[t] -= 1;
            }
            None => enumerate(inst, hits, i + 1, mass * p, uncovered, counts, total),
        }
    }
}

/// `Pr(B_c) = 1 − ∏_i (1 − P_i(c))`, accumulated in log space.
pub fn per_color_prob(inst: &CouponInstance, c: Color) -> f64 {
    let mut log_miss = 0.0;
    for i in 0..inst.delta() {
        let p = inst.source_prob(i, c);
        if p >= 1.0 {
            return 1.0;
        }
        log_miss += (-p).ln_1p();
    }
    if log_miss < UNDERFLOW_GUARD.ln() {
        return 1.0;
    }
    -log_miss.exp_m1()
}

/// `∏_{c ∈ L'} Pr(B_c)`, an upper bound on the collection probability when
/// the collection events are negatively correlated.
pub fn product_bound(inst: &CouponInstance) -> f64 {
    inst.target
        .iter()
        .map(|&c| per_color_prob(inst, c))
        .product()
}

/// `exp(−Σ_{c ∈ L'} exp(−ρ(c)/(1 − p)))`.
pub fn analytic_bound(inst: &CouponInstance) -> Result<f64> {
    let cap = inst.p_cap;
    if !(cap > 0.0 && cap < 1.0) {
        return Err(Error::InvalidDistribution(format!(
            "p_cap = {cap} must lie in (0, 1)"
        )));
    }
    for (i, (s, p)) in inst.sources.iter().zip(&inst.probs).enumerate() {
        if let Some(j) = p.iter().position(|&x| x >= cap) {
            return Err(Error::CapViolated {
                source_index: i,
                color: s[j],
                prob: p[j],
                cap,
            });
        }
    }
    let exponent: f64 = inst
        .target
        .iter()
        .map(|&c| (-inst.rho(c) / (1.0 - cap)).exp())
        .sum();
    Ok((-exponent).exp())
}

/// Whether the mean of `ρ` over `subset` is at most `aΔ/k`.
pub fn lemma_premise_check(
    inst: &CouponInstance,
    subset: &[Color],
    a: f64,
    delta: usize,
    k: usize,
) -> Result<bool> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mean = subset.iter().map(|&c| inst.rho(c)).sum::<f64>() / subset.len() as f64;
    Ok(mean <= a * delta as f64 / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub trials: u64,
    pub hits: u64,
}

impl McEstimate {
    pub fn frequency(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }

    /// Whether the frequency lies within `sigmas` binomial standard errors of
    /// `q`.
    pub fn consistent_with(&self, q: f64, sigmas: f64) -> bool {
        let sd = (q * (1.0 - q) / self.trials as f64).sqrt();
        (self.frequency() - q).abs() <= sigmas * sd
    }
}

/// Monte Carlo collection frequency. Trials run in batches of 1024 with
/// batch seeds `mix(seed, batch)`; the result does not depend on scheduling.
pub fn monte_carlo(inst: &CouponInstance, trials: u64, seed: u64) -> McEstimate {
    let samplers = inst.samplers();
    let batches = trials.div_ceil(MC_BATCH);
    let hits = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed::rng(seed::mix(seed, b));
            let n = MC_BATCH.min(trials - b * MC_BATCH);
            let mut draws = Vec::with_capacity(inst.delta());
            (0..n)
                .filter(|_| {
                    draw_with(inst, &samplers, &mut rng, &mut draws);
                    is_collected(&inst.target, &draws)
                })
                .count() as u64
        })
        .sum();
    McEstimate { trials, hits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::ProfileKind;

    fn two_by_two(cap: Option<f64>) -> CouponInstance {
        CouponInstance::new(
            vec![1, 2],
            vec![vec![1, 2], vec![1, 2]],
            vec![vec![0.5, 0.5]; 2],
            cap,
        )
        .unwrap()
    }

    #[test]
    fn point_masses() {
        let inst = CouponInstance::new(
            vec![3, 4],
            vec![vec![3], vec![4]],
            vec![vec![1.0], vec![1.0]],
            None,
        )
        .unwrap();
        assert_eq!(sample_draws(&inst, 5), vec![3, 4]);
        assert_eq!(exact_collection_prob(&inst).unwrap(), 1.0);
        assert_eq!(per_color_prob(&inst, 3), 1.0);
    }

    #[test]
    fn draws_are_deterministic_and_fair() {
        let inst = CouponInstance::new(
            vec![1],
            vec![vec![1, 2]; 100_000],
            vec![vec![0.5, 0.5]; 100_000],
            None,
        )
        .unwrap();
        let a = sample_draws(&inst, 17);
        assert_eq!(a, sample_draws(&inst, 17));
        let ones = a.iter().filter(|&&c| c == 1).count() as f64;
        let n = a.len() as f64;
        assert!((ones / n - 0.5).abs() <= 3.0 * (0.25 / n).sqrt());
    }

    #[test]
    fn collection_predicate() {
        assert!(is_collected(&[], &[1, 2]));
        assert!(!is_collected(&[1, 2, 3], &[1, 2]));
        assert!(is_collected(&[1, 2], &[1, 2]));
        assert!(!is_collected(&[1, 2], &[1, 1]));
    }

    #[test]
    fn hand_enumeration() {
        let inst = two_by_two(None);
        assert_eq!(exact_collection_prob(&inst).unwrap(), 0.5);
        assert!((product_bound(&inst) - 9.0 / 16.0).abs() < 1e-15);
        assert!((per_color_prob(&inst, 1) - 0.75).abs() < 1e-15);
        assert_eq!(per_color_prob(&inst, 9), 0.0);
    }

    #[test]
    fn pigeonhole_and_empty_target() {
        let inst = CouponInstance::new(
            vec![1, 2, 3],
            vec![vec![1, 2, 3]; 2],
            vec![vec![1.0 / 3.0; 3]; 2],
            None,
        )
        .unwrap();
        assert_eq!(exact_collection_prob(&inst).unwrap(), 0.0);
        let empty =
            CouponInstance::new(vec![], vec![vec![1, 2]], vec![vec![0.5, 0.5]], Some(0.6)).unwrap();
        assert_eq!(exact_collection_prob(&empty).unwrap(), 1.0);
        assert_eq!(product_bound(&empty), 1.0);
        assert_eq!(analytic_bound(&empty).unwrap(), 1.0);
    }

    #[test]
    fn analytic_bound_cases() {
        let inst = two_by_two(Some(0.6));
        let expected = (-2.0 * (-1.0f64 / 0.4).exp()).exp();
        let bound = analytic_bound(&inst).unwrap();
        assert!((bound - expected).abs() < 1e-15);
        assert!(bound >= product_bound(&inst));
        assert!(matches!(
            analytic_bound(&two_by_two(Some(0.5))),
            Err(Error::CapViolated { .. })
        ));

        // ρ = 0 on every target color gives e^{-k}.
        let far = CouponInstance::new(
            vec![7, 8, 9],
            vec![vec![1, 2]],
            vec![vec![0.5, 0.5]],
            Some(0.6),
        )
        .unwrap();
        assert!((analytic_bound(&far).unwrap() - (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn analytic_bound_monotone_in_rho() {
        // Moving mass of source 0 from a target color to an outside color lowers ρ.
        let mut last = f64::INFINITY;
        for q in [0.5, 0.4, 0.3, 0.2, 0.1, 0.0] {
            let inst = CouponInstance::new(
                vec![1, 2],
                vec![vec![1, 2, 5], vec![1, 2]],
                vec![vec![q, 0.5, 0.5 - q], vec![0.5, 0.5]],
                Some(0.6),
            )
            .unwrap();
            let b = analytic_bound(&inst).unwrap();
            assert!(b < last);
            last = b;
        }
    }

    #[test]
    fn single_color_product_equals_marginal() {
        let inst = CouponInstance::new(
            vec![2],
            vec![vec![1, 2], vec![2, 3]],
            vec![vec![0.3, 0.7], vec![0.4, 0.6]],
            None,
        )
        .unwrap();
        assert_eq!(product_bound(&inst), per_color_prob(&inst, 2));
        assert!((per_color_prob(&inst, 2) - (1.0 - 0.3 * 0.6)).abs() < 1e-15);
    }

    #[test]
    fn product_dominates_exact_on_random_instances() {
        for seed in 0..1000u64 {
            let delta = 1 + (seed % 5) as usize;
            let k = 1 + ((seed / 5) % 4) as usize;
            let kind = [
                ProfileKind::Uniform,
                ProfileKind::LinearDecay,
                ProfileKind::PiecewiseF,
            ][(seed % 3) as usize];
            let inst =
                CouponInstance::random(delta, k, k + 2, &BiasProfile::of_kind(kind), seed).unwrap();
            let exact = exact_collection_prob(&inst).unwrap();
            assert!(exact <= product_bound(&inst) + 1e-15, "seed {seed}");
        }
    }

    #[test]
    fn enumeration_cap() {
        let inst = CouponInstance::random(12, 5, 10, &BiasProfile::uniform(), 0).unwrap();
        assert!(matches!(
            exact_collection_prob(&inst),
            Err(Error::TooLargeToEnumerate(_))
        ));
    }

    #[test]
    fn per_color_matches_simulation() {
        let inst = CouponInstance::random(6, 3, 4, &BiasProfile::linear(0.0), 3).unwrap();
        let c = inst.target()[0];
        let samplers = inst.samplers();
        let mut rng = seed::rng(99);
        let mut draws = Vec::new();
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| {
                draw_with(&inst, &samplers, &mut rng, &mut draws);
                draws.contains(&c)
            })
            .count();
        let q = per_color_prob(&inst, c);
        let freq = hits as f64 / trials as f64;
        assert!(
            (freq - q).abs() <= 3.0 * (q * (1.0 - q) / trials as f64).sqrt(),
            "{freq} vs {q}"
        );
    }

    #[test]
    fn underflow_guard() {
        let n = 5000;
        let inst = CouponInstance::new(vec![1], vec![vec![1, 2]; n], vec![vec![0.5, 0.5]; n], None)
            .unwrap();
        assert_eq!(per_color_prob(&inst, 1), 1.0);
    }

    #[test]
    fn premise_check() {
        let inst = two_by_two(None);
        assert!(lemma_premise_check(&inst, &[5], 0.1, 2, 2).unwrap());
        // ρ = 1 = aΔ/k with a = 1, Δ = 2, k = 2.
        assert!(lemma_premise_check(&inst, &[1, 2], 1.0, 2, 2).unwrap());
        assert!(!lemma_premise_check(&inst, &[1, 2], 0.99, 2, 2).unwrap());
        assert_eq!(
            lemma_premise_check(&inst, &[], 1.0, 2, 2),
            Err(Error::EmptySubset)
        );

        let inst = CouponInstance::random(5, 4, 6, &BiasProfile::piecewise(), 8).unwrap();
        let subset = &inst.target()[1..3];
        let mean = (inst.rho(subset[0]) + inst.rho(subset[1])) / 2.0;
        assert_eq!(
            lemma_premise_check(&inst, subset, 0.8, 5, 4).unwrap(),
            mean <= 0.8 * 5.0 / 4.0
        );
    }

    #[test]
    fn invalid_distributions() {
        assert!(
            CouponInstance::new(vec![1], vec![vec![1, 2]], vec![vec![0.5, 0.4]], None).is_err()
        );
        assert!(
            CouponInstance::new(vec![1], vec![vec![2, 1]], vec![vec![0.5, 0.5]], None).is_err()
        );
        assert!(CouponInstance::new(vec![1], vec![vec![1]], vec![], None).is_err());
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let inst = CouponInstance::random(4, 2, 3, &BiasProfile::uniform(), 1).unwrap();
        let a = monte_carlo(&inst, 5000, 3);
        assert_eq!(a, monte_carlo(&inst, 5000, 3));
        assert_eq!(a.trials, 5000);
        let exact = exact_collection_prob(&inst).unwrap();
        assert!(a.consistent_with(exact, 4.0));
    }
}

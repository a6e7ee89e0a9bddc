//! Index-biased color distributions for part-A vertices.
//!
//! A profile turns a list of size `k` into a distribution over list
//! positions `1..=k`. Every vertex with the same `k` gets the same weights by
//! position, so colors are biased by where they sit in the sorted list, not by
//! their value.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::lists::{Color, ListAssignment, Rational};

/// Coefficient used by the piecewise profile's list-size rule.
pub const PIECEWISE_COEFFICIENT: f64 = 0.7969;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Uniform,
    #[serde(rename = "linear")]
    LinearDecay,
    #[serde(rename = "piecewise")]
    PiecewiseF,
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::Uniform => "uniform",
            ProfileKind::LinearDecay => "linear",
            ProfileKind::PiecewiseF => "piecewise",
        })
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(ProfileKind::Uniform),
            "linear" => Ok(ProfileKind::LinearDecay),
            "piecewise" => Ok(ProfileKind::PiecewiseF),
            other => Err(Error::InvalidProfile(format!("unknown profile `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasProfile {
    pub kind: ProfileKind,
    /// Target coefficient of the list-size rule.
    pub a: f64,
    /// Probability cap of the list-size rule; `None` means `1/√Δ`.
    pub p: Option<f64>,
    /// Slack added to 4/5 by the linear profile.
    pub gamma: f64,
}

impl BiasProfile {
    pub fn uniform() -> Self {
        Self {
            kind: ProfileKind::Uniform,
            a: 1.0,
            p: None,
            gamma: 0.0,
        }
    }

    pub fn linear(gamma: f64) -> Self {
        Self {
            kind: ProfileKind::LinearDecay,
            a: 0.8 + gamma,
            p: None,
            gamma,
        }
    }

    pub fn piecewise() -> Self {
        Self {
            kind: ProfileKind::PiecewiseF,
            a: PIECEWISE_COEFFICIENT,
            p: None,
            gamma: 0.0,
        }
    }

    pub fn of_kind(kind: ProfileKind) -> Self {
        match kind {
            ProfileKind::Uniform => Self::uniform(),
            ProfileKind::LinearDecay => Self::linear(0.0),
            ProfileKind::PiecewiseF => Self::piecewise(),
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "a = {} must be positive",
                self.a
            )));
        }
        if let Some(p) = self.p {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidProfile(format!("p = {p} must lie in (0, 1)")));
            }
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "gamma = {} must be nonnegative",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Coefficient that enters the list-size rule.
    pub fn coefficient(&self) -> f64 {
        match self.kind {
            ProfileKind::LinearDecay => 0.8 + self.gamma,
            _ => self.a,
        }
    }

    /// Probability of each list position `1..=k` (element `i - 1` holds
    /// position `i`).
    pub fn index_weights(&self, k: usize) -> Vec<f64> {
        if k == 0 {
            return Vec::new();
        }
        let kf = k as f64;
        match self.kind {
            ProfileKind::Uniform => vec![1.0 / kf; k],
            ProfileKind::LinearDecay => {
                let denom = kf * (5.0 * kf - 3.0);
                (1..=k).map(|i| linear_numerator(i, k) / denom).collect()
            }
            ProfileKind::PiecewiseF => {
                let c = mean_f(k);
                (1..=k).map(|i| f_value(i, k) / (c * kf)).collect()
            }
        }
    }

    /// Exact position probabilities.
    pub fn index_weights_exact(&self, k: usize) -> Vec<Rational> {
        let ki = k as i64;
        match self.kind {
            ProfileKind::Uniform => vec![Rational::new(1, ki); k],
            // 8/(5k − 3) · (1 − 3i/(4k)) = 2(4k − 3i) / (k(5k − 3))
            ProfileKind::LinearDecay => (1..=ki)
                .map(|i| Rational::new(2 * (4 * ki - 3 * i), ki * (5 * ki - 3)))
                .collect(),
            ProfileKind::PiecewiseF => {
                let c = mean_f_exact(k);
                (1..=k)
                    .map(|i| f_exact(i, k) / (c * Rational::from_integer(ki)))
                    .collect()
            }
        }
    }

    /// Upper bound on any single color probability for lists of size `k`.
    pub fn max_prob_bound(&self, k: usize) -> f64 {
        let kf = k as f64;
        match self.kind {
            ProfileKind::Uniform => 1.0 / kf,
            ProfileKind::LinearDecay => 8.0 / (5.0 * kf - 3.0),
            ProfileKind::PiecewiseF => 1.0 / (mean_f(k) * kf),
        }
    }

    pub fn sampler(&self, k: usize) -> IndexSampler {
        IndexSampler::new(self.index_weights(k))
    }
}

impl fmt::Display for BiasProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)
    }
}

/// Draws list positions (0-based) from a profile's weights.
#[derive(Debug, Clone)]
pub struct IndexSampler {
    weights: Vec<f64>,
    dist: Option<WeightedIndex<f64>>,
}

impl IndexSampler {
    pub fn new(weights: Vec<f64>) -> Self {
        let dist = WeightedIndex::new(&weights).ok();
        Self { weights, dist }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// # Panics
    /// If the weights were empty.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.dist
            .as_ref()
            .expect("sampler over an empty list")
            .sample(rng)
    }
}

fn validity_denominator(delta: usize, p: f64) -> Result<f64> {
    let d = delta as f64;
    if delta < 2 {
        return Err(Error::DeltaTooSmall(delta));
    }
    let ln = d.ln();
    let denom = (1.0 - p) * (ln - 4.0 * ln.ln());
    if denom.is_finite() && denom > 0.0 {
        Ok(denom)
    } else {
        Err(Error::DeltaTooSmall(delta))
    }
}

/// List size prescribed for maximum degree `delta`:
/// `⌈aΔ/((1 − p)(ln Δ − 4 ln ln Δ))⌉`, rounded up to a multiple of 10 for the
/// piecewise profile.
pub fn list_size_k(delta: usize, profile: &BiasProfile) -> Result<usize> {
    profile.validate()?;
    let p = profile.p.unwrap_or_else(|| 1.0 / (delta as f64).sqrt());
    let denom = validity_denominator(delta, p)?;
    let raw = profile.coefficient() * delta as f64 / denom;
    Ok(match profile.kind {
        ProfileKind::PiecewiseF => 10 * (raw / 10.0).ceil() as usize,
        _ => raw.ceil() as usize,
    })
}

/// Breakpoint `⌊9k/10⌋` of the piecewise weight function.
pub fn piecewise_breakpoint(k: usize) -> usize {
    9 * k / 10
}

// 2(4k − 3i), so a linear weight is this over k(5k − 3) with a single rounding.
fn linear_numerator(i: usize, k: usize) -> f64 {
    (2 * (4 * k as i64 - 3 * i as i64)) as f64
}

fn f_value(i: usize, k: usize) -> f64 {
    if i <= piecewise_breakpoint(k) {
        (4 * k - 3 * i) as f64 / (4 * k) as f64
    } else {
        13.0 / 40.0
    }
}

/// Piecewise weight `f(i)`: `1 − 3i/(4k)` up to the breakpoint, then `13/40`.
pub fn f_piecewise(i: usize, k: usize) -> Result<f64> {
    if i == 0 || i > k {
        return Err(Error::ColorIndexOutOfRange { index: i, k });
    }
    Ok(f_value(i, k))
}

pub fn f_exact(i: usize, k: usize) -> Rational {
    if i <= piecewise_breakpoint(k) {
        Rational::new(4 * k as i64 - 3 * i as i64, 4 * k as i64)
    } else {
        Rational::new(13, 40)
    }
}

/// Exact mean of `f(1..=k)` for any `k ≥ 1`.
pub fn mean_f_exact(k: usize) -> Rational {
    let (k, t) = (k as i64, piecewise_breakpoint(k) as i64);
    // Σ_{i≤t} (1 − 3i/(4k)) + (k − t)·13/40, over the common denominator 320k.
    let numer = 320 * k * t - 120 * t * (t + 1) + 104 * k * (k - t);
    Rational::new(numer, 320 * k * k)
}

pub fn mean_f(k: usize) -> f64 {
    crate::lists::ratio_f64(mean_f_exact(k))
}

/// Normalizer `C = 503/800 − 27/(80k)`, the mean of `f` when `10 | k`.
pub fn normalizer_c_exact(k: usize) -> Result<Rational> {
    if k == 0 || !k.is_multiple_of(10) {
        return Err(Error::NotDivisibleBy10(k));
    }
    Ok(Rational::new(503, 800) - Rational::new(27, 80 * k as i64))
}

pub fn normalizer_c(k: usize) -> Result<f64> {
    normalizer_c_exact(k).map(crate::lists::ratio_f64)
}

/// `P_v(c)`; zero when `c ∉ L(v)`.
pub fn prob(profile: &BiasProfile, assignment: &ListAssignment, v: usize, c: Color) -> f64 {
    match assignment.index_of(v, c) {
        Some(i) => position_prob(profile, i, assignment.k()),
        None => 0.0,
    }
}

fn position_prob(profile: &BiasProfile, i: usize, k: usize) -> f64 {
    let kf = k as f64;
    match profile.kind {
        ProfileKind::Uniform => 1.0 / kf,
        ProfileKind::LinearDecay => linear_numerator(i, k) / (kf * (5.0 * kf - 3.0)),
        ProfileKind::PiecewiseF => f_value(i, k) / (mean_f(k) * kf),
    }
}

/// `ρ_w(c)`: total probability that some neighbor of `w` draws `c`.
pub fn rho(
    profile: &BiasProfile,
    assignment: &ListAssignment,
    g: &BipartiteGraph,
    w: usize,
    c: Color,
) -> Result<f64> {
    if !g.in_part_b(w) {
        return Err(Error::WrongPart(w));
    }
    Ok(rho_unchecked(profile, assignment, g, w, c))
}

fn rho_unchecked(
    profile: &BiasProfile,
    assignment: &ListAssignment,
    g: &BipartiteGraph,
    w: usize,
    c: Color,
) -> f64 {
    g.neighbors(w)
        .iter()
        .map(|&v| prob(profile, assignment, v, c))
        .sum()
}

/// Mean of `ρ_w(c)` over the `⌈eps·k⌉` colors of largest position in `L(w)`.
pub fn tail_average_rho(
    profile: &BiasProfile,
    assignment: &ListAssignment,
    g: &BipartiteGraph,
    w: usize,
    eps: f64,
) -> Result<f64> {
    if !g.in_part_b(w) {
        return Err(Error::WrongPart(w));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidProfile(format!("eps = {eps} outside (0, 1]")));
    }
    let list = assignment.list(w);
    let m = ((eps * list.len() as f64).ceil() as usize).clamp(1, list.len().max(1));
    if list.is_empty() {
        return Ok(0.0);
    }
    let tail = &list[list.len() - m..];
    Ok(tail
        .iter()
        .map(|&c| rho_unchecked(profile, assignment, g, w, c))
        .sum::<f64>()
        / m as f64)
}

/// CSV `c,index,prob` for one vertex.
pub fn probability_csv(profile: &BiasProfile, assignment: &ListAssignment, v: usize) -> String {
    let mut out = String::from("c,index,prob\n");
    for (i, &c) in assignment.list(v).iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            c,
            i + 1,
            prob(profile, assignment, v, c)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_regular_bipartite;
    use crate::lists::{gen_lists, ListMode};
    use num_traits::One;
    use proptest::prelude::*;

    fn brute_mean_f(k: usize) -> Rational {
        let sum: Rational = (1..=k).map(|i| f_exact(i, k)).sum();
        sum / Rational::from_integer(k as i64)
    }

    #[test]
    fn piecewise_breakpoint_values() {
        for k in [10, 40, 250] {
            assert!((f_piecewise(9 * k / 10, k).unwrap() - 13.0 / 40.0).abs() < 1e-15);
            assert_eq!(f_piecewise(k, k).unwrap(), 13.0 / 40.0);
            assert!((f_piecewise(1, k).unwrap() - (1.0 - 3.0 / (4.0 * k as f64))).abs() < 1e-15);
            assert_eq!(f_exact(9 * k / 10, k), Rational::new(13, 40));
        }
        assert_eq!(
            f_piecewise(0, 10),
            Err(Error::ColorIndexOutOfRange { index: 0, k: 10 })
        );
        assert!(f_piecewise(11, 10).is_err());
    }

    #[test]
    fn normalizer_closed_form() {
        for k in [10, 20, 30, 100, 1000] {
            assert_eq!(normalizer_c_exact(k).unwrap(), brute_mean_f(k));
        }
        let c = [10, 100, 1000].map(|k| normalizer_c(k).unwrap());
        assert!(c[0] < c[1] && c[1] < c[2] && c[2] < 503.0 / 800.0);
        assert_eq!(normalizer_c(15), Err(Error::NotDivisibleBy10(15)));
    }

    #[test]
    fn mean_f_matches_brute_force_for_all_k() {
        for k in 1..=60 {
            assert_eq!(mean_f_exact(k), brute_mean_f(k), "k = {k}");
        }
    }

    #[test]
    fn normalizer_k10_by_hand() {
        // f(1..9) = 1 − 3i/40, f(10) = 13/40: (9 − 3·45/40 + 13/40)/10 = 0.595
        assert_eq!(normalizer_c_exact(10).unwrap(), Rational::new(119, 200));
    }

    #[test]
    fn exact_normalization() {
        for k in 1..=80 {
            for kind in [
                ProfileKind::Uniform,
                ProfileKind::LinearDecay,
                ProfileKind::PiecewiseF,
            ] {
                let sum: Rational = BiasProfile::of_kind(kind)
                    .index_weights_exact(k)
                    .into_iter()
                    .sum();
                assert!(sum.is_one(), "{kind} k={k}");
            }
        }
    }

    #[test]
    fn off_list_and_uniform() {
        let l = ListAssignment::new(3, vec![vec![2, 5, 8]]).unwrap();
        for kind in [
            ProfileKind::Uniform,
            ProfileKind::LinearDecay,
            ProfileKind::PiecewiseF,
        ] {
            assert_eq!(prob(&BiasProfile::of_kind(kind), &l, 0, 3), 0.0);
        }
        assert_eq!(prob(&BiasProfile::uniform(), &l, 0, 5), 1.0 / 3.0);
    }

    #[test]
    fn caps_and_shape() {
        for k in [1, 2, 7, 10, 33, 100] {
            let lin = BiasProfile::linear(0.0);
            let pw = BiasProfile::piecewise();
            let lw = lin.index_weights(k);
            let pwv = pw.index_weights(k);
            assert!(lw.iter().all(|&p| p <= lin.max_prob_bound(k) + 1e-15));
            assert!(pwv.iter().all(|&p| p <= pw.max_prob_bound(k) + 1e-15));
            // Ramp then a constant floor of 13/(40Ck).
            let floor = 13.0 / (40.0 * mean_f(k) * k as f64);
            let t = piecewise_breakpoint(k);
            assert!(pwv[t..].iter().all(|&p| (p - floor).abs() < 1e-15));
            assert!(pwv[..t].windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn list_size_rules() {
        let pw = BiasProfile::piecewise().with_p(1e-3);
        // Frozen from a 50-digit evaluation of 0.7969e6 / (0.999 (ln 1e6 − 4 ln ln 1e6)) = 240825.82…
        assert_eq!(
            list_size_k(
                1_000_000,
                &BiasProfile {
                    kind: ProfileKind::Uniform,
                    ..pw
                }
            )
            .unwrap(),
            240_826
        );
        assert_eq!(list_size_k(1_000_000, &pw).unwrap(), 240_830);
        for delta in [6000, 10_000, 123_457, 1 << 22] {
            assert_eq!(
                list_size_k(delta, &BiasProfile::piecewise()).unwrap() % 10,
                0
            );
        }
        assert_eq!(
            list_size_k(100, &BiasProfile::piecewise()),
            Err(Error::DeltaTooSmall(100))
        );
        assert_eq!(
            list_size_k(1, &BiasProfile::uniform()),
            Err(Error::DeltaTooSmall(1))
        );
        let lin = list_size_k(1_000_000, &BiasProfile::linear(0.01).with_p(1e-3)).unwrap();
        assert_eq!(
            lin,
            (0.81e6f64 / (0.999 * (1e6f64.ln() - 4.0 * 1e6f64.ln().ln()))).ceil() as usize
        );
    }

    #[test]
    fn rho_cases() {
        let g = BipartiteGraph::new(1, 1, &[(0, 0)]).unwrap();
        let l = ListAssignment::uniform(2, 4);
        assert!((rho(&BiasProfile::uniform(), &l, &g, 1, 3).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(rho(&BiasProfile::uniform(), &l, &g, 1, 9).unwrap(), 0.0);
        assert_eq!(
            rho(&BiasProfile::uniform(), &l, &g, 0, 1),
            Err(Error::WrongPart(0))
        );
    }

    #[test]
    fn rho_matches_naive_double_loop() {
        let g = gen_regular_bipartite(15, 4, 3).unwrap();
        let l = gen_lists(&g, 8, 14, ListMode::IndependentUniform, 4).unwrap();
        let profile = BiasProfile::linear(0.0);
        let w8 = profile.index_weights(8);
        for w in g.part_b() {
            for &c in l.list(w) {
                let mut naive = 0.0;
                for &v in g.neighbors(w) {
                    for (i, &cv) in l.list(v).iter().enumerate() {
                        if cv == c {
                            naive += w8[i];
                        }
                    }
                }
                assert!((rho(&profile, &l, &g, w, c).unwrap() - naive).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tail_average() {
        let g = gen_regular_bipartite(6, 3, 0).unwrap();
        let l = ListAssignment::uniform(12, 10);
        let lin = BiasProfile::linear(0.0);
        let full = tail_average_rho(&lin, &l, &g, 6, 1.0).unwrap();
        let manual: f64 = (1..=10)
            .map(|c| rho(&lin, &l, &g, 6, c).unwrap())
            .sum::<f64>()
            / 10.0;
        assert!((full - manual).abs() < 1e-12);
        assert!(tail_average_rho(&lin, &l, &g, 6, 0.2).unwrap() < full);

        let disjoint = ListAssignment::new(1, (1..=12).map(|c| vec![c]).collect()).unwrap();
        assert_eq!(tail_average_rho(&lin, &disjoint, &g, 7, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn probability_dump() {
        let l = ListAssignment::new(2, vec![vec![4, 9]]).unwrap();
        let csv = probability_csv(&BiasProfile::linear(0.0), &l, 0);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("c,index,prob\n4,1,"));
    }

    proptest! {
        #[test]
        fn float_weights_normalized_and_monotone(k in 1usize..2000, kind in 0u8..3) {
            let kind = [ProfileKind::Uniform, ProfileKind::LinearDecay, ProfileKind::PiecewiseF][kind as usize];
            let w = BiasProfile::of_kind(kind).index_weights(k);
            let s: f64 = w.iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
            prop_assert!(w.windows(2).all(|p| p[0] >= p[1]));
            prop_assert!(w.iter().all(|&p| p > 0.0));
        }

        #[test]
        fn rho_bounded_by_delta_times_cap(seed in any::<u64>(), kind in 0u8..3) {
            let kind = [ProfileKind::Uniform, ProfileKind::LinearDecay, ProfileKind::PiecewiseF][kind as usize];
            let profile = BiasProfile::of_kind(kind);
            let g = gen_regular_bipartite(10, 4, seed).unwrap();
            let l = gen_lists(&g, 6, 9, ListMode::IndependentUniform, seed).unwrap();
            let cap = profile.max_prob_bound(6);
            for w in g.part_b() {
                for &c in l.list(w) {
                    let r = rho(&profile, &l, &g, w, c).unwrap();
                    prop_assert!(r >= 0.0 && r <= g.delta() as f64 * cap + 1e-12);
                }
            }
        }
    }
}

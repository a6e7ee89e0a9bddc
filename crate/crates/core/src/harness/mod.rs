//! Reproducible experiments over the colorer and the coupon bounds.
//!
//! Trial `t` of a run with base seed `s` uses the child seed
//! `c = mix(s, t)`. From it, the graph is generated with `mix(c, 0)`, the
//! lists with `mix(c, 1)` and the algorithm with `mix(c, 2)`. Profiles compared
//! within one trial therefore see the same instance and the same seed. Rows
//! are collected in trial order, so output does not depend on the worker count.

pub mod config;
pub mod plot;
pub mod table;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{ExperimentConfig, GraphSource, ListSource, Mode};
pub use plot::{emit_plot_data, plot_table, PlotData, PlotKind};
pub use table::ResultTable;

use crate::bias::{list_size_k, rho, BiasProfile};
use crate::colorer::{bad_vertices, default_max_rounds, moser_tardos_color, random_color_side_a};
use crate::coupon::{
    analytic_bound, exact_collection_prob, monte_carlo, product_bound, CouponInstance,
};
use crate::error::{Error, Result};
use crate::graph::{gen_regular_bipartite, BipartiteGraph};
use crate::lists::{gen_lists, Color, ListAssignment};
use crate::seed::mix;

pub const COLOR_COLUMNS: [&str; 9] = [
    "trial",
    "seed",
    "profile",
    "k",
    "success",
    "rounds",
    "initial_bad",
    "remaining_bad",
    "resampled_events",
];
pub const COUPON_COLUMNS: [&str; 7] = [
    "trial",
    "seed",
    "mc_trials",
    "empirical",
    "exact_or_na",
    "product_bound",
    "analytic_bound",
];
pub const COMPARE_COLUMNS: [&str; 4] = ["trial", "seed", "profile", "bad"];

/// Aggregate over the rows of a result table.
///
/// In color and sweep mode the success rate is the fraction of runs that
/// finished, `mean_bad` averages the bad count after the first round, and the
/// confidence radius is the 95% normal-approximation radius of the rate. In
/// coupon mode the success rate is the mean empirical collection frequency and
/// the radius is 1.96 standard errors across trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub success_rate: f64,
    pub mean_rounds: Option<f64>,
    pub mean_bad: Option<f64>,
    pub ci_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub table: ResultTable,
    pub summary: Summary,
}

struct Loaded {
    graph: Option<BipartiteGraph>,
    lists: Option<ListAssignment>,
}

impl Loaded {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let graph = match &cfg.graph {
            GraphSource::File(p) => Some(BipartiteGraph::from_text(&std::fs::read_to_string(p)?)?),
            GraphSource::Regular { .. } => None,
        };
        let lists = match &cfg.lists {
            ListSource::File(p) => Some(ListAssignment::from_text(&std::fs::read_to_string(p)?)?),
            _ => None,
        };
        Ok(Loaded { graph, lists })
    }

    fn delta(&self, cfg: &ExperimentConfig) -> usize {
        match (&self.graph, &cfg.graph) {
            (Some(g), _) => g.delta(),
            (None, GraphSource::Regular { delta, .. }) => *delta,
            (None, GraphSource::File(_)) => unreachable!("file graphs are loaded"),
        }
    }

    /// List size: explicit, from the list file, or from the list-size rule.
    fn k(&self, cfg: &ExperimentConfig) -> Result<usize> {
        match &cfg.lists {
            ListSource::File(_) => Ok(self.lists.as_ref().expect("file lists are loaded").k()),
            ListSource::Disjoint { k } | ListSource::Generated { k: Some(k), .. } => Ok(*k),
            ListSource::Generated { k: None, .. } => list_size_k(self.delta(cfg), &cfg.profile),
        }
    }

    fn instance(
        &self,
        cfg: &ExperimentConfig,
        k: usize,
        trial_seed: u64,
    ) -> Result<(BipartiteGraph, ListAssignment)> {
        let g = match (&self.graph, &cfg.graph) {
            (Some(g), _) => g.clone(),
            (None, &GraphSource::Regular { n, delta }) => {
                gen_regular_bipartite(n, delta, mix(trial_seed, 0))?
            }
            (None, GraphSource::File(_)) => unreachable!("file graphs are loaded"),
        };
        let lists = match &cfg.lists {
            ListSource::File(_) => {
                let l = self.lists.clone().expect("file lists are loaded");
                if l.len() != g.vertex_count() {
                    return Err(Error::ConfigInvalid(format!(
                        "list file has {} lists for {} vertices",
                        l.len(),
                        g.vertex_count()
                    )));
                }
                l
            }
            ListSource::Disjoint { k } => disjoint_lists(g.vertex_count(), *k),
            ListSource::Generated { pool, mode, .. } => {
                gen_lists(&g, k, pool.unwrap_or(2 * k), *mode, mix(trial_seed, 1))?
            }
        };
        Ok((g, lists))
    }
}

/// Vertex `v` gets colors `v·k + 1 ..= v·k + k`.
pub fn disjoint_lists(vertex_count: usize, k: usize) -> ListAssignment {
    let lists = (0..vertex_count)
        .map(|v| (1..=k).map(|c| (v * k + c) as Color).collect())
        .collect();
    ListAssignment::new(k, lists).expect("disjoint lists are well formed")
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::ConfigInvalid(e.to_string()))?
            .install(f)),
    }
}

fn color_row(
    cfg: &ExperimentConfig,
    g: &BipartiteGraph,
    lists: &ListAssignment,
    profile: &BiasProfile,
    trial: usize,
    trial_seed: u64,
) -> Result<Vec<String>> {
    let max_rounds = cfg.max_rounds.unwrap_or_else(|| default_max_rounds(g));
    let run = moser_tardos_color(g, lists, profile, max_rounds, mix(trial_seed, 2))?;
    let r = run.report;
    Ok(vec![
        trial.to_string(),
        trial_seed.to_string(),
        profile.kind.to_string(),
        lists.k().to_string(),
        r.success.to_string(),
        r.rounds.to_string(),
        r.initial_bad().to_string(),
        r.remaining_bad.len().to_string(),
        r.resampled_events.to_string(),
    ])
}

fn coupon_row(
    cfg: &ExperimentConfig,
    loaded: &Loaded,
    k: usize,
    trial: usize,
    trial_seed: u64,
) -> Result<Vec<String>> {
    let pool = match cfg.lists {
        ListSource::Generated {
            pool: Some(pool), ..
        } => pool,
        _ => 2 * k,
    };
    let inst =
        CouponInstance::random(loaded.delta(cfg), k, pool, &cfg.profile, mix(trial_seed, 1))?;
    let exact = match exact_collection_prob(&inst) {
        Ok(q) => q.to_string(),
        Err(Error::TooLargeToEnumerate(_)) => "NA".into(),
        Err(e) => return Err(e),
    };
    let analytic = analytic_bound(&inst).map_or_else(|_| "NA".into(), |b| b.to_string());
    let mc = monte_carlo(&inst, cfg.mc_trials, mix(trial_seed, 2));
    Ok(vec![
        trial.to_string(),
        trial_seed.to_string(),
        cfg.mc_trials.to_string(),
        mc.frequency().to_string(),
        exact,
        product_bound(&inst).to_string(),
        analytic,
    ])
}

fn sweep_profiles(cfg: &ExperimentConfig) -> Vec<BiasProfile> {
    if cfg.sweep_profiles.is_empty() {
        return vec![cfg.profile];
    }
    cfg.sweep_profiles
        .iter()
        .map(|&kind| {
            let p = BiasProfile::of_kind(kind);
            match cfg.profile.p {
                Some(cap) => p.with_p(cap),
                None => p,
            }
        })
        .collect()
}

/// Runs every trial of the configured mode, writes the CSV to `cfg.out` if
/// set, and returns the table with its summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let loaded = Loaded::new(cfg)?;
    let table = with_workers(cfg.workers, || -> Result<ResultTable> {
        match cfg.mode {
            Mode::Color => {
                let k = loaded.k(cfg)?;
                let rows: Vec<Vec<String>> = (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| {
                        let ts = mix(cfg.seed, t as u64);
                        let (g, l) = loaded.instance(cfg, k, ts)?;
                        color_row(cfg, &g, &l, &cfg.profile, t, ts)
                    })
                    .collect::<Result<_>>()?;
                fill(ResultTable::new(COLOR_COLUMNS), rows)
            }
            Mode::Coupon => {
                let k = loaded.k(cfg)?;
                let rows: Vec<Vec<String>> = (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| coupon_row(cfg, &loaded, k, t, mix(cfg.seed, t as u64)))
                    .collect::<Result<_>>()?;
                fill(ResultTable::new(COUPON_COLUMNS), rows)
            }
            Mode::Sweep => {
                let ks = if cfg.sweep_k.is_empty() {
                    vec![loaded.k(cfg)?]
                } else {
                    cfg.sweep_k.clone()
                };
                let profiles = sweep_profiles(cfg);
                let points: Vec<(usize, usize)> = ks
                    .iter()
                    .flat_map(|&k| (0..cfg.trials).map(move |t| (k, t)))
                    .collect();
                let rows: Vec<Vec<Vec<String>>> = points
                    .into_par_iter()
                    .map(|(k, t)| {
                        let ts = mix(cfg.seed, t as u64);
                        let (g, l) = loaded.instance(cfg, k, ts)?;
                        profiles
                            .iter()
                            .map(|p| color_row(cfg, &g, &l, p, t, ts))
                            .collect()
                    })
                    .collect::<Result<_>>()?;
                fill(
                    ResultTable::new(COLOR_COLUMNS),
                    rows.into_iter().flatten().collect(),
                )
            }
        }
    })??;
    let summary = summarize(&table)?;
    if let Some(out) = &cfg.out {
        table.write_csv(out)?;
    }
    Ok(ExperimentResult { table, summary })
}

fn fill(mut table: ResultTable, rows: Vec<Vec<String>>) -> Result<ResultTable> {
    for r in rows {
        table.push(r)?;
    }
    Ok(table)
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Summary of a color, sweep or coupon table, recognised by its columns.
pub fn summarize(table: &ResultTable) -> Result<Summary> {
    let n = table.len();
    if table.has_column("success") {
        let hits = table
            .column("success")?
            .iter()
            .filter(|&&s| s == "true")
            .count();
        let rate = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        let radius = if n == 0 {
            0.0
        } else {
            1.96 * (rate * (1.0 - rate) / n as f64).sqrt()
        };
        Ok(Summary {
            trials: n,
            success_rate: rate,
            mean_rounds: Some(mean(&table.column_f64("rounds")?)),
            mean_bad: Some(mean(&table.column_f64("initial_bad")?)),
            ci_radius: radius,
        })
    } else if table.has_column("empirical") {
        let freq = table.column_f64("empirical")?;
        let m = mean(&freq);
        let radius = if n < 2 {
            0.0
        } else {
            let var = freq.iter().map(|f| (f - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            1.96 * (var / n as f64).sqrt()
        };
        Ok(Summary {
            trials: n,
            success_rate: m,
            mean_rounds: None,
            mean_bad: None,
            ci_radius: radius,
        })
    } else {
        Err(Error::SchemaMismatch(
            "table is neither a color nor a coupon table".into(),
        ))
    }
}

/// Paired differences `other − baseline` with a two-sided sign test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedComparison {
    pub n: usize,
    pub mean_diff: f64,
    /// Pairs where `other` is strictly smaller.
    pub other_lower: usize,
    pub other_higher: usize,
    pub ties: usize,
    pub p_value: f64,
}

pub fn paired_comparison(baseline: &[f64], other: &[f64]) -> Result<PairedComparison> {
    if baseline.len() != other.len() {
        return Err(Error::ConfigInvalid(format!(
            "paired samples differ in length: {} vs {}",
            baseline.len(),
            other.len()
        )));
    }
    if baseline.is_empty() {
        return Err(Error::ConfigInvalid("no paired samples".into()));
    }
    let diffs: Vec<f64> = baseline.iter().zip(other).map(|(b, o)| o - b).collect();
    let lower = diffs.iter().filter(|&&d| d < 0.0).count();
    let higher = diffs.iter().filter(|&&d| d > 0.0).count();
    Ok(PairedComparison {
        n: diffs.len(),
        mean_diff: mean(&diffs),
        other_lower: lower,
        other_higher: higher,
        ties: diffs.len() - lower - higher,
        p_value: sign_test_p(lower, higher),
    })
}

/// Two-sided exact sign test p-value, ties dropped.
pub fn sign_test_p(pos: usize, neg: usize) -> f64 {
    let n = pos + neg;
    if n == 0 {
        return 1.0;
    }
    let m = pos.min(neg);
    let ln2n = n as f64 * std::f64::consts::LN_2;
    let mut ln_choose = 0.0;
    let mut tail = 0.0;
    for i in 0..=m {
        tail += (ln_choose - ln2n).exp();
        ln_choose += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    (2.0 * tail).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileStats {
    pub profile: BiasProfile,
    pub mean_bad: f64,
    /// Mean fraction of part-B vertices that are bad.
    pub bad_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub k: usize,
    pub profiles: Vec<ProfileStats>,
    /// Each later profile against the first.
    pub pairs: Vec<PairedComparison>,
    pub table: ResultTable,
}

impl Comparison {
    pub fn to_text(&self) -> String {
        let mut out = format!("k = {}\nprofile     mean_bad    bad_rate\n", self.k);
        for s in &self.profiles {
            out.push_str(&format!(
                "{:<11} {:<11.4} {:.6}\n",
                s.profile.kind.to_string(),
                s.mean_bad,
                s.bad_rate
            ));
        }
        let base = self.profiles[0].profile.kind;
        for (s, pair) in self.profiles[1..].iter().zip(&self.pairs) {
            out.push_str(&format!(
                "{} - {}: mean diff {:.4}, lower {}, higher {}, ties {}, sign test p = {}\n",
                s.profile.kind,
                base,
                pair.mean_diff,
                pair.other_lower,
                pair.other_higher,
                pair.ties,
                format_p(pair.p_value)
            ));
        }
        out
    }
}

fn format_p(p: f64) -> String {
    if p >= 1e-4 {
        format!("{p:.4}")
    } else {
        format!("{p:.3e}")
    }
}

/// Colors part A once per profile on shared instances and seeds and compares
/// the resulting bad-vertex counts. No resampling is done, so the counts
/// reflect the sampling distribution alone.
pub fn compare_profiles(cfg: &ExperimentConfig, profiles: &[BiasProfile]) -> Result<Comparison> {
    if profiles.len() < 2 {
        return Err(Error::ConfigInvalid(
            "comparison needs at least two profiles".into(),
        ));
    }
    cfg.validate()?;
    for p in profiles {
        p.validate()?;
    }
    let loaded = Loaded::new(cfg)?;
    let k = loaded.k(cfg)?;
    let per_trial: Vec<(u64, usize, Vec<usize>)> = with_workers(cfg.workers, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let ts = mix(cfg.seed, t as u64);
                let (g, l) = loaded.instance(cfg, k, ts)?;
                let bad = profiles
                    .iter()
                    .map(|p| {
                        let coloring = random_color_side_a(&g, &l, p, mix(ts, 2))?;
                        Ok(bad_vertices(&g, &l, &coloring)?.len())
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((ts, g.b_size(), bad))
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let mut table = ResultTable::new(COMPARE_COLUMNS);
    for (t, (ts, _, bad)) in per_trial.iter().enumerate() {
        for (p, b) in profiles.iter().zip(bad) {
            table.push(vec![
                t.to_string(),
                ts.to_string(),
                p.kind.to_string(),
                b.to_string(),
            ])?;
        }
    }
    let column =
        |i: usize| -> Vec<f64> { per_trial.iter().map(|(_, _, bad)| bad[i] as f64).collect() };
    let stats = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let rates: Vec<f64> = per_trial
                .iter()
                .map(|(_, b_size, bad)| {
                    if *b_size == 0 {
                        0.0
                    } else {
                        bad[i] as f64 / *b_size as f64
                    }
                })
                .collect();
            ProfileStats {
                profile: *p,
                mean_bad: mean(&column(i)),
                bad_rate: mean(&rates),
            }
        })
        .collect();
    let base = column(0);
    let pairs = (1..profiles.len())
        .map(|i| paired_comparison(&base, &column(i)))
        .collect::<Result<_>>()?;
    Ok(Comparison {
        k,
        profiles: stats,
        pairs,
        table,
    })
}

/// `ρ(w, c)` for every part-B vertex `w` and every color `c` of its list.
pub fn rho_table(
    profile: &BiasProfile,
    assignment: &ListAssignment,
    g: &BipartiteGraph,
) -> Result<ResultTable> {
    let mut table = ResultTable::new(["w", "c", "rho"]);
    for w in g.part_b() {
        for &c in assignment.list(w) {
            table.push(vec![
                w.to_string(),
                c.to_string(),
                rho(profile, assignment, g, w, c)?.to_string(),
            ])?;
        }
    }
    Ok(table)
}

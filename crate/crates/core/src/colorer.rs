//! One-sided random coloring and the resampling loop that repairs it.
//!
//! Part A is colored by independent draws from a bias profile. A part-B vertex
//! `w` is bad when every color of `L(w)` is taken by some neighbor. The
//! resampler redraws the A-neighbors of bad vertices until no bad vertex
//! remains, after which each B vertex takes its least free color.

use serde::Serialize;

use crate::bias::{BiasProfile, IndexSampler};
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::lists::{Color, ListAssignment};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartialColoring {
    colors: Vec<Option<Color>>,
}

impl PartialColoring {
    pub fn uncolored(vertex_count: usize) -> Self {
        Self {
            colors: vec![None; vertex_count],
        }
    }

    pub fn from_colors(colors: Vec<Option<Color>>) -> Self {
        Self { colors }
    }

    pub fn get(&self, v: usize) -> Option<Color> {
        self.colors.get(v).copied().flatten()
    }

    pub fn set(&mut self, v: usize, c: Color) {
        self.colors[v] = Some(c);
    }

    pub fn clear(&mut self, v: usize) {
        self.colors[v] = None;
    }

    pub fn colors(&self) -> &[Option<Color>] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn is_total(&self) -> bool {
        self.colors.iter().all(Option::is_some)
    }

    /// `vertex color` lines for every colored vertex.
    pub fn to_text(&self) -> String {
        self.colors
            .iter()
            .enumerate()
            .filter_map(|(v, c)| c.map(|c| format!("{v} {c}\n")))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub success: bool,
    /// Rounds executed, counting the initial coloring of part A.
    pub rounds: usize,
    pub resampled_events: usize,
    pub seed: u64,
    /// Number of bad vertices after each round.
    pub bad_history: Vec<usize>,
    /// Bad vertices left when the loop stopped.
    pub remaining_bad: Vec<usize>,
}

impl RunReport {
    pub fn initial_bad(&self) -> usize {
        self.bad_history.first().copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringRun {
    /// The full L-coloring on success.
    pub coloring: Option<PartialColoring>,
    pub report: RunReport,
}

fn check_inputs(g: &BipartiteGraph, assignment: &ListAssignment) -> Result<()> {
    if assignment.len() != g.vertex_count() {
        return Err(Error::InvalidList {
            vertex: assignment.len(),
            reason: format!(
                "{} lists for {} vertices",
                assignment.len(),
                g.vertex_count()
            ),
        });
    }
    if assignment.k() == 0 && g.vertex_count() > 0 {
        return Err(Error::InvalidList {
            vertex: 0,
            reason: "lists are empty".into(),
        });
    }
    Ok(())
}

fn draw(
    v: usize,
    assignment: &ListAssignment,
    sampler: &IndexSampler,
    rng: &mut seed::Rng,
) -> Color {
    assignment.list(v)[sampler.sample(rng)]
}

/// Colors every part-A vertex independently from the profile; part B stays
/// uncolored.
pub fn random_color_side_a(
    g: &BipartiteGraph,
    assignment: &ListAssignment,
    profile: &BiasProfile,
    seed: u64,
) -> Result<PartialColoring> {
    check_inputs(g, assignment)?;
    let sampler = profile.sampler(assignment.k());
    let mut rng = seed::rng(seed);
    let mut coloring = PartialColoring::uncolored(g.vertex_count());
    for v in g.part_a() {
        coloring.set(v, draw(v, assignment, &sampler, &mut rng));
    }
    Ok(coloring)
}

fn neighbor_colors(g: &BipartiteGraph, coloring: &PartialColoring, w: usize, buf: &mut Vec<Color>) {
    buf.clear();
    buf.extend(g.neighbors(w).iter().filter_map(|&v| coloring.get(v)));
    buf.sort_unstable();
    buf.dedup();
}

/// Whether every color of `L(w)` appears on a neighbor of `w`.
pub fn is_bad(
    g: &BipartiteGraph,
    assignment: &ListAssignment,
    coloring: &PartialColoring,
    w: usize,
) -> bool {
    let mut buf = Vec::with_capacity(g.degree(w));
    is_bad_with(g, assignment, coloring, w, &mut buf)
}

fn is_bad_with(
    g: &BipartiteGraph,
    assignment: &ListAssignment,
    coloring: &PartialColoring,
    w: usize,
    buf: &mut Vec<Color>,
) -> bool {
    neighbor_colors(g, coloring, w, buf);
    let list = assignment.list(w);
    list.len() <= buf.len() && list.iter().all(|c| buf.binary_search(c).is_ok())
}

fn require_side_a(g: &BipartiteGraph, coloring: &PartialColoring) -> Result<()> {
    match g.part_a().find(|&v| coloring.get(v).is_none()) {
        Some(v) => Err(Error::SideAIncomplete(v)),
        None => Ok(()),
    }
}

/// The part-B vertices whose whole list is used by their neighbors.
pub fn bad_vertices(
    g: &BipartiteGraph,
    assignment: &ListAssignment,
    coloring: &PartialColoring,
) -> Result<Vec<usize>> {
    require_side_a(g, coloring)?;
    let mut buf = Vec::new();
    Ok(g.part_b()
        .filter(|&w| is_bad_with(g, assignment, coloring, w, &mut buf))
        .collect())
}

/// Gives every part-B vertex the least color of its list unused by its
/// neighbors.
pub fn extend_to_b(
    g: &BipartiteGraph,
    assignment: &ListAssignment,
    coloring: &PartialColoring,
) -> Result<PartialColoring> {
    require_side_a(g, coloring)?;
    let mut out = coloring.clone();
    let mut buf = Vec::new();
    for w in g.part_b() {
        neighbor_colors(g, coloring, w, &mut buf);
        let c = assignment
            .list(w)
            .iter()
            .copied()
            .find(|c| buf.binary_search(c).is_err())
            .ok_or(Error::NoAvailableColor(w))?;
        out.set(w, c);
    }
    Ok(out)
}

/// Symmetric local lemma condition `4·D·p ≤ 1`.
pub fn lll_condition(dependency_degree: usize, event_prob: f64) -> bool {
    4.0 * dependency_degree as f64 * event_prob <= 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LllInstantiation {
    pub delta: usize,
    /// Dependency bound `Δ²` on the bad events of part B.
    pub dependency_bound: usize,
    /// Event probability bound `exp(−ln²Δ)`.
    pub event_prob: f64,
    pub holds: bool,
}

/// The local lemma check with `D = Δ²` and `p = exp(−ln²Δ)`.
pub fn lll_instantiation(delta: usize) -> LllInstantiation {
    let dependency_bound = delta * delta;
    let event_prob = (-(delta as f64).ln().powi(2)).exp();
    LllInstantiation {
        delta,
        dependency_bound,
        event_prob,
        holds: lll_condition(dependency_bound, event_prob),
    }
}

pub fn default_max_rounds(g: &BipartiteGraph) -> usize {
    (100 * g.b_size()).max(1)
}

/// Round-by-round driver of the resampling loop.
///
/// Construction colors part A (round 1). Each [`Resampler::step`] walks the
/// current bad set in ascending order, rechecks each vertex against the
/// coloring as modified so far in the round, and redraws all A-neighbors of
/// the ones still bad.
pub struct Resampler<'a> {
    g: &'a BipartiteGraph,
    assignment: &'a ListAssignment,
    sampler: IndexSampler,
    rng: seed::Rng,
    coloring: PartialColoring,
    bad: Vec<usize>,
    rounds: usize,
    resampled_events: usize,
    history: Vec<usize>,
    buf: Vec<Color>,
}

impl<'a> Resampler<'a> {
    pub fn new(
        g: &'a BipartiteGraph,
        assignment: &'a ListAssignment,
        profile: &BiasProfile,
        seed: u64,
    ) -> Result<Self> {
        check_inputs(g, assignment)?;
        let sampler = profile.sampler(assignment.k());
        let mut rng = seed::rng(seed);
        let mut coloring = PartialColoring::uncolored(g.vertex_count());
        for v in g.part_a() {
            coloring.set(v, draw(v, assignment, &sampler, &mut rng));
        }
        let bad = bad_vertices(g, assignment, &coloring)?;
        let history = vec![bad.len()];
        Ok(Self {
            g,
            assignment,
            sampler,
            rng,
            coloring,
            bad,
            rounds: 1,
            resampled_events: 0,
            history,
            buf: Vec::new(),
        })
    }

    pub fn coloring(&self) -> &PartialColoring {
        &self.coloring
    }

    pub fn bad(&self) -> &[usize] {
        &self.bad
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Runs one resampling round and returns the number of events resampled.
    pub fn step(&mut self) -> usize {
        let mut resampled = 0;
        let current = std::mem::take(&mut self.bad);
        for &w in &current {
            if !is_bad_with(self.g, self.assignment, &self.coloring, w, &mut self.buf) {
                continue;
            }
            for &v in self.g.neighbors(w) {
                let c = draw(v, self.assignment, &self.sampler, &mut self.rng);
                self.coloring.set(v, c);
            }
            resampled += 1;
        }
        self.resampled_events += resampled;
        self.rounds += 1;
        let mut buf = std::mem::take(&mut self.buf);
        self.bad = self
            .g
            .part_b()
            .filter(|&w| is_bad_with(self.g, self.assignment, &self.coloring, w, &mut buf))
            .collect();
        self.buf = buf;
        self.history.push(self.bad.len());
        resampled
    }

    fn report(&self, success: bool, seed: u64) -> RunReport {
        RunReport {
            success,
            rounds: self.rounds,
            resampled_events: self.resampled_events,
            seed,
            bad_history: self.history.clone(),
            remaining_bad: self.bad.clone(),
        }
    }
}

/// Colors part A, resamples until no part-B vertex is bad or `max_rounds`
/// rounds have run, then extends to part B. Running out of rounds is reported
/// in the returned [`RunReport`], not as an error.
pub fn moser_tardos_color(
    g: &BipartiteGraph,
    assignment: &ListAssignment,
    profile: &BiasProfile,
    max_rounds: usize,
    seed: u64,
) -> Result<ColoringRun> {
    if max_rounds == 0 {
        return Err(Error::ConfigInvalid("max_rounds must be at least 1".into()));
    }
    let mut run = Resampler::new(g, assignment, profile, seed)?;
    while !run.bad.is_empty() && run.rounds < max_rounds {
        run.step();
    }
    if !run.bad.is_empty() {
        return Ok(ColoringRun {
            coloring: None,
            report: run.report(false, seed),
        });
    }
    let full = extend_to_b(g, assignment, &run.coloring)?;
    debug_assert!(verify_proper(g, assignment, &full));
    Ok(ColoringRun {
        coloring: Some(full),
        report: run.report(true, seed),
    })
}

/// True iff the coloring is total, uses only list colors, and has no
/// monochromatic edge.
pub fn verify_proper(
    g: &BipartiteGraph,
    assignment: &ListAssignment,
    coloring: &PartialColoring,
) -> bool {
    if coloring.len() != g.vertex_count() || assignment.len() != g.vertex_count() {
        return false;
    }
    for v in 0..g.vertex_count() {
        match coloring.get(v) {
            Some(c) if assignment.index_of(v, c).is_some() => {}
            _ => return false,
        }
    }
    g.part_a().all(|a| {
        g.neighbors(a)
            .iter()
            .all(|&b| coloring.get(a) != coloring.get(b))
    })
}

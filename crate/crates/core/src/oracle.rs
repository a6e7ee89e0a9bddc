//! Exact ground truth for small graphs: L-colorability by backtracking and
//! choosability by exhaustive enumeration of list assignments.
//!
//! The choosability search only visits assignments that can be minimal
//! counterexamples. If `L` is a counterexample on `G` with the fewest
//! vertices, then
//!
//! * `G` is connected and has minimum degree at least `k` (a vertex of degree
//!   below `k` can always be colored last), and
//! * every color of every `L(v)` appears in some neighbor's list (otherwise
//!   `v` can take that color and be deleted).
//!
//! Hence `G` is `k`-choosable iff no connected induced subgraph of minimum
//! degree `≥ k` has such a "tight" counterexample. Colors are canonicalized by
//! first occurrence, so each assignment is visited once up to renaming.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::colorer::PartialColoring;
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::lists::{Color, ListAssignment};

/// Limit on search nodes visited by one choosability query.
pub const NODE_CAP: usize = 10_000_000;
/// Largest k-core the subgraph enumeration accepts.
pub const MAX_CORE_VERTICES: usize = 24;

/// Decides whether `g` has an L-coloring and returns one if so.
///
/// Backtracking picks the uncolored vertex with the fewest available colors,
/// ties broken by index, and tries its available colors in increasing order.
pub fn l_colorable(g: &BipartiteGraph, assignment: &ListAssignment) -> Option<PartialColoring> {
    let n = g.vertex_count();
    if assignment.len() != n {
        return None;
    }
    let mut colors: Vec<Option<Color>> = vec![None; n];
    backtrack(g, assignment, &mut colors, n).then(|| PartialColoring::from_colors(colors))
}

fn available_count(
    g: &BipartiteGraph,
    assignment: &ListAssignment,
    colors: &[Option<Color>],
    v: usize,
) -> usize {
    let nbrs = g.neighbors(v);
    assignment
        .list(v)
        .iter()
        .filter(|&&c| nbrs.iter().all(|&u| colors[u] != Some(c)))
        .count()
}

fn backtrack(
    g: &BipartiteGraph,
    assignment: &ListAssignment,
    colors: &mut [Option<Color>],
    remaining: usize,
) -> bool {
    if remaining == 0 {
        return true;
    }
    let mut best: Option<(usize, usize)> = None;
    for v in 0..colors.len() {
        if colors[v].is_some() {
            continue;
        }
        let n = available_count(g, assignment, colors, v);
        if n == 0 {
            return false;
        }
        if best.is_none_or(|(_, m)| n < m) {
            best = Some((v, n));
        }
    }
    let (v, _) = best.expect("an uncolored vertex remains");
    let choices: Vec<Color> = assignment
        .list(v)
        .iter()
        .copied()
        .filter(|&c| g.neighbors(v).iter().all(|&u| colors[u] != Some(c)))
        .collect();
    for c in choices {
        colors[v] = Some(c);
        if backtrack(g, assignment, colors, remaining - 1) {
            return true;
        }
    }
    colors[v] = None;
    false
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Choosability {
    Choosable,
    /// A `k`-list assignment with no L-coloring.
    Counterexample(ListAssignment),
}

impl Choosability {
    pub fn is_choosable(&self) -> bool {
        matches!(self, Choosability::Choosable)
    }
}

/// Whether every assignment of `k`-subsets of `1..=pool` admits an
/// L-coloring. `pool` defaults to `k·|V|`.
pub fn choosable(g: &BipartiteGraph, k: usize, pool: Option<usize>) -> Result<Choosability> {
    let n = g.vertex_count();
    let pool = pool.unwrap_or(k * n);
    if k == 0 {
        return Ok(if n == 0 {
            Choosability::Choosable
        } else {
            Choosability::Counterexample(ListAssignment::new(0, vec![Vec::new(); n])?)
        });
    }
    if pool < k {
        return Err(Error::PoolTooSmall { pool, k });
    }
    let core = k_core(g, k);
    if core.len() > MAX_CORE_VERTICES {
        return Err(Error::TooLargeToEnumerate(format!(
            "{}-core has {} vertices (limit {MAX_CORE_VERTICES})",
            k,
            core.len()
        )));
    }
    let candidates = candidate_subgraphs(g, &core, k);
    let nodes = AtomicUsize::new(0);
    let found = candidates
        .par_iter()
        .map(|vertices| search_subgraph(g, vertices, k, pool, &nodes))
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    match found {
        None => Ok(Choosability::Choosable),
        Some(Err(e)) => Err(e),
        Some(Ok(Some((vertices, lists)))) => Ok(Choosability::Counterexample(
            complete_counterexample(n, k, &vertices, lists),
        )),
        Some(Ok(None)) => unreachable!(),
    }
}

/// Least `k` for which `g` is `k`-choosable.
pub fn choosability(g: &BipartiteGraph, pool: Option<usize>) -> Result<usize> {
    // Greedy coloring shows (Δ + 1)-choosability.
    for k in 1..=g.delta() + 1 {
        if choosable(g, k, pool)?.is_choosable() {
            return Ok(k);
        }
    }
    Ok(g.delta() + 1)
}

/// Exact chromatic number by plain backtracking over vertex order.
pub fn chromatic_number(g: &BipartiteGraph) -> usize {
    let n = g.vertex_count();
    (0..=n)
        .find(|&k| {
            let mut colors = vec![usize::MAX; n];
            color_in_order(g, k, 0, &mut colors)
        })
        .unwrap_or(n)
}

fn color_in_order(g: &BipartiteGraph, k: usize, v: usize, colors: &mut [usize]) -> bool {
    if v == colors.len() {
        return true;
    }
    for c in 0..k {
        if g.neighbors(v).iter().all(|&u| colors[u] != c) {
            colors[v] = c;
            if color_in_order(g, k, v + 1, colors) {
                return true;
            }
        }
    }
    colors[v] = usize::MAX;
    false
}

fn k_core(g: &BipartiteGraph, k: usize) -> Vec<usize> {
    let n = g.vertex_count();
    let mut alive = vec![true; n];
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] < k).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &u in g.neighbors(v) {
            if alive[u] {
                deg[u] -= 1;
                if deg[u] < k {
                    stack.push(u);
                }
            }
        }
    }
    (0..n).filter(|&v| alive[v]).collect()
}

/// Connected vertex subsets of the core whose induced minimum degree is at
/// least `k`, smallest first.
fn candidate_subgraphs(g: &BipartiteGraph, core: &[usize], k: usize) -> Vec<Vec<usize>> {
    let m = core.len();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << m) {
        let vs: Vec<usize> = (0..m)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| core[i])
            .collect();
        let ok_degree = vs
            .iter()
            .all(|&v| g.neighbors(v).iter().filter(|u| vs.contains(u)).count() >= k);
        if ok_degree && is_connected(g, &vs) {
            out.push(vs);
        }
    }
    out.sort_by_key(|vs| vs.len());
    out
}

fn is_connected(g: &BipartiteGraph, vs: &[usize]) -> bool {
    let mut seen = vec![vs[0]];
    let mut stack = vec![vs[0]];
    while let Some(v) = stack.pop() {
        for &u in g.neighbors(v) {
            if vs.contains(&u) && !seen.contains(&u) {
                seen.push(u);
                stack.push(u);
            }
        }
    }
    seen.len() == vs.len()
}

/// Vertices of a subgraph in the original numbering, with their lists.
type SubgraphCounterexample = (Vec<usize>, Vec<Vec<Color>>);

struct TightSearch<'a> {
    sub: &'a BipartiteGraph,
    order: Vec<usize>,
    /// For each position, the vertices whose closed neighborhood is complete
    /// once that position is assigned.
    completes: Vec<Vec<usize>>,
    has_later_neighbor: Vec<bool>,
    k: usize,
    pool: usize,
    lists: Vec<Vec<Color>>,
    nodes: &'a AtomicUsize,
}

fn search_subgraph(
    g: &BipartiteGraph,
    vertices: &[usize],
    k: usize,
    pool: usize,
    nodes: &AtomicUsize,
) -> Result<Option<SubgraphCounterexample>> {
    let (sub, map) = g.induced(vertices);
    let m = sub.vertex_count();

    // Maximum-cardinality order so neighborhoods complete early.
    let mut order = Vec::with_capacity(m);
    let mut placed = vec![false; m];
    let mut weight = vec![0usize; m];
    for _ in 0..m {
        let v = (0..m)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
            .expect("unplaced vertex");
        placed[v] = true;
        order.push(v);
        for &u in sub.neighbors(v) {
            weight[u] += 1;
        }
    }
    let mut pos = vec![0; m];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut completes = vec![Vec::new(); m];
    let mut has_later_neighbor = vec![false; m];
    for v in 0..m {
        let done = sub
            .neighbors(v)
            .iter()
            .map(|&u| pos[u])
            .max()
            .unwrap_or(0)
            .max(pos[v]);
        completes[done].push(v);
        has_later_neighbor[pos[v]] = sub.neighbors(v).iter().any(|&u| pos[u] > pos[v]);
    }
    let mut search = TightSearch {
        sub: &sub,
        order,
        completes,
        has_later_neighbor,
        k,
        pool,
        lists: vec![Vec::new(); m],
        nodes,
    };
    Ok(search.run(0, 0)?.map(|lists| (map, lists)))
}

impl TightSearch<'_> {
    fn run(&mut self, i: usize, used: usize) -> Result<Option<Vec<Vec<Color>>>> {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= NODE_CAP {
            return Err(Error::TooLargeToEnumerate(format!(
                "more than {NODE_CAP} search nodes"
            )));
        }
        if i == self.order.len() {
            let assignment = ListAssignment::new(self.k, self.lists.clone())?;
            return Ok(l_colorable(self.sub, &assignment)
                .is_none()
                .then(|| self.lists.clone()));
        }
        let v = self.order[i];
        let k = self.k;
        let max_new = if self.has_later_neighbor[i] { k } else { 0 };
        for new in 0..=max_new.min(self.pool.saturating_sub(used)) {
            let old = k - new;
            if old > used {
                continue;
            }
            let mut combo: Vec<usize> = (0..old).collect();
            loop {
                let mut list: Vec<Color> = combo.iter().map(|&c| c as Color + 1).collect();
                list.extend((used + 1..=used + new).map(|c| c as Color));
                self.lists[v] = list;
                if self.tight_at(i) {
                    if let Some(found) = self.run(i + 1, used + new)? {
                        return Ok(Some(found));
                    }
                }
                if !next_combination(&mut combo, used) {
                    break;
                }
            }
        }
        self.lists[v].clear();
        Ok(None)
    }

    fn tight_at(&self, i: usize) -> bool {
        self.completes[i].iter().all(|&v| {
            self.lists[v].iter().all(|c| {
                self.sub
                    .neighbors(v)
                    .iter()
                    .any(|&u| self.lists[u].binary_search(c).is_ok())
            })
        })
    }
}

/// Advances `combo` (strictly increasing indices below `n`) to the next
/// combination in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let r = combo.len();
    for i in (0..r).rev() {
        if combo[i] < n - r + i {
            combo[i] += 1;
            for j in i + 1..r {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn complete_counterexample(
    n: usize,
    k: usize,
    vertices: &[usize],
    sub_lists: Vec<Vec<Color>>,
) -> ListAssignment {
    let mut next = sub_lists.iter().flatten().copied().max().unwrap_or(0) + 1;
    let mut lists: Vec<Option<Vec<Color>>> = vec![None; n];
    for (&v, list) in vertices.iter().zip(sub_lists) {
        lists[v] = Some(list);
    }
    let lists = lists
        .into_iter()
        .map(|l| {
            l.unwrap_or_else(|| {
                let fresh = (next..next + k as Color).collect();
                next += k as Color;
                fresh
            })
        })
        .collect();
    ListAssignment::new(k, lists).expect("counterexample lists are well formed")
}

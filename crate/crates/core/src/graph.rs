//! Bipartite graphs with dense vertex indices.
//!
//! Vertices are numbered globally: part A occupies `0..a_size` and part B
//! occupies `a_size..a_size + b_size`. Edges are given to the constructors with
//! part-local indices `(a_idx, b_idx)`.

use std::fmt::Write as _;
use std::ops::Range;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{parse_err, Error, Result};
use crate::seed;

/// Maximum number of repair steps spent on a single matching.
pub const MAX_MATCHING_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    a_size: usize,
    b_size: usize,
    adjacency: Vec<Vec<usize>>,
    delta: usize,
}

impl BipartiteGraph {
    /// Builds a validated graph from part-local edge pairs.
    pub fn new(a_size: usize, b_size: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let n = a_size + b_size;
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= a_size {
                return Err(Error::IndexOutOfRange {
                    index: a,
                    size: a_size,
                });
            }
            if b >= b_size {
                return Err(Error::IndexOutOfRange {
                    index: b,
                    size: b_size,
                });
            }
            adjacency[a].push(a_size + b);
            adjacency[a_size + b].push(a);
        }
        for (v, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if let Some(w) = nbrs.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = if v < a_size {
                    (v, w[0] - a_size)
                } else {
                    (w[0], v - a_size)
                };
                return Err(Error::DuplicateEdge(a, b));
            }
        }
        let delta = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            a_size,
            b_size,
            adjacency,
            delta,
        })
    }

    /// Builds a graph from edges given as global vertex indices, in either order.
    pub fn from_global_edges(
        a_size: usize,
        b_size: usize,
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        let n = a_size + b_size;
        let mut local = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x, size: n });
                }
            }
            match (u < a_size, v < a_size) {
                (true, false) => local.push((u, v - a_size)),
                (false, true) => local.push((v, u - a_size)),
                _ => return Err(Error::NonBipartiteEdge(u, v)),
            }
        }
        Self::new(a_size, b_size, &local)
    }

    pub fn a_size(&self) -> usize {
        self.a_size
    }

    pub fn b_size(&self) -> usize {
        self.b_size
    }

    pub fn vertex_count(&self) -> usize {
        self.a_size + self.b_size
    }

    pub fn part_a(&self) -> Range<usize> {
        0..self.a_size
    }

    pub fn part_b(&self) -> Range<usize> {
        self.a_size..self.a_size + self.b_size
    }

    pub fn in_part_a(&self, v: usize) -> bool {
        v < self.a_size
    }

    pub fn in_part_b(&self, v: usize) -> bool {
        v >= self.a_size && v < self.vertex_count()
    }

    /// Sorted global neighbor indices.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Maximum vertex degree.
    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency[..self.a_size].iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency
            .get(u)
            .is_some_and(|n| n.binary_search(&v).is_ok())
    }

    /// Edges as part-local `(a_idx, b_idx)` pairs in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.part_a()
            .flat_map(|a| self.adjacency[a].iter().map(move |&b| (a, b - self.a_size)))
            .collect()
    }

    /// Induced subgraph on a set of global vertices. Returns the subgraph and
    /// the map from its global indices back to the original ones.
    pub fn induced(&self, vertices: &[usize]) -> (BipartiteGraph, Vec<usize>) {
        let mut a: Vec<usize> = vertices
            .iter()
            .copied()
            .filter(|&v| self.in_part_a(v))
            .collect();
        let mut b: Vec<usize> = vertices
            .iter()
            .copied()
            .filter(|&v| self.in_part_b(v))
            .collect();
        a.sort_unstable();
        a.dedup();
        b.sort_unstable();
        b.dedup();
        let mut edges = Vec::new();
        for (i, &u) in a.iter().enumerate() {
            for (j, &w) in b.iter().enumerate() {
                if self.has_edge(u, w) {
                    edges.push((i, j));
                }
            }
        }
        let sub = BipartiteGraph::new(a.len(), b.len(), &edges).expect("induced edges are valid");
        let map = a.into_iter().chain(b).collect();
        (sub, map)
    }

    pub fn to_text(&self) -> String {
        let edges = self.edges();
        let mut out = format!(
            "bipartite {} {} {}\n",
            self.a_size,
            self.b_size,
            edges.len()
        );
        for (a, b) in edges {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }

    /// Parses the `bipartite <a_size> <b_size> <edge_count>` text format.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "bipartite" {
            return Err(parse_err(
                hline,
                "expected `bipartite <a_size> <b_size> <edge_count>`",
            ));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(hline, format!("bad count `{s}`")))
        };
        let (a_size, b_size, m) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);

        let mut edges = Vec::with_capacity(m);
        let mut seen = std::collections::HashSet::with_capacity(m);
        for (line, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(parse_err(line, "expected `a_idx b_idx`"));
            }
            let a: usize = parts[0]
                .parse()
                .map_err(|_| parse_err(line, "bad a index"))?;
            let b: usize = parts[1]
                .parse()
                .map_err(|_| parse_err(line, "bad b index"))?;
            if a >= a_size || b >= b_size {
                return Err(parse_err(line, format!("edge ({a}, {b}) out of range")));
            }
            if !seen.insert((a, b)) {
                return Err(parse_err(line, format!("duplicate edge ({a}, {b})")));
            }
            edges.push((a, b));
        }
        if edges.len() != m {
            return Err(parse_err(
                hline,
                format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        Self::new(a_size, b_size, &edges)
    }
}

pub fn max_degree(g: &BipartiteGraph) -> usize {
    g.delta()
}

/// Uniformly shaped random `delta`-regular bipartite graph on `n + n` vertices,
/// built by superposing `delta` random perfect matchings.
///
/// A matching that collides with earlier ones is repaired by random
/// transpositions that never increase the number of collisions. For
/// `delta > n / 2` the complement of an `(n - delta)`-regular graph is
/// returned instead, which keeps the repair walk in its easy regime.
pub fn gen_regular_bipartite(n: usize, delta: usize, seed: u64) -> Result<BipartiteGraph> {
    if delta == 0 || delta > n {
        return Err(Error::InfeasibleDegree { n, delta });
    }
    let mut rng = seed::rng(seed);
    if 2 * delta > n {
        let mut present = vec![vec![false; n]; n];
        if delta < n {
            for m in superpose_matchings(n, n - delta, &mut rng)? {
                for (a, &b) in m.iter().enumerate() {
                    present[a][b] = true;
                }
            }
        }
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| !present[a][b])
            .collect();
        return BipartiteGraph::new(n, n, &edges);
    }
    let matchings = superpose_matchings(n, delta, &mut rng)?;
    let edges: Vec<(usize, usize)> = matchings
        .iter()
        .flat_map(|m| m.iter().enumerate().map(|(a, &b)| (a, b)))
        .collect();
    BipartiteGraph::new(n, n, &edges)
}

fn superpose_matchings(n: usize, count: usize, rng: &mut seed::Rng) -> Result<Vec<Vec<usize>>> {
    let mut used = vec![vec![false; n]; n];
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let collides = |used: &[Vec<bool>], a: usize, b: usize| used[a][b] as usize;
        let mut bad: usize = (0..n).map(|a| collides(&used, a, perm[a])).sum();
        let mut attempts = 0;
        while bad > 0 {
            if attempts == MAX_MATCHING_ATTEMPTS {
                return Err(Error::RetryExhausted {
                    matching: index,
                    attempts,
                });
            }
            attempts += 1;
            let i = loop {
                let i = rng.gen_range(0..n);
                if used[i][perm[i]] {
                    break i;
                }
            };
            let j = rng.gen_range(0..n);
            if i == j {
                continue;
            }
            let before = collides(&used, i, perm[i]) + collides(&used, j, perm[j]);
            let after = collides(&used, i, perm[j]) + collides(&used, j, perm[i]);
            if after <= before {
                perm.swap(i, j);
                bad = bad + after - before;
            }
        }
        for (a, &b) in perm.iter().enumerate() {
            used[a][b] = true;
        }
        out.push(perm);
    }
    Ok(out)
}

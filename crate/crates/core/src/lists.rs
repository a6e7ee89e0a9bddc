//! List assignments and the per-vertex overlap statistics used in the
//! analysis of part B.

use std::fmt::Write as _;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::seq::index::sample;

use crate::error::{parse_err, Error, Result};
use crate::graph::BipartiteGraph;
use crate::seed;

pub type Color = u32;
pub type Rational = Ratio<i64>;

/// Per-vertex strictly increasing color lists of a common size `k`, indexed by
/// global vertex number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListAssignment {
    k: usize,
    lists: Vec<Vec<Color>>,
}

impl ListAssignment {
    pub fn new(k: usize, lists: Vec<Vec<Color>>) -> Result<Self> {
        for (vertex, list) in lists.iter().enumerate() {
            if list.len() != k {
                return Err(Error::InvalidList {
                    vertex,
                    reason: format!("length {} != k = {k}", list.len()),
                });
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidList {
                    vertex,
                    reason: "entries are not strictly increasing".into(),
                });
            }
        }
        Ok(Self { k, lists })
    }

    /// Same list `{first, .., first + k - 1}` on every vertex.
    pub fn uniform(vertex_count: usize, k: usize) -> Self {
        let list: Vec<Color> = (1..=k as Color).collect();
        Self {
            k,
            lists: vec![list; vertex_count],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn list(&self, v: usize) -> &[Color] {
        &self.lists[v]
    }

    pub fn lists(&self) -> &[Vec<Color>] {
        &self.lists
    }

    /// 1-based position of `c` in `L(v)`.
    pub fn index_of(&self, v: usize, c: Color) -> Option<usize> {
        self.lists[v].binary_search(&c).ok().map(|i| i + 1)
    }

    /// `|L(v) ∩ L(w)|` by sorted merge.
    pub fn shared_count(&self, v: usize, w: usize) -> usize {
        sorted_intersection_len(&self.lists[v], &self.lists[w])
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("lists {} {}\n", self.lists.len(), self.k);
        for list in &self.lists {
            let line: Vec<String> = list.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.starts_with('#'));
        let (hline, header) = loop {
            match lines.next() {
                Some((_, "")) => continue,
                Some(h) => break h,
                None => return Err(parse_err(1, "missing header")),
            }
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 || fields[0] != "lists" {
            return Err(parse_err(hline, "expected `lists <vertex_count> <k>`"));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(hline, format!("bad count `{s}`")))
        };
        let (count, k) = (num(fields[1])?, num(fields[2])?);
        let mut lists = Vec::with_capacity(count);
        for (line, l) in lines {
            if lists.len() == count {
                if l.is_empty() {
                    continue;
                }
                return Err(parse_err(line, "more lists than declared"));
            }
            let list = l
                .split_whitespace()
                .map(|t| {
                    t.parse::<Color>()
                        .map_err(|_| parse_err(line, format!("bad color `{t}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if list.len() != k {
                return Err(parse_err(
                    line,
                    format!("expected {k} colors, found {}", list.len()),
                ));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(parse_err(line, "colors must be strictly increasing"));
            }
            lists.push(list);
        }
        if lists.len() != count {
            return Err(parse_err(
                hline,
                format!("header declares {count} lists, found {}", lists.len()),
            ));
        }
        Self::new(k, lists)
    }
}

pub(crate) fn sorted_intersection_len(a: &[Color], b: &[Color]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn require_part_b(g: &BipartiteGraph, w: usize) -> Result<()> {
    if g.in_part_b(w) {
        Ok(())
    } else {
        Err(Error::WrongPart(w))
    }
}

/// `Z(w)`: sum of list overlaps between `w` and its neighbors.
pub fn weight(assignment: &ListAssignment, g: &BipartiteGraph, w: usize) -> Result<usize> {
    require_part_b(g, w)?;
    Ok(g.neighbors(w)
        .iter()
        .map(|&v| assignment.shared_count(v, w))
        .sum())
}

/// Overlap statistics of a part-B vertex. Ratios are exact; `delta` is the
/// graph's maximum degree.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightStats {
    pub w: usize,
    pub k: usize,
    pub delta: usize,
    /// `(v, ℓ_{v,w})` for every neighbor `v`, in neighbor order.
    pub shared: Vec<(usize, usize)>,
    pub big_z: usize,
    pub z: Rational,
    pub y: Rational,
    pub alpha: Rational,
    /// Neighbors with overlap above `⌊9k/10⌋`.
    pub n_prime: Vec<usize>,
    pub n_dprime: Vec<usize>,
    /// Mean overlap over `n_dprime`; `None` when it is empty.
    pub ell_bar: Option<Rational>,
}

impl WeightStats {
    pub fn z_f64(&self) -> f64 {
        ratio_f64(self.z)
    }

    pub fn y_f64(&self) -> f64 {
        ratio_f64(self.y)
    }

    pub fn alpha_f64(&self) -> f64 {
        ratio_f64(self.alpha)
    }

    pub fn ell_bar_f64(&self) -> Option<f64> {
        self.ell_bar.map(ratio_f64)
    }

    /// `Σ_{v ∈ N''(w)} ℓ_{v,w}` counted directly.
    pub fn dprime_overlap_sum(&self) -> usize {
        self.shared
            .iter()
            .filter(|(v, _)| self.n_dprime.contains(v))
            .map(|&(_, l)| l)
            .sum()
    }

    /// `(z − y(α + 9/10))·kΔ`, which equals [`Self::dprime_overlap_sum`].
    pub fn dprime_overlap_identity(&self) -> Rational {
        let kd = Rational::from_integer((self.k * self.delta) as i64);
        (self.z - self.y * (self.alpha + Rational::new(9, 10))) * kd
    }

    /// `k(z − (9/10 + α)y)/(1 − y)`, defined for `y < 1`.
    pub fn ell_bar_formula(&self) -> Option<Rational> {
        let one = Rational::from_integer(1);
        if self.y >= one {
            return None;
        }
        let k = Rational::from_integer(self.k as i64);
        Some(k * (self.z - (Rational::new(9, 10) + self.alpha) * self.y) / (one - self.y))
    }
}

pub fn ratio_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Overlap threshold `⌊9k/10⌋`; a neighbor is in `N'(w)` when its overlap is
/// strictly larger.
pub fn overlap_threshold(k: usize) -> usize {
    9 * k / 10
}

pub fn weight_stats(
    assignment: &ListAssignment,
    g: &BipartiteGraph,
    w: usize,
) -> Result<WeightStats> {
    require_part_b(g, w)?;
    let k = assignment.k();
    let delta = g.delta();
    let shared: Vec<(usize, usize)> = g
        .neighbors(w)
        .iter()
        .map(|&v| (v, assignment.shared_count(v, w)))
        .collect();
    let big_z: usize = shared.iter().map(|&(_, l)| l).sum();
    let threshold = overlap_threshold(k);
    let (n_prime, n_dprime): (Vec<_>, Vec<_>) = shared.iter().partition(|&&(_, l)| l > threshold);

    let kd = (k * delta) as i64;
    let (z, y, alpha) = if kd == 0 {
        (Rational::zero(), Rational::zero(), Rational::zero())
    } else {
        let z = Rational::new(big_z as i64, kd);
        let y = Rational::new(n_prime.len() as i64, delta as i64);
        // Σ (ℓ − 9k/10) over N', scaled by 10 to stay integral.
        let excess10: i64 = n_prime
            .iter()
            .map(|&(_, l)| 10 * l as i64 - 9 * k as i64)
            .sum();
        let alpha = if n_prime.is_empty() {
            Rational::zero()
        } else {
            Rational::new(excess10, 10 * n_prime.len() as i64 * k as i64)
        };
        (z, y, alpha)
    };
    let ell_bar = (!n_dprime.is_empty()).then(|| {
        let sum: usize = n_dprime.iter().map(|&(_, l)| l).sum();
        Rational::new(sum as i64, n_dprime.len() as i64)
    });
    Ok(WeightStats {
        w,
        k,
        delta,
        big_z,
        z,
        y,
        alpha,
        n_prime: n_prime.iter().map(|&(v, _)| v).collect(),
        n_dprime: n_dprime.iter().map(|&(v, _)| v).collect(),
        ell_bar,
        shared,
    })
}

/// CSV with header `w,Z,z,y,alpha,ell_bar` over all of part B.
pub fn stats_csv(assignment: &ListAssignment, g: &BipartiteGraph) -> Result<String> {
    let mut out = String::from("w,Z,z,y,alpha,ell_bar\n");
    for w in g.part_b() {
        let s = weight_stats(assignment, g, w)?;
        let ell = s
            .ell_bar_f64()
            .map_or_else(|| "NA".to_string(), |x| x.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            w,
            s.big_z,
            s.z_f64(),
            s.y_f64(),
            s.alpha_f64(),
            ell
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ListMode {
    /// Every list is an independent uniform `k`-subset of `1..=pool`.
    IndependentUniform,
    /// Lists are uniform `k`-subsets of a palette of `round(k/θ)` colors, so
    /// the expected overlap of any two lists is `k²/round(k/θ) ≈ θk`. The
    /// shared colors of a pair tend to sit at similar positions in both lists.
    PlantedOverlap(f64),
}

pub fn gen_lists(
    g: &BipartiteGraph,
    k: usize,
    pool: usize,
    mode: ListMode,
    seed: u64,
) -> Result<ListAssignment> {
    if pool < k {
        return Err(Error::PoolTooSmall { pool, k });
    }
    let palette = match mode {
        ListMode::IndependentUniform => pool,
        ListMode::PlantedOverlap(theta) => {
            if !(theta > 0.0 && theta <= 1.0) {
                return Err(Error::ConfigInvalid(format!(
                    "overlap fraction {theta} outside (0, 1]"
                )));
            }
            ((k as f64 / theta).round() as usize).max(k)
        }
    };
    let mut rng = seed::rng(seed);
    let lists = (0..g.vertex_count())
        .map(|_| {
            let mut list: Vec<Color> = sample(&mut rng, palette, k)
                .into_iter()
                .map(|i| i as Color + 1)
                .collect();
            list.sort_unstable();
            list
        })
        .collect();
    ListAssignment::new(k, lists)
}

//! Maximization of the second-branch coefficient `h(a, y, z)` over a box cut
//! by `z − a·y ≤ 0.66535`, plus the first-branch value and a certificate that
//! both stay below `0.7969`.
//!
//! The search is a dense grid scan followed by Nelder–Mead on `h ∘ P`, where
//! `P` maps a point into the feasible region (clamp to the box, then pull `z`
//! down onto the cut). Working on the composite keeps the simplex
//! non-degenerate even when the optimum sits on a face.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 800/503, rounded once.
pub const PREFACTOR: f64 = 800.0 / 503.0;
/// 13307/20000.
pub const CUT: f64 = 13307.0 / 20000.0;
/// Both branches must stay strictly below this.
pub const THRESHOLD: f64 = 7969.0 / 10000.0;
pub const DEFAULT_GRID_STEP: f64 = 1e-3;
pub const DEFAULT_REFINE_TOL: f64 = 1e-12;

const QUAD: f64 = 3.0 / 8.0;
const Y_CONST: f64 = 477.0 / 800.0;
const Y_A_COEF: f64 = 13.0 / 40.0;
const Y_SHIFT: f64 = 9.0 / 10.0;
const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintBox {
    pub a: (f64, f64),
    pub y: (f64, f64),
    pub z: (f64, f64),
    /// Upper bound on `z − a·y`.
    pub cut: f64,
}

impl Default for ConstraintBox {
    fn default() -> Self {
        ConstraintBox {
            a: (0.0, 0.1),
            y: (0.0, 0.9),
            z: (0.0, 0.8),
            cut: CUT,
        }
    }
}

impl ConstraintBox {
    pub fn with_cut(mut self, cut: f64) -> Self {
        self.cut = cut;
        self
    }

    pub fn point(p: [f64; 3]) -> Self {
        ConstraintBox {
            a: (p[0], p[0]),
            y: (p[1], p[1]),
            z: (p[2], p[2]),
            cut: f64::INFINITY,
        }
    }

    /// Ranges ordered, `y` bounded away from 1, and some corner satisfies the
    /// cut (`z − a·y` is bilinear, so its minimum is at a corner).
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("a", self.a), ("y", self.y), ("z", self.z)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::ConfigInvalid(format!(
                    "bad {name} range [{lo}, {hi}]"
                )));
            }
        }
        if self.y.1 >= 1.0 {
            return Err(Error::SingularAtYOne(self.y.1));
        }
        let min_cut = [self.a.0, self.a.1]
            .iter()
            .flat_map(|&a| [self.y.0, self.y.1].map(|y| self.z.0 - a * y))
            .fold(f64::INFINITY, f64::min);
        if min_cut > self.cut {
            return Err(Error::ConfigInvalid("feasible region is empty".into()));
        }
        Ok(())
    }

    pub fn contains(&self, [a, y, z]: [f64; 3]) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| {
            v >= lo - FEASIBILITY_SLACK && v <= hi + FEASIBILITY_SLACK
        };
        inside(a, self.a)
            && inside(y, self.y)
            && inside(z, self.z)
            && z - a * y <= self.cut + FEASIBILITY_SLACK
    }

    /// Clamp to the box, then lower `z` onto the cut if it is violated.
    pub fn project(&self, [a, y, z]: [f64; 3]) -> [f64; 3] {
        let a = a.clamp(self.a.0, self.a.1);
        let y = y.clamp(self.y.0, self.y.1);
        let mut z = z.clamp(self.z.0, self.z.1);
        if z - a * y > self.cut {
            z = (self.cut + a * y).clamp(self.z.0, self.z.1);
        }
        [a, y, z]
    }
}

/// `z − (0.9 + a)·y`.
pub fn g_linear(a: f64, y: f64, z: f64) -> f64 {
    z - (Y_SHIFT + a) * y
}

/// The objective with an adjustable prefactor, so the certificate can be
/// checked against a deliberately weakened constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub prefactor: f64,
}

impl Default for Objective {
    fn default() -> Self {
        Objective {
            prefactor: PREFACTOR,
        }
    }
}

impl Objective {
    pub fn h(&self, a: f64, y: f64, z: f64) -> Result<f64> {
        if y >= 1.0 {
            return Err(Error::SingularAtYOne(y));
        }
        Ok(self.h_unchecked(a, y, z))
    }

    fn h_unchecked(&self, a: f64, y: f64, z: f64) -> f64 {
        let g = g_linear(a, y, z);
        self.prefactor * (g * (1.0 - QUAD * g / (1.0 - y)) + y * (Y_CONST + Y_A_COEF * a))
    }

    pub fn branch_one(&self, z_minus_ay: f64, eps: f64) -> f64 {
        self.prefactor * (1.0 + 0.75 * (eps - z_minus_ay))
    }
}

pub fn h_objective(a: f64, y: f64, z: f64) -> Result<f64> {
    Objective::default().h(a, y, z)
}

/// First-branch coefficient `(800/503)(1 + ¾(ε − (z − a·y)))`.
pub fn branch_one_value(z_minus_ay: f64, eps: f64) -> f64 {
    Objective::default().branch_one(z_minus_ay, eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub value: f64,
    pub a: f64,
    pub y: f64,
    pub z: f64,
}

impl Optimum {
    pub fn point(&self) -> [f64; 3] {
        [self.a, self.y, self.z]
    }
}

fn axis(range: (f64, f64), step: f64) -> Vec<f64> {
    let n = ((range.1 - range.0) / step + 1e-9).floor() as usize;
    let mut pts: Vec<f64> = (0..=n)
        .map(|i| (range.0 + i as f64 * step).min(range.1))
        .collect();
    if *pts.last().expect("nonempty axis") < range.1 {
        pts.push(range.1);
    }
    pts
}

/// Best feasible grid point. Ties go to the first point in (a, y, z)
/// lexicographic order, so the result does not depend on scheduling.
pub fn grid_maximum(objective: &Objective, bx: &ConstraintBox, step: f64) -> Result<Optimum> {
    bx.validate()?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::ConfigInvalid(format!(
            "grid step must be positive, got {step}"
        )));
    }
    let (a_pts, y_pts, z_pts) = (axis(bx.a, step), axis(bx.y, step), axis(bx.z, step));
    let best = a_pts
        .par_iter()
        .enumerate()
        .filter_map(|(ia, &a)| {
            let mut best: Option<(f64, [usize; 3])> = None;
            for (iy, &y) in y_pts.iter().enumerate() {
                let z_max = bx.cut + a * y;
                for (iz, &z) in z_pts.iter().enumerate() {
                    if z > z_max {
                        break;
                    }
                    let v = objective.h_unchecked(a, y, z);
                    if best.is_none_or(|(b, _)| v > b) {
                        best = Some((v, [ia, iy, iz]));
                    }
                }
            }
            best
        })
        .reduce_with(|l, r| {
            if r.0 > l.0 || (r.0 == l.0 && r.1 < l.1) {
                r
            } else {
                l
            }
        })
        .ok_or_else(|| Error::ConfigInvalid("no feasible grid point".into()))?;
    let [ia, iy, iz] = best.1;
    Ok(Optimum {
        value: best.0,
        a: a_pts[ia],
        y: y_pts[iy],
        z: z_pts[iz],
    })
}

/// Grid scan then projected Nelder–Mead, restarted with a smaller simplex
/// until it stops improving.
pub fn maximize_h(bx: &ConstraintBox, grid_step: f64, refine_tol: f64) -> Result<Optimum> {
    maximize(&Objective::default(), bx, grid_step, refine_tol)
}

pub fn maximize(
    objective: &Objective,
    bx: &ConstraintBox,
    grid_step: f64,
    refine_tol: f64,
) -> Result<Optimum> {
    let grid = grid_maximum(objective, bx, grid_step)?;
    let f = |x: [f64; 3]| {
        let [a, y, z] = bx.project(x);
        -objective.h_unchecked(a, y, z)
    };
    let mut best = (grid.point(), -grid.value);
    let mut scale = grid_step;
    for _ in 0..40 {
        let (x, fx) = nelder_mead(&f, best.0, scale, refine_tol, 20_000);
        let improved = fx < best.1;
        if improved {
            best = (x, fx);
        }
        if !improved || best.1 - fx < refine_tol {
            scale *= 0.1;
            if scale < refine_tol {
                break;
            }
        }
    }
    let [a, y, z] = bx.project(best.0);
    let value = objective.h_unchecked(a, y, z);
    if value < grid.value {
        return Ok(grid);
    }
    Ok(Optimum { value, a, y, z })
}

fn nelder_mead(
    f: &impl Fn([f64; 3]) -> f64,
    x0: [f64; 3],
    scale: f64,
    tol: f64,
    max_iter: usize,
) -> ([f64; 3], f64) {
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((x0, f(x0)));
    for i in 0..3 {
        let mut x = x0;
        x[i] += scale;
        simplex.push((x, f(x)));
    }
    let lerp = |p: [f64; 3], q: [f64; 3], t: f64| -> [f64; 3] {
        std::array::from_fn(|i| p[i] + t * (q[i] - p[i]))
    };
    for _ in 0..max_iter {
        simplex.sort_by(|l, r| l.1.total_cmp(&r.1));
        let spread = simplex[3].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                (0..3)
                    .map(|i| (x[i] - simplex[0].0[i]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= tol && diameter <= tol {
            break;
        }
        let centroid: [f64; 3] =
            std::array::from_fn(|i| simplex[..3].iter().map(|(x, _)| x[i]).sum::<f64>() / 3.0);
        let worst = simplex[3];
        let reflected = lerp(centroid, worst.0, -1.0);
        let fr = f(reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(centroid, worst.0, -2.0);
            let fe = f(expanded);
            simplex[3] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[2].1 {
            simplex[3] = (reflected, fr);
        } else {
            let (target, ft) = if fr < worst.1 { (reflected, fr) } else { worst };
            let contracted = lerp(centroid, target, 0.5);
            let fc = f(contracted);
            if fc < ft {
                simplex[3] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for vertex in simplex.iter_mut().skip(1) {
                    let x = lerp(best, vertex.0, 0.5);
                    *vertex = (x, f(x));
                }
            }
        }
    }
    simplex.sort_by(|l, r| l.1.total_cmp(&r.1));
    simplex[0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub grid_step: f64,
    pub cut: f64,
    pub threshold: f64,
    pub branch_one: f64,
    pub branch_one_margin: f64,
    pub branch_two: Optimum,
    pub branch_two_margin: f64,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "coefficient certificate (threshold {:.4})",
            self.threshold
        )?;
        writeln!(f, "branch 1: z - a*y > {:.5}", self.cut)?;
        writeln!(f, "  value  {:.12}", self.branch_one)?;
        writeln!(f, "  margin {:.12}", self.branch_one_margin)?;
        writeln!(
            f,
            "branch 2: z - a*y <= {:.5}, grid step {:e}",
            self.cut, self.grid_step
        )?;
        writeln!(f, "  max h  {:.12}", self.branch_two.value)?;
        writeln!(
            f,
            "  argmax a = {:.9}, y = {:.9}, z = {:.9}",
            self.branch_two.a, self.branch_two.y, self.branch_two.z
        )?;
        writeln!(f, "  margin {:.12}", self.branch_two_margin)?;
        write!(f, "both branches below threshold")
    }
}

pub fn coefficient_certificate() -> Result<Certificate> {
    certificate_for(&Objective::default(), DEFAULT_GRID_STEP)
}

pub fn certificate_for(objective: &Objective, grid_step: f64) -> Result<Certificate> {
    let bx = ConstraintBox::default();
    let branch_one = objective.branch_one(bx.cut, 0.0);
    let branch_two = maximize(objective, &bx, grid_step, DEFAULT_REFINE_TOL)?;
    let cert = Certificate {
        grid_step,
        cut: bx.cut,
        threshold: THRESHOLD,
        branch_one,
        branch_one_margin: THRESHOLD - branch_one,
        branch_two,
        branch_two_margin: THRESHOLD - branch_two.value,
    };
    if cert.branch_one_margin <= 0.0 {
        return Err(Error::CertificateFailed(format!(
            "branch 1 value {branch_one:.12} >= {THRESHOLD}"
        )));
    }
    if cert.branch_two_margin <= 0.0 {
        return Err(Error::CertificateFailed(format!(
            "branch 2 maximum {:.12} >= {THRESHOLD}",
            branch_two.value
        )));
    }
    Ok(cert)
}

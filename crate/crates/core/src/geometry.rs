//! Compact target sets and the distance calculus used by the barrier
//! functions and the sequencer.
//!
//! Conventions: `signed_distance(x, P)` is the depth of `x` in `P` when
//! `x ∈ P` and minus the Euclidean distance to `P` otherwise. The ordered set
//! distance `Dist(P, Q) = sup_{x∈P} dist(x, Q)` is the worst-case travel
//! length from anywhere in `P` to `Q`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::qp::{self, QpProblem, QpStatus, Row};

/// Boundary samples used for ordered set distances whose source is a disc
/// and whose target is not.
pub const DISC_BOUNDARY_SAMPLES: usize = 720;

const VERTEX_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("disc radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("box axis {axis}: lower bound {lo} is not below upper bound {hi}")]
    EmptyBox { axis: usize, lo: f64, hi: f64 },
    #[error("polytope is unbounded")]
    UnboundedPolytope,
    #[error("polytope is empty")]
    EmptyPolytope,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sets must have dimension at least 1")]
    ZeroDimension,
    #[error("travel times need a positive input bound, got {0}")]
    NonPositiveSpeed(f64),
}

/// Bounded intersection of halfspaces `a_iᵀx ≤ b_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polytope {
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    vertices: Vec<Vec<f64>>,
}

impl Polytope {
    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TargetSet {
    Disc { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Polytope(Polytope),
}

impl TargetSet {
    pub fn disc(center: Vec<f64>, radius: f64) -> Result<Self, GeometryError> {
        if center.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        if !(radius > 0.0) {
            return Err(GeometryError::NonPositiveRadius(radius));
        }
        Ok(TargetSet::Disc { center, radius })
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, GeometryError> {
        if lo.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        if lo.len() != hi.len() {
            return Err(GeometryError::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        for (axis, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !(l < h) {
                return Err(GeometryError::EmptyBox { axis, lo: l, hi: h });
            }
        }
        Ok(TargetSet::Box { lo, hi })
    }

    /// One-dimensional interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self, GeometryError> {
        Self::boxed(vec![lo], vec![hi])
    }

    /// Intersection of `a_iᵀx ≤ b_i`; boundedness and nonemptiness are
    /// checked by enumerating vertices and extreme rays.
    pub fn polytope(normals: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self, GeometryError> {
        let n = normals.first().map(Vec::len).ok_or(GeometryError::UnboundedPolytope)?;
        if n == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        if offsets.len() != normals.len() {
            return Err(GeometryError::DimensionMismatch { expected: normals.len(), got: offsets.len() });
        }
        if let Some(bad) = normals.iter().find(|a| a.len() != n) {
            return Err(GeometryError::DimensionMismatch { expected: n, got: bad.len() });
        }
        if !is_bounded(&normals, n) {
            return Err(GeometryError::UnboundedPolytope);
        }
        let vertices = enumerate_vertices(&normals, &offsets, n);
        if vertices.is_empty() {
            return Err(GeometryError::EmptyPolytope);
        }
        Ok(TargetSet::Polytope(Polytope { normals, offsets, vertices }))
    }

    pub fn dim(&self) -> usize {
        match self {
            TargetSet::Disc { center, .. } => center.len(),
            TargetSet::Box { lo, .. } => lo.len(),
            TargetSet::Polytope(p) => p.normals[0].len(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) >= 0.0
    }

    /// Signed distance only.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        signed_distance(x, self).0
    }

    /// Unsigned distance from `x` to the set (zero inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        (-self.signed_distance(x)).max(0.0)
    }

    /// Points whose convex hull covers the set, or `None` for discs.
    fn extreme_points(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            TargetSet::Disc { .. } => None,
            TargetSet::Box { lo, hi } => Some(box_corners(lo, hi)),
            TargetSet::Polytope(p) => Some(p.vertices.clone()),
        }
    }
}

/// Signed distance and its gradient with respect to `x`.
///
/// Inside a box or polytope the depth is the distance to the nearest face;
/// on ties the lowest-index face wins (axis order `lo_0, hi_0, lo_1, ...`
/// for boxes). At the exact centre of a disc the gradient is zero.
pub fn signed_distance(x: &[f64], set: &TargetSet) -> (f64, Vec<f64>) {
    debug_assert_eq!(x.len(), set.dim());
    match set {
        TargetSet::Disc { center, radius } => {
            let diff: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
            let norm = norm(&diff);
            let grad = if norm > 0.0 {
                diff.iter().map(|d| -d / norm).collect()
            } else {
                vec![0.0; x.len()]
            };
            (radius - norm, grad)
        }
        TargetSet::Box { lo, hi } => {
            let clamped: Vec<f64> = x.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| v.clamp(*l, *h)).collect();
            let outside: Vec<f64> = clamped.iter().zip(x).map(|(c, v)| c - v).collect();
            let dist = norm(&outside);
            if dist > 0.0 {
                return (-dist, outside.iter().map(|d| d / dist).collect());
            }
            let mut best = f64::INFINITY;
            let mut grad = vec![0.0; x.len()];
            let mut best_axis = (0, 1.0);
            for k in 0..x.len() {
                let to_lo = x[k] - lo[k];
                if to_lo < best {
                    best = to_lo;
                    best_axis = (k, 1.0);
                }
                let to_hi = hi[k] - x[k];
                if to_hi < best {
                    best = to_hi;
                    best_axis = (k, -1.0);
                }
            }
            grad[best_axis.0] = best_axis.1;
            (best, grad)
        }
        TargetSet::Polytope(p) => {
            let mut depth = f64::INFINITY;
            let mut face = 0;
            for (i, (a, b)) in p.normals.iter().zip(&p.offsets).enumerate() {
                let s = (b - dot(a, x)) / norm(a);
                if s < depth {
                    depth = s;
                    face = i;
                }
            }
            if depth >= 0.0 {
                let a = &p.normals[face];
                let na = norm(a);
                return (depth, a.iter().map(|v| -v / na).collect());
            }
            let proj = project_onto_polytope(x, p);
            let diff: Vec<f64> = proj.iter().zip(x).map(|(q, v)| q - v).collect();
            let dist = norm(&diff);
            if dist <= 0.0 {
                // Numerically on the boundary.
                let a = &p.normals[face];
                let na = norm(a);
                return (0.0, a.iter().map(|v| -v / na).collect());
            }
            (-dist, diff.iter().map(|d| d / dist).collect())
        }
    }
}

fn project_onto_polytope(x: &[f64], p: &Polytope) -> Vec<f64> {
    let n = x.len();
    let mut problem = QpProblem::min_norm(n);
    problem.linear = x.iter().map(|v| -v).collect();
    problem.rows = p
        .normals
        .iter()
        .zip(&p.offsets)
        .map(|(a, b)| Row::new(a.iter().map(|v| -v).collect(), -b))
        .collect();
    match qp::solve(&problem) {
        Ok(sol) if sol.status == QpStatus::Optimal => sol.u,
        // Bounded nonempty polytopes always have a projection; fall back to
        // the nearest vertex if the solver gives up numerically.
        _ => p
            .vertices
            .iter()
            .min_by(|a, b| dist2(a, x).total_cmp(&dist2(b, x)))
            .cloned()
            .unwrap_or_else(|| x.to_vec()),
    }
}

/// `sup_{x ∈ from} dist(x, to)`.
///
/// Closed forms for disc→disc and box→box; box/polytope sources use their
/// vertices (the supremum of a convex function over a polytope is attained
/// at a vertex). Disc sources with any other target sample the boundary
/// with [`DISC_BOUNDARY_SAMPLES`] points; in the plane the best samples are
/// then refined by a one-dimensional search over the angle.
pub fn ordered_set_distance(from: &TargetSet, to: &TargetSet) -> f64 {
    match (from, to) {
        (TargetSet::Disc { center: ci, radius: ri }, TargetSet::Disc { center: cj, radius: rj }) => {
            (dist2(ci, cj).sqrt() + ri - rj).max(0.0)
        }
        (TargetSet::Box { lo: li, hi: hi_i }, TargetSet::Box { lo: lj, hi: hj }) => {
            let mut s = 0.0;
            for k in 0..li.len() {
                let m = (lj[k] - li[k]).max(hi_i[k] - hj[k]).max(0.0);
                s += m * m;
            }
            s.sqrt()
        }
        _ => match from.extreme_points() {
            Some(points) => points.iter().map(|p| to.distance(p)).fold(0.0, f64::max),
            None => {
                let TargetSet::Disc { center, radius } = from else { unreachable!() };
                if center.len() == 2 {
                    return disc_boundary_sup(center, *radius, to);
                }
                sphere_samples(center, *radius, DISC_BOUNDARY_SAMPLES)
                    .iter()
                    .map(|p| to.distance(p))
                    .fold(0.0, f64::max)
            }
        },
    }
}

/// Supremum of `dist(·, to)` over a circle: uniform sampling followed by a
/// golden-section refinement around the best few samples.
fn disc_boundary_sup(center: &[f64], radius: f64, to: &TargetSet) -> f64 {
    let n = DISC_BOUNDARY_SAMPLES;
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let at = |th: f64| to.distance(&[center[0] + radius * th.cos(), center[1] + radius * th.sin()]);
    let values: Vec<f64> = (0..n).map(|k| at(k as f64 * step)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut best = values[order[0]];
    for &k in order.iter().take(4) {
        let (mut lo, mut hi) = ((k as f64 - 1.0) * step, (k as f64 + 1.0) * step);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut fa, mut fb) = (at(a), at(b));
        for _ in 0..60 {
            if fa > fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - g * (hi - lo);
                fa = at(a);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + g * (hi - lo);
                fb = at(b);
            }
        }
        best = best.max(fa).max(fb);
    }
    best
}

/// Points on the boundary sphere of a disc: both endpoints in 1-D, a
/// uniform polygon in 2-D, a Fibonacci lattice in 3-D and above (where only
/// the first three coordinates are spread).
pub fn sphere_samples(center: &[f64], radius: f64, count: usize) -> Vec<Vec<f64>> {
    let n = center.len();
    match n {
        1 => vec![vec![center[0] - radius], vec![center[0] + radius]],
        2 => (0..count)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![center[0] + radius * th.cos(), center[1] + radius * th.sin()]
            })
            .collect(),
        _ => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    let mut p = center.to_vec();
                    p[0] += radius * r * th.cos();
                    p[1] += radius * r * th.sin();
                    p[2] += radius * z;
                    p
                })
                .collect()
        }
    }
}

/// Largest distance between two points of the set.
pub fn diameter(set: &TargetSet) -> f64 {
    match set {
        TargetSet::Disc { radius, .. } => 2.0 * radius,
        TargetSet::Box { lo, hi } => {
            let d: Vec<f64> = hi.iter().zip(lo).map(|(h, l)| h - l).collect();
            norm(&d)
        }
        TargetSet::Polytope(p) => {
            let mut best: f64 = 0.0;
            for (i, a) in p.vertices.iter().enumerate() {
                for b in &p.vertices[i + 1..] {
                    best = best.max(dist2(a, b));
                }
            }
            best.sqrt()
        }
    }
}

/// Minimum-time quantities under the speed bound `u_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TravelTimes {
    /// `-signed_distance(x, P_i) / u_max`; negative when `x ∈ P_i`.
    pub to_first: Vec<f64>,
    /// `between[i][j] = Dist(P_i, P_j) / u_max`.
    pub between: Vec<Vec<f64>>,
}

pub fn travel_times(x: &[f64], sets: &[TargetSet], u_max: f64) -> Result<TravelTimes, GeometryError> {
    if !(u_max > 0.0) {
        return Err(GeometryError::NonPositiveSpeed(u_max));
    }
    for s in sets {
        if s.dim() != x.len() {
            return Err(GeometryError::DimensionMismatch { expected: x.len(), got: s.dim() });
        }
    }
    let to_first = sets.iter().map(|s| -s.signed_distance(x) / u_max).collect();
    let between = sets
        .iter()
        .map(|a| sets.iter().map(|b| ordered_set_distance(a, b) / u_max).collect())
        .collect();
    Ok(TravelTimes { to_first, between })
}

fn box_corners(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let n = lo.len();
    (0..1usize << n)
        .map(|mask| (0..n).map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] }).collect())
        .collect()
}

fn is_bounded(normals: &[Vec<f64>], n: usize) -> bool {
    let a = DMatrix::from_fn(normals.len(), n, |i, j| normals[i][j]);
    if a.rank(1e-10) < n {
        return false;
    }
    // A pointed recession cone {d : A d ≤ 0} is trivial iff it has no
    // extreme ray; every extreme ray is cut out by n-1 independent rows.
    let fits = |d: &DVector<f64>| normals.iter().all(|row| dot(row, d.as_slice()) <= 1e-10);
    if n == 1 {
        return !fits(&DVector::from_element(1, 1.0)) && !fits(&DVector::from_element(1, -1.0));
    }
    for subset in combinations(normals.len(), n - 1) {
        let m = DMatrix::from_fn(n - 1, n, |i, j| normals[subset[i]][j]);
        let Some(d) = null_direction(&m) else { continue };
        if fits(&d) || fits(&(-d)) {
            return false;
        }
    }
    true
}

/// Unit vector spanning the null space of an `(n-1) × n` matrix, if it is
/// one-dimensional.
fn null_direction(m: &DMatrix<f64>) -> Option<DVector<f64>> {
    let gram = m.transpose() * m;
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = eig.eigenvalues.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    if eig.eigenvalues[order[0]].abs() > 1e-10 * scale {
        return None;
    }
    if order.len() > 1 && eig.eigenvalues[order[1]].abs() <= 1e-10 * scale {
        return None;
    }
    Some(eig.eigenvectors.column(order[0]).into_owned())
}

fn enumerate_vertices(normals: &[Vec<f64>], offsets: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for subset in combinations(normals.len(), n) {
        let a = DMatrix::from_fn(n, n, |i, j| normals[subset[i]][j]);
        let b = DVector::from_fn(n, |i, _| offsets[subset[i]]);
        let Some(v) = a.lu().solve(&b) else { continue };
        if v.iter().any(|c| !c.is_finite()) {
            continue;
        }
        let v: Vec<f64> = v.iter().copied().collect();
        let feasible = normals
            .iter()
            .zip(offsets)
            .all(|(row, off)| dot(row, &v) <= off + VERTEX_TOL * (1.0 + off.abs()));
        if feasible && !out.iter().any(|w| dist2(w, &v) < 1e-18) {
            out.push(v);
        }
    }
    out
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_disc() -> TargetSet {
        TargetSet::disc(vec![0.0, 0.0], 1.0).unwrap()
    }

    fn square(lo: f64, hi: f64) -> TargetSet {
        TargetSet::polytope(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![hi, -lo, hi, -lo],
        )
        .unwrap()
    }

    #[test]
    fn disc_outside_collinear() {
        let (d, g) = signed_distance(&[2.0, 0.0], &unit_disc());
        assert_eq!(d, -1.0);
        assert_eq!(g, vec![-1.0, 0.0]);
    }

    #[test]
    fn disc_center_depth_is_radius() {
        let (d, g) = signed_distance(&[0.0, 0.0], &unit_disc());
        assert_eq!(d, 1.0);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn interval_midpoint_depth() {
        let set = TargetSet::interval(2.0, 3.0).unwrap();
        assert_eq!(set.signed_distance(&[2.5]), 0.5);
        assert_eq!(set.signed_distance(&[4.0]), -1.0);
        assert_eq!(set.signed_distance(&[3.0]), 0.0);
    }

    #[test]
    fn box_depth_tie_breaks_to_lowest_face() {
        let set = TargetSet::boxed(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap();
        let (d, g) = signed_distance(&[1.0, 1.0], &set);
        assert_eq!(d, 1.0);
        assert_eq!(g, vec![1.0, 0.0]);
    }

    #[test]
    fn box_outside_corner() {
        let set = TargetSet::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let (d, g) = signed_distance(&[4.0, 5.0], &set);
        assert!((d + 5.0).abs() < 1e-12);
        assert!((g[0] + 0.6).abs() < 1e-12 && (g[1] + 0.8).abs() < 1e-12);
    }

    #[test]
    fn polytope_matches_equivalent_box() {
        let poly = square(0.0, 2.0);
        let bx = TargetSet::boxed(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap();
        for x in [[0.5, 1.5], [3.0, 1.0], [-1.0, -2.0], [1.0, 1.2], [2.5, 4.0]] {
            let (dp, gp) = signed_distance(&x, &poly);
            let (db, gb) = signed_distance(&x, &bx);
            assert!((dp - db).abs() < 1e-9, "{x:?}: {dp} vs {db}");
            assert!(gp.iter().zip(&gb).all(|(a, b)| (a - b).abs() < 1e-6), "{x:?}");
        }
        assert!((diameter(&poly) - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constructor_validation() {
        assert_eq!(TargetSet::disc(vec![0.0], 0.0), Err(GeometryError::NonPositiveRadius(0.0)));
        assert!(matches!(TargetSet::interval(3.0, 2.0), Err(GeometryError::EmptyBox { .. })));
        // Halfplane pair forming a slab: unbounded.
        let slab = TargetSet::polytope(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![1.0, 0.0]);
        assert_eq!(slab, Err(GeometryError::UnboundedPolytope));
        // A wedge is unbounded even though its normals have full rank.
        let wedge = TargetSet::polytope(vec![vec![-1.0, 0.0], vec![0.0, -1.0]], vec![0.0, 0.0]);
        assert_eq!(wedge, Err(GeometryError::UnboundedPolytope));
        let empty = TargetSet::polytope(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![-1.0, 0.0, 1.0, 0.0],
        );
        assert_eq!(empty, Err(GeometryError::EmptyPolytope));
        let tri = TargetSet::polytope(vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]], vec![0.0, 0.0, 1.0]);
        assert!(tri.is_ok());
    }

    #[test]
    fn ordered_distance_examples() {
        let a = TargetSet::interval(5.0, 6.0).unwrap();
        let b = TargetSet::interval(7.0, 8.0).unwrap();
        assert_eq!(ordered_set_distance(&a, &b), 2.0);
        assert_eq!(ordered_set_distance(&b, &a), 2.0);
        let wide = TargetSet::interval(7.0, 10.0).unwrap();
        assert_eq!(ordered_set_distance(&a, &wide), 1.0 + 1.0);
        assert_eq!(ordered_set_distance(&wide, &a), 4.0);
        assert_eq!(ordered_set_distance(&unit_disc(), &unit_disc()), 0.0);
        let far = TargetSet::disc(vec![5.0, 0.0], 1.0).unwrap();
        assert_eq!(ordered_set_distance(&unit_disc(), &far), 5.0);
    }

    #[test]
    fn ordered_distance_is_directional() {
        let small = TargetSet::interval(0.0, 1.0).unwrap();
        let big = TargetSet::interval(-5.0, 5.0).unwrap();
        assert_eq!(ordered_set_distance(&small, &big), 0.0);
        assert_eq!(ordered_set_distance(&big, &small), 5.0);
    }

    #[test]
    fn diameters() {
        assert_eq!(diameter(&TargetSet::disc(vec![3.0, 3.0], 1.0).unwrap()), 2.0);
        assert_eq!(diameter(&TargetSet::interval(4.0, 5.0).unwrap()), 1.0);
        assert_eq!(diameter(&TargetSet::boxed(vec![0.0, 0.0], vec![3.0, 4.0]).unwrap()), 5.0);
    }

    #[test]
    fn travel_time_examples() {
        let sets = [
            TargetSet::interval(10.0, 11.0).unwrap(),
            TargetSet::interval(5.0, 6.0).unwrap(),
            TargetSet::interval(7.0, 8.0).unwrap(),
        ];
        let tt = travel_times(&[8.0], &sets, 2.0).unwrap();
        assert_eq!(tt.to_first[0], 1.0);
        let tt1 = travel_times(&[5.5], &sets, 1.0).unwrap();
        assert!(tt1.to_first[1] < 0.0);
        assert_eq!(tt1.between[1][2], 2.0);
        assert_eq!(tt1.between[0][0], 0.0);
        assert_eq!(travel_times(&[0.0], &sets, 0.0), Err(GeometryError::NonPositiveSpeed(0.0)));
    }
}

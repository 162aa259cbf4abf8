//! Reference computations used by the tests: brute force, dense sampling
//! and finite differences, independent of the library's algorithms.
#![allow(dead_code)]

use stlcbf_core::QpProblem;

/// Central difference of `f` along every coordinate.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut hi = x.to_vec();
            let mut lo = x.to_vec();
            hi[i] += step;
            lo[i] -= step;
            (f(&hi) - f(&lo)) / (2.0 * step)
        })
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn feasible_within(p: &QpProblem, u: &[f64], tol: f64) -> bool {
    p.rows.iter().all(|r| r.a.iter().zip(u).map(|(a, v)| a * v).sum::<f64>() >= r.b - tol)
}

/// Zooming grid search over a box of `dim` coordinates; `point` maps grid
/// coordinates to a candidate, or `None` when it is infeasible.
fn zoom(dim: usize, per_axis: usize, half: f64, point: &dyn Fn(&[f64]) -> Option<Vec<f64>>, p: &QpProblem) -> Option<Vec<f64>> {
    let mut center = vec![0.0; dim];
    let mut half = half;
    let mut best = None;
    while half > 1e-9 {
        let step = 2.0 * half / (per_axis - 1) as f64;
        let mut incumbent: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        for idx in 0..per_axis.pow(dim as u32) {
            let mut rest = idx;
            let coords: Vec<f64> = center
                .iter()
                .map(|c| {
                    let v = c - half + (rest % per_axis) as f64 * step;
                    rest /= per_axis;
                    v
                })
                .collect();
            let Some(u) = point(&coords) else { continue };
            let f = p.objective(&u);
            if incumbent.as_ref().is_none_or(|(g, _, _)| f < *g) {
                incumbent = Some((f, coords, u));
            }
        }
        let (_, coords, u) = incumbent?;
        center = coords;
        best = Some(u);
        half = 4.0 * step;
    }
    best
}

/// Grid search over every face the minimizer can lie on: the interior,
/// each constraint line, and each pairwise intersection.
pub fn grid_minimizer(p: &QpProblem) -> Option<Vec<f64>> {
    let n = p.dim;
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let interior = |c: &[f64]| Some(c.to_vec()).filter(|u| feasible_within(p, u, 0.0));
    candidates.extend(zoom(n, if n == 1 { 2001 } else { 101 }, 20.0, &interior, p));
    for r in &p.rows {
        let sq: f64 = r.a.iter().map(|v| v * v).sum();
        let base: Vec<f64> = r.a.iter().map(|v| v * r.b / sq).collect();
        if n == 1 {
            if feasible_within(p, &base, 1e-9) {
                candidates.push(base);
            }
            continue;
        }
        let dir = [-r.a[1] / sq.sqrt(), r.a[0] / sq.sqrt()];
        let on_line = |c: &[f64]| {
            let u = vec![base[0] + c[0] * dir[0], base[1] + c[0] * dir[1]];
            Some(u).filter(|u| feasible_within(p, u, 1e-9))
        };
        candidates.extend(zoom(1, 2001, 40.0, &on_line, p));
    }
    if n == 2 {
        for (i, r) in p.rows.iter().enumerate() {
            for s in &p.rows[i + 1..] {
                let det = r.a[0] * s.a[1] - r.a[1] * s.a[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let u = vec![(r.b * s.a[1] - r.a[1] * s.b) / det, (r.a[0] * s.b - r.b * s.a[0]) / det];
                if feasible_within(p, &u, 1e-9) {
                    candidates.push(u);
                }
            }
        }
    }
    candidates.into_iter().min_by(|a, b| p.objective(a).total_cmp(&p.objective(b)))
}

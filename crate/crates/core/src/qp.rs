//! Dense strictly convex QP solver for the per-step control problem.
//!
//! Solves
//!
//! ```text
//! minimize    ½ uᵀ H u + cᵀ u
//! subject to  a_iᵀ u ≥ b_i,   i = 1..m
//! ```
//!
//! with the dual active-set method of Goldfarb and Idnani. The method starts
//! from the unconstrained minimizer, so it needs no feasible starting point
//! and reports primal infeasibility directly. The problems handled here are
//! tiny (n ≤ 3, a few dozen rows); the active set is refactored from scratch
//! on every change instead of being updated with Givens rotations.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

/// Tolerance on constraint satisfaction and step lengths.
const FEAS_TOL: f64 = 1e-11;
const MAX_ITER_PER_ROW: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("row {row} has {got} coefficients, expected {expected}")]
    DimensionMismatch { row: usize, got: usize, expected: usize },
    #[error("hessian is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("problem dimension must be at least 1")]
    EmptyProblem,
}

/// One linear inequality `aᵀu ≥ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Row {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Row { a, b }
    }

    fn residual(&self, u: &[f64]) -> f64 {
        dot(&self.a, u) - self.b
    }
}

#[derive(Debug, Clone)]
pub struct QpProblem {
    pub dim: usize,
    /// Row-major `dim × dim` symmetric positive definite matrix.
    pub hessian: Vec<f64>,
    pub linear: Vec<f64>,
    pub rows: Vec<Row>,
}

impl QpProblem {
    /// `½uᵀu` with no rows.
    pub fn min_norm(dim: usize) -> Self {
        let mut hessian = vec![0.0; dim * dim];
        for i in 0..dim {
            hessian[i * dim + i] = 1.0;
        }
        QpProblem {
            dim,
            hessian,
            linear: vec![0.0; dim],
            rows: Vec::new(),
        }
    }

    pub fn with_rows(mut self, rows: impl IntoIterator<Item = Row>) -> Self {
        self.rows.extend(rows);
        self
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn objective(&self, u: &[f64]) -> f64 {
        let n = self.dim;
        let mut v = dot(&self.linear, u);
        for i in 0..n {
            for j in 0..n {
                v += 0.5 * u[i] * self.hessian[i * n + j] * u[j];
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub u: Vec<f64>,
    /// Indices of rows active at the solution, in the order they entered.
    pub active_set: Vec<usize>,
    /// Lagrange multipliers, one per row (zero for inactive rows).
    pub multipliers: Vec<f64>,
    pub status: QpStatus,
    /// Max of stationarity, primal, dual and complementarity residuals.
    pub kkt_residual: f64,
    pub iterations: usize,
}

/// Solves `p`. Deterministic: the most violated row enters first, ties go to
/// the lowest index, and the blocking row with the lowest index leaves first.
pub fn solve(p: &QpProblem) -> Result<QpSolution, QpError> {
    let n = p.dim;
    if n == 0 {
        return Err(QpError::EmptyProblem);
    }
    for (i, r) in p.rows.iter().enumerate() {
        if r.a.len() != n {
            return Err(QpError::DimensionMismatch { row: i, got: r.a.len(), expected: n });
        }
    }
    if p.hessian.len() != n * n || p.linear.len() != n {
        return Err(QpError::DimensionMismatch { row: usize::MAX, got: p.hessian.len(), expected: n * n });
    }

    let h = DMatrix::from_row_slice(n, n, &p.hessian);
    let chol = h.clone().cholesky().ok_or(QpError::NotPositiveDefinite)?;
    let l = chol.l();
    // L^{-1}, needed for J = L^{-T} Q.
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or(QpError::NotPositiveDefinite)?;
    let c = DVector::from_column_slice(&p.linear);

    let mut x = -chol.solve(&c);
    let m = p.rows.len();
    let mut active: Vec<usize> = Vec::new();
    let mut mult: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let max_iter = MAX_ITER_PER_ROW * (m + n) + 10;
    let normals: Vec<DVector<f64>> = p.rows.iter().map(|r| DVector::from_column_slice(&r.a)).collect();

    let finish = |x: &DVector<f64>, active: &[usize], mult: &[f64], status, iterations| {
        let u: Vec<f64> = x.iter().copied().collect();
        let mut full = vec![0.0; m];
        for (&i, &l) in active.iter().zip(mult) {
            full[i] = l;
        }
        let kkt_residual = kkt_residual(p, &u, &full);
        QpSolution {
            u,
            active_set: active.to_vec(),
            multipliers: full,
            status,
            kkt_residual,
            iterations,
        }
    };

    loop {
        // Pick the most violated inactive row.
        let xs = x.as_slice();
        let mut chosen: Option<(usize, f64)> = None;
        for (i, r) in p.rows.iter().enumerate() {
            if active.contains(&i) {
                continue;
            }
            let s = r.residual(xs);
            let scale = 1.0 + r.b.abs();
            if s < -FEAS_TOL * scale {
                match chosen {
                    Some((_, best)) if s >= best => {}
                    _ => chosen = Some((i, s)),
                }
            }
        }
        let Some((pidx, _)) = chosen else {
            return Ok(finish(&x, &active, &mult, QpStatus::Optimal, iterations));
        };
        let np = &normals[pidx];
        let mut u_plus = 0.0; // multiplier of the entering row

        loop {
            iterations += 1;
            if iterations > max_iter {
                return Ok(finish(&x, &active, &mult, QpStatus::Infeasible, iterations));
            }
            let (j1, j2, r_mat) = factor(&l_inv, &normals, &active, n);
            let d1 = j1.transpose() * np;
            let d2 = j2.transpose() * np;
            let z = &j2 * &d2;
            let r = if active.is_empty() {
                DVector::zeros(0)
            } else {
                r_mat
                    .solve_upper_triangular(&d1)
                    .unwrap_or_else(|| DVector::zeros(active.len()))
            };

            // Partial (dual) step length: first active multiplier to hit zero.
            let mut t1 = f64::INFINITY;
            let mut drop_k: Option<usize> = None;
            for (k, &rk) in r.iter().enumerate() {
                if rk > FEAS_TOL {
                    let ratio = mult[k] / rk;
                    if ratio < t1 - 1e-15 || (ratio <= t1 + 1e-15 && drop_k.is_some_and(|d| active[k] < active[d])) {
                        t1 = ratio;
                        drop_k = Some(k);
                    }
                }
            }
            // Full (primal) step length.
            let znp = z.dot(np);
            let t2 = if z.norm() <= 1e-12 || znp <= 1e-14 {
                f64::INFINITY
            } else {
                -(np.dot(&x) - p.rows[pidx].b) / znp
            };
            let t = t1.min(t2);
            if !t.is_finite() {
                return Ok(finish(&x, &active, &mult, QpStatus::Infeasible, iterations));
            }
            if t2.is_infinite() {
                for (k, rk) in r.iter().enumerate() {
                    mult[k] -= t * rk;
                }
                u_plus += t;
                let k = drop_k.expect("finite partial step has a blocking row");
                active.remove(k);
                mult.remove(k);
                continue;
            }
            x += &z * t;
            for (k, rk) in r.iter().enumerate() {
                mult[k] -= t * rk;
            }
            u_plus += t;
            if t2 <= t1 {
                active.push(pidx);
                mult.push(u_plus);
                break;
            }
            let k = drop_k.expect("partial step has a blocking row");
            active.remove(k);
            mult.remove(k);
        }
    }
}

/// Returns `(J1, J2, R)` where `L^{-1} N = Q [R; 0]`, `J = L^{-T} Q`.
fn factor(
    l_inv: &DMatrix<f64>,
    normals: &[DVector<f64>],
    active: &[usize],
    n: usize,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let q = active.len();
    if q == 0 {
        let j = l_inv.transpose();
        return (DMatrix::zeros(n, 0), j, DMatrix::zeros(0, 0));
    }
    let mut nmat = DMatrix::zeros(n, q);
    for (k, &i) in active.iter().enumerate() {
        nmat.set_column(k, &normals[i]);
    }
    let m = l_inv * nmat;
    let qr = m.qr();
    // Full orthogonal factor: complete the thin Q with the remaining basis.
    let thin_q = qr.q();
    let r = qr.r();
    let full_q = complete_basis(&thin_q, n);
    let j = l_inv.transpose() * full_q;
    let j1 = j.columns(0, q).into_owned();
    let j2 = j.columns(q, n - q).into_owned();
    (j1, j2, r)
}

/// Extends the `n × q` orthonormal columns of `q` to an orthonormal basis.
fn complete_basis(q: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let k = q.ncols();
    let mut cols: Vec<DVector<f64>> = (0..k).map(|i| q.column(i).into_owned()).collect();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = DVector::zeros(n);
        v[e] = 1.0;
        for c in &cols {
            let proj = c.dot(&v);
            v -= c * proj;
        }
        // second pass for numerical orthogonality
        for c in &cols {
            let proj = c.dot(&v);
            v -= c * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / norm);
        }
    }
    DMatrix::from_columns(&cols)
}

/// Largest violation among stationarity, primal feasibility, dual
/// feasibility and complementary slackness.
pub fn kkt_residual(p: &QpProblem, u: &[f64], multipliers: &[f64]) -> f64 {
    let n = p.dim;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut g = p.linear[i] + p.hessian[i * n..(i + 1) * n].iter().zip(u).map(|(h, v)| h * v).sum::<f64>();
        for (r, l) in p.rows.iter().zip(multipliers) {
            g -= l * r.a[i];
        }
        worst = worst.max(g.abs());
    }
    for (r, &l) in p.rows.iter().zip(multipliers) {
        let s = r.residual(u);
        worst = worst.max((-s).max(0.0));
        worst = worst.max((-l).max(0.0));
        worst = worst.max((l * s).abs());
    }
    worst
}

/// Rows of a polytope inscribed in the ball `‖u‖ ≤ u_max`.
///
/// * `dim == 1`: the interval `[-u_max, u_max]` (exact).
/// * `dim == 2`: a regular `facets`-gon with vertices on the circle, one
///   vertex on each positive/negative axis when `facets` is a multiple of 4.
/// * `dim == 3`: a cube with cut edges and corners (26 facet directions),
///   scaled so every vertex lies on the sphere.
/// * otherwise: the axis-aligned box inscribed in the ball.
///
/// Every point of the returned polytope satisfies `‖u‖ ≤ u_max`.
pub fn ball_rows(u_max: f64, dim: usize, facets: usize) -> Vec<Row> {
    match dim {
        1 => vec![Row::new(vec![1.0], -u_max), Row::new(vec![-1.0], -u_max)],
        2 => {
            let f = facets.max(4);
            let half = std::f64::consts::PI / f as f64;
            let offset = u_max * half.cos();
            (0..f)
                .map(|k| {
                    let theta = 2.0 * half * k as f64 + half;
                    Row::new(vec![-theta.cos(), -theta.sin()], -offset)
                })
                .collect()
        }
        3 => {
            let dirs = cut_cube_directions();
            let scale = u_max / cut_cube_max_vertex_norm(&dirs);
            dirs.into_iter()
                .map(|d| Row::new(d.iter().map(|v| -v).collect(), -scale))
                .collect()
        }
        _ => {
            let half_side = u_max / (dim as f64).sqrt();
            let mut rows = Vec::with_capacity(2 * dim);
            for i in 0..dim {
                let mut a = vec![0.0; dim];
                a[i] = 1.0;
                rows.push(Row::new(a.clone(), -half_side));
                a[i] = -1.0;
                rows.push(Row::new(a, -half_side));
            }
            rows
        }
    }
}

/// Radius of the largest ball centred at the origin inside the polytope of
/// [`ball_rows`]: the speed available in every direction.
pub fn ball_inradius(u_max: f64, dim: usize, facets: usize) -> f64 {
    match dim {
        1 => u_max,
        2 => u_max * (std::f64::consts::PI / facets.max(4) as f64).cos(),
        3 => u_max / cut_cube_max_vertex_norm(&cut_cube_directions()),
        _ => u_max / (dim as f64).sqrt(),
    }
}

fn cut_cube_directions() -> Vec<[f64; 3]> {
    let mut dirs = Vec::with_capacity(26);
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -1i32..=1 {
                if i == 0 && j == 0 && k == 0 {
                    continue;
                }
                let v = [i as f64, j as f64, k as f64];
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                dirs.push([v[0] / norm, v[1] / norm, v[2] / norm]);
            }
        }
    }
    dirs
}

/// Largest vertex norm of `{u : dᵀu ≤ 1 for all d}`, by enumerating triples.
fn cut_cube_max_vertex_norm(dirs: &[[f64; 3]]) -> f64 {
    let mut worst: f64 = 0.0;
    let m = dirs.len();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                let Some(v) = solve3(&[dirs[a], dirs[b], dirs[c]], [1.0; 3]) else {
                    continue;
                };
                if dirs.iter().all(|d| d[0] * v[0] + d[1] * v[1] + d[2] * v[2] <= 1.0 + 1e-9) {
                    worst = worst.max((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
                }
            }
        }
    }
    worst
}

fn solve3(m: &[[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    if d.abs() < 1e-9 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut mm = *m;
        for row in 0..3 {
            mm[row][col] = rhs[row];
        }
        *o = det(&mm) / d;
    }
    Some(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

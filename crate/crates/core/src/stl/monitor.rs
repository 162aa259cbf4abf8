//! Offline monitor with exact (non-smooth) quantitative semantics over a
//! uniformly sampled trajectory.
//!
//! A sample at index `k` (time `t0 + k·dt`) lies in the window `[lo, hi]`
//! when `lo - dt/2 ≤ k·dt ≤ hi + dt/2`. Nested windows are shifted by the
//! outer index, so `F[a,b] G[c,d]` at index 0 is
//! `max_{k ∈ W(a,b)} min_{j ∈ W(c,d)} ρ(k + j)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{SpecTree, Subtask, SubtaskGroup, TemporalOp};
use super::robustness::robustness;

/// Relative tolerance on sample spacing.
const SPACING_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonitorError {
    #[error("trajectory has no samples")]
    Empty,
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
    #[error("sample {index} at t={t} breaks the uniform spacing dt={dt}")]
    NonUniform { index: usize, t: f64, dt: f64 },
    #[error("sample {index} has state dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, got: usize, expected: usize },
    #[error("trajectory ends at t={end} but the specification needs samples up to t={needed}")]
    TrajectoryTooShort { end: f64, needed: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    /// Checks that samples are uniformly spaced by `dt`.
    pub fn validate(&self) -> Result<(), MonitorError> {
        if !(self.dt > 0.0) {
            return Err(MonitorError::BadStep(self.dt));
        }
        let first = self.samples.first().ok_or(MonitorError::Empty)?;
        for (index, s) in self.samples.iter().enumerate() {
            let expected = first.t + index as f64 * self.dt;
            if (s.t - expected).abs() > SPACING_TOL * self.dt * (1.0 + index as f64) {
                return Err(MonitorError::NonUniform { index, t: s.t, dt: self.dt });
            }
            if s.x.len() != first.x.len() {
                return Err(MonitorError::DimensionMismatch { index, got: s.x.len(), expected: first.x.len() });
            }
        }
        Ok(())
    }

    pub fn end_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorResult {
    pub satisfied: bool,
    pub robustness: f64,
    /// Robustness of each top-level group.
    pub per_group: Vec<f64>,
}

/// First sample index inside a window starting at `lo`.
pub fn window_start(lo: f64, dt: f64) -> usize {
    (lo / dt - 0.5 - 1e-9).ceil().max(0.0) as usize
}

/// Last sample index inside a window ending at `hi`.
pub fn window_end(hi: f64, dt: f64) -> usize {
    (hi / dt + 0.5 + 1e-9).floor() as usize
}

/// Largest sample index any window of `op` reaches.
fn last_index(op: &TemporalOp, dt: f64) -> usize {
    match *op {
        TemporalOp::Finally { b, .. } | TemporalOp::Globally { b, .. } | TemporalOp::Until { b, .. } => {
            window_end(b, dt)
        }
        TemporalOp::FinallyGlobally { b, d, .. } | TemporalOp::GloballyFinally { b, d, .. } => {
            window_end(b, dt) + window_end(d, dt)
        }
    }
}

/// Number of samples (starting at index 0) needed to evaluate `spec`.
pub fn required_samples(spec: &SpecTree, dt: f64) -> usize {
    spec.subtasks().map(|s| last_index(&s.op, dt) + 1).max().unwrap_or(1)
}

/// Evaluates `spec` at the first sample of `traj`.
pub fn monitor(traj: &Trajectory, spec: &SpecTree) -> Result<MonitorResult, MonitorError> {
    traj.validate()?;
    let dt = traj.dt;
    let needed = required_samples(spec, dt);
    if traj.samples.len() < needed {
        return Err(MonitorError::TrajectoryTooShort {
            end: traj.end_time(),
            needed: traj.samples[0].t + (needed - 1) as f64 * dt,
        });
    }
    if let Some((index, s)) = traj.samples.iter().enumerate().find(|(_, s)| s.x.len() != spec.dim) {
        return Err(MonitorError::DimensionMismatch { index, got: s.x.len(), expected: spec.dim });
    }
    let per_group: Vec<f64> = spec
        .groups
        .iter()
        .map(|g| match g {
            SubtaskGroup::Single(s) => subtask_robustness(traj, s),
            SubtaskGroup::Any(members) => {
                members.iter().map(|s| subtask_robustness(traj, s)).fold(f64::NEG_INFINITY, f64::max)
            }
        })
        .collect();
    let robustness = per_group.iter().copied().fold(f64::INFINITY, f64::min);
    // An empty conjunction is trivially true.
    let robustness = if per_group.is_empty() { f64::INFINITY } else { robustness };
    Ok(MonitorResult { satisfied: robustness >= 0.0, robustness, per_group })
}

/// Robustness of one subtask at index 0; the trajectory must be long enough.
pub fn subtask_robustness(traj: &Trajectory, s: &Subtask) -> f64 {
    let dt = traj.dt;
    let rho: Vec<f64> = traj.samples.iter().map(|p| robustness(&p.x, &s.inner)).collect();
    let range = |lo: f64, hi: f64| window_start(lo, dt)..=window_end(hi, dt).min(rho.len() - 1);
    let min_over = |r: std::ops::RangeInclusive<usize>, off: usize| {
        r.map(|k| rho[(k + off).min(rho.len() - 1)]).fold(f64::INFINITY, f64::min)
    };
    let max_over = |r: std::ops::RangeInclusive<usize>, off: usize| {
        r.map(|k| rho[(k + off).min(rho.len() - 1)]).fold(f64::NEG_INFINITY, f64::max)
    };
    match s.op {
        TemporalOp::Finally { a, b } => max_over(range(a, b), 0),
        TemporalOp::Globally { a, b } => min_over(range(a, b), 0),
        TemporalOp::FinallyGlobally { a, b, c, d } => {
            range(a, b).map(|k| min_over(range(c, d), k)).fold(f64::NEG_INFINITY, f64::max)
        }
        TemporalOp::GloballyFinally { a, b, c, d } => {
            range(a, b).map(|k| max_over(range(c, d), k)).fold(f64::INFINITY, f64::min)
        }
        TemporalOp::Until { a, b } => {
            let left = s.left_inner.as_ref().expect("until without a left operand");
            let mut running = f64::INFINITY;
            let mut best = f64::NEG_INFINITY;
            let (k0, k1) = (window_start(a, dt), window_end(b, dt).min(rho.len() - 1));
            for (k, p) in traj.samples.iter().enumerate().take(k1 + 1) {
                running = running.min(robustness(&p.x, left));
                if k >= k0 {
                    best = best.max(rho[k].min(running));
                }
            }
            best
        }
    }
}

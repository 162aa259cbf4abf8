//! Barrier functions: one primary function per subtask and a secondary
//! function over a subtask sequence.

use serde::Serialize;

use crate::geometry::signed_distance;
use crate::sequencer::SubtaskSequence;
use crate::smooth::smooth_max_with_weights;
use crate::stl::{smooth_robustness, InnerFormula};

/// Value of a time-varying barrier function and its partial derivatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CbfEvaluation {
    pub value: f64,
    pub grad_x: Vec<f64>,
    /// Partial derivative with respect to time.
    pub dt_term: f64,
}

/// `h(x, t) = r(t) + (ρ̃(x) − margin) / u_max`, with `r` counting down from
/// `r_ref` at `t_ref` unless frozen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimaryCbf {
    pub subtask_id: usize,
    pub inner: InnerFormula,
    pub r_ref: f64,
    pub t_ref: f64,
    pub u_max: f64,
    pub beta: f64,
    pub frozen: bool,
    pub margin: f64,
}

impl PrimaryCbf {
    pub fn new(subtask_id: usize, inner: InnerFormula, r_ref: f64, u_max: f64, beta: f64) -> Self {
        PrimaryCbf { subtask_id, inner, r_ref, t_ref: 0.0, u_max, beta, frozen: false, margin: 0.0 }
    }

    pub fn remaining(&self, t: f64) -> f64 {
        if self.frozen {
            self.r_ref
        } else {
            self.r_ref - (t - self.t_ref)
        }
    }

    /// Restarts the countdown at `r` from time `t`.
    pub fn reset(&mut self, r: f64, t: f64) {
        self.r_ref = r;
        self.t_ref = t;
    }
}

pub fn primary_value(cbf: &PrimaryCbf, x: &[f64], t: f64) -> CbfEvaluation {
    let (rho, grad) = smooth_robustness(x, &cbf.inner, cbf.beta);
    CbfEvaluation {
        value: cbf.remaining(t) + (rho - cbf.margin) / cbf.u_max,
        grad_x: grad.iter().map(|g| g / cbf.u_max).collect(),
        dt_term: if cbf.frozen { 0.0 } else { -1.0 },
    }
}

/// Smooth max over the members of a disjunction, using the first member's
/// sharpness.
pub fn primary_disjunction(cbfs: &[PrimaryCbf], x: &[f64], t: f64) -> CbfEvaluation {
    assert!(!cbfs.is_empty(), "empty disjunction");
    let evals: Vec<CbfEvaluation> = cbfs.iter().map(|c| primary_value(c, x, t)).collect();
    let values: Vec<f64> = evals.iter().map(|e| e.value).collect();
    let (value, w) = smooth_max_with_weights(&values, cbfs[0].beta);
    let mut grad_x = vec![0.0; x.len()];
    let mut dt_term = 0.0;
    for (wi, e) in w.iter().zip(&evals) {
        for (g, v) in grad_x.iter_mut().zip(&e.grad_x) {
            *g += wi * v;
        }
        dt_term += wi * e.dt_term;
    }
    CbfEvaluation { value, grad_x, dt_term }
}

/// `b_i` for every term after the head.
pub fn secondary_candidates(seq: &SubtaskSequence, x: &[f64], t: f64) -> Vec<f64> {
    let Some(head) = seq.head() else {
        return Vec::new();
    };
    let sd = head.target.signed_distance(x);
    seq.terms
        .iter()
        .zip(&seq.chain)
        .skip(1)
        .map(|(term, chain)| term.remaining(t) + (sd - seq.margin) / seq.u_max - chain)
        .collect()
}

/// The secondary barrier `b = min_i b_i` and the index (into
/// `seq.terms`) of the term attaining it; `None` with fewer than two terms.
/// Ties go to the earliest term.
pub fn secondary_value(seq: &SubtaskSequence, x: &[f64], t: f64) -> Option<(CbfEvaluation, usize)> {
    let candidates = secondary_candidates(seq, x, t);
    let (pos, value) = candidates
        .iter()
        .copied()
        .enumerate()
        .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, best)) if best <= v => acc,
            _ => Some((i, v)),
        })?;
    let (_, grad) = signed_distance(x, &seq.head()?.target);
    let eval = CbfEvaluation { value, grad_x: grad.iter().map(|g| g / seq.u_max).collect(), dt_term: -1.0 };
    Some((eval, pos + 1))
}

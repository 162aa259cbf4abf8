//! Subtask sequences: ordering pending subtasks by worst-case travel time and
//! picking the order (and, for disjunctions, the alternative) with the most
//! total slack.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{diameter, ordered_set_distance, GeometryError, TargetSet};
use crate::qp::ball_rows;
use crate::stl::{Clause, SpecTree, TemporalOp};

/// Above this many terms the selection falls back to earliest-deadline order.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Facets of the polygon used to approximate discs inside mixed clauses.
const CLAUSE_FACETS: usize = 32;

/// Sums of slack closer than this count as ties.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("no feasible sequence; best order {best_order:?} misses its tightest deadline by {deficit:.4} s")]
    NoFeasibleSequence { best_order: Vec<usize>, deficit: f64 },
    #[error("subtask {0} is not in the sequence")]
    UnknownSubtask(usize),
    #[error("clause {clause} of subtask {subtask_id} has an empty intersection")]
    EmptyIntersection { subtask_id: usize, clause: usize },
    #[error("nothing to sequence")]
    NoAlternatives,
    #[error("speed bound must be positive, got {0}")]
    BadSpeed(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One pending subtask with the set chosen to represent it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceTerm {
    /// Index of the top-level group this term satisfies.
    pub group: usize,
    pub subtask_id: usize,
    /// Clause of the subtask's inner formula represented by `target`.
    pub clause: usize,
    pub target: TargetSet,
    /// Remaining time at `t_ref`.
    pub remaining0: f64,
    pub t_ref: f64,
    /// Time the state must stay inside `target` once it gets there.
    pub dwell: f64,
    /// Absolute time before which reaching `target` does not count.
    pub open: f64,
    /// Distance the state may cover inside `target` while dwelling, which
    /// is credited against the dwell.
    pub crossing: f64,
}

impl SequenceTerm {
    /// Dwell left after crediting the crossing.
    pub fn dwell_excess(&self, u_max: f64) -> f64 {
        (self.dwell - self.crossing / u_max).max(0.0)
    }

    pub fn remaining(&self, t: f64) -> f64 {
        self.remaining0 - (t - self.t_ref)
    }
}

/// An ordered list of terms plus the cumulative worst-case travel time from
/// the head's set to each term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubtaskSequence {
    pub terms: Vec<SequenceTerm>,
    /// `chain[j]`: worst-case time from anywhere in the head's set to term `j`.
    pub chain: Vec<f64>,
    pub u_max: f64,
    /// Robustness margin subtracted inside the secondary barrier.
    pub margin: f64,
}

impl SubtaskSequence {
    pub fn new(terms: Vec<SequenceTerm>, u_max: f64) -> Self {
        let chain = chain_times(&terms, u_max);
        SubtaskSequence { terms, chain, u_max, margin: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn head(&self) -> Option<&SequenceTerm> {
        self.terms.first()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.subtask_id).collect()
    }

    pub fn contains(&self, subtask_id: usize) -> bool {
        self.terms.iter().any(|t| t.subtask_id == subtask_id)
    }

    /// Feasibility of this order from `(x, t)`.
    pub fn check(&self, x: &[f64], t: f64) -> Feasibility {
        evaluate(&self.terms, &self.chain, x, t, self.u_max)
    }

    pub fn is_feasible(&self, x: &[f64], t: f64) -> bool {
        self.check(x, t).feasible
    }

    /// Resets the remaining time of one term.
    pub fn set_remaining(&mut self, subtask_id: usize, remaining: f64, t: f64) -> Result<(), SequenceError> {
        let term = self
            .terms
            .iter_mut()
            .find(|s| s.subtask_id == subtask_id)
            .ok_or(SequenceError::UnknownSubtask(subtask_id))?;
        term.remaining0 = remaining;
        term.t_ref = t;
        Ok(())
    }
}

/// `chain[0] = 0`; each later entry adds the ordered distance from the
/// previous set and whatever part of the previous dwell cannot be spent
/// crossing that set.
pub fn chain_times(terms: &[SequenceTerm], u_max: f64) -> Vec<f64> {
    let mut chain = Vec::with_capacity(terms.len());
    for (j, term) in terms.iter().enumerate() {
        if j == 0 {
            chain.push(0.0);
            continue;
        }
        let prev = &terms[j - 1];
        let travel = ordered_set_distance(&prev.target, &term.target) / u_max;
        chain.push(chain[j - 1] + travel + prev.dwell_excess(u_max));
    }
    chain
}

/// Remaining time of a subtask's deadline measured from time zero.
pub fn initial_remaining(op: &TemporalOp) -> f64 {
    match *op {
        TemporalOp::Finally { b, .. } | TemporalOp::Until { b, .. } => b,
        TemporalOp::Globally { a, .. } => a,
        TemporalOp::FinallyGlobally { b, c, .. } => b + c,
        TemporalOp::GloballyFinally { a, d, .. } => a + d,
    }
}

/// Earliest absolute time at which reaching the set counts.
pub fn window_open(op: &TemporalOp) -> f64 {
    match *op {
        TemporalOp::Finally { a, .. } | TemporalOp::Until { a, .. } | TemporalOp::Globally { a, .. } => a,
        TemporalOp::FinallyGlobally { a, c, .. } => a + c,
        TemporalOp::GloballyFinally { .. } => 0.0,
    }
}

/// How long the state has to stay in the set once it arrives.
pub fn dwell(op: &TemporalOp) -> f64 {
    match *op {
        TemporalOp::Globally { a, b } => b - a,
        TemporalOp::FinallyGlobally { c, d, .. } => d - c,
        _ => 0.0,
    }
}

/// A single compact set standing for a clause.
///
/// One predicate is used as is. Several predicates are replaced by a
/// polytope contained in their intersection (discs become inscribed
/// polygons), so reaching it always satisfies the clause.
pub fn clause_target(clause: &Clause, subtask_id: usize, index: usize) -> Result<TargetSet, SequenceError> {
    if let [only] = clause.predicates.as_slice() {
        return Ok(only.set.clone());
    }
    let mut normals = Vec::new();
    let mut offsets = Vec::new();
    for p in &clause.predicates {
        match &p.set {
            TargetSet::Box { lo, hi } => {
                for k in 0..lo.len() {
                    let mut n = vec![0.0; lo.len()];
                    n[k] = 1.0;
                    normals.push(n.clone());
                    offsets.push(hi[k]);
                    n[k] = -1.0;
                    normals.push(n);
                    offsets.push(-lo[k]);
                }
            }
            TargetSet::Polytope(poly) => {
                normals.extend(poly.normals().iter().cloned());
                offsets.extend(poly.offsets().iter().copied());
            }
            TargetSet::Disc { center, radius } => {
                for row in ball_rows(*radius, center.len(), CLAUSE_FACETS) {
                    // aᵀ(p − c) ≥ b  ⇔  (−a)ᵀp ≤ −b − aᵀc
                    let n: Vec<f64> = row.a.iter().map(|v| -v).collect();
                    let shift: f64 = n.iter().zip(center).map(|(a, c)| a * c).sum();
                    normals.push(n);
                    offsets.push(-row.b + shift);
                }
            }
        }
    }
    TargetSet::polytope(normals, offsets).map_err(|_| SequenceError::EmptyIntersection { subtask_id, clause: index })
}

/// Per group, every (member, clause) choice as a term with time-zero deadlines.
pub fn group_options(spec: &SpecTree) -> Result<Vec<Vec<SequenceTerm>>, SequenceError> {
    spec.groups
        .iter()
        .enumerate()
        .map(|(g, group)| {
            let mut options = Vec::new();
            for s in group.members() {
                for (c, clause) in s.inner.clauses.iter().enumerate() {
                    let target = clause_target(clause, s.id, c)?;
                    options.push(SequenceTerm {
                        group: g,
                        subtask_id: s.id,
                        clause: c,
                        crossing: diameter(&target),
                        target,
                        remaining0: initial_remaining(&s.op),
                        t_ref: 0.0,
                        dwell: dwell(&s.op),
                        open: window_open(&s.op),
                    });
                }
            }
            Ok(options)
        })
        .collect()
}

/// Cartesian product of per-group options, in lexicographic order.
pub fn product(options: &[Vec<SequenceTerm>]) -> Vec<Vec<SequenceTerm>> {
    let mut out: Vec<Vec<SequenceTerm>> = vec![Vec::new()];
    for group in options {
        out = out
            .iter()
            .flat_map(|prefix| {
                group.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Every way of picking one member and one clause per group.
pub fn enumerate_alternatives(spec: &SpecTree) -> Result<Vec<Vec<SequenceTerm>>, SequenceError> {
    Ok(product(&group_options(spec)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// Worst-case time to reach each term from the current state.
    pub required: Vec<f64>,
    pub remaining: Vec<f64>,
    pub slack: Vec<f64>,
}

impl Feasibility {
    pub fn total_slack(&self) -> f64 {
        self.slack.iter().sum()
    }

    pub fn min_slack(&self) -> f64 {
        self.slack.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn evaluate(terms: &[SequenceTerm], chain: &[f64], x: &[f64], t: f64, u_max: f64) -> Feasibility {
    let Some(head) = terms.first() else {
        return Feasibility { feasible: true, required: vec![], remaining: vec![], slack: vec![] };
    };
    let to_head = -head.target.signed_distance(x) / u_max;
    let required: Vec<f64> = chain.iter().map(|c| to_head + c).collect();
    let remaining: Vec<f64> = terms.iter().map(|s| s.remaining(t)).collect();
    let slack: Vec<f64> = remaining.iter().zip(&required).map(|(r, q)| r - q).collect();
    Feasibility { feasible: slack.iter().all(|s| *s >= 0.0), required, remaining, slack }
}

/// Like [`feasible`], but a term reached before its window opens waits
/// there, delaying everything after it. `required` holds the arrival
/// times relative to `t`.
pub fn scheduled(order: &[SequenceTerm], x: &[f64], t: f64, u_max: f64) -> Feasibility {
    let mut required = Vec::with_capacity(order.len());
    let mut arrival = t;
    // Depth inside the first set brings every later set that much closer
    // than the worst case, even while waiting there.
    let mut credit = 0.0;
    for (j, term) in order.iter().enumerate() {
        let travel = if j == 0 {
            let to_first = -term.target.signed_distance(x) / u_max;
            credit = (-to_first).max(0.0);
            to_first.max(0.0)
        } else {
            let prev = &order[j - 1];
            let leg = ordered_set_distance(&prev.target, &term.target) / u_max + prev.dwell_excess(u_max);
            if j == 1 { leg - credit } else { leg }
        };
        arrival = (arrival + travel).max(term.open);
        required.push(arrival - t);
    }
    let remaining: Vec<f64> = order.iter().map(|s| s.remaining(t)).collect();
    let slack: Vec<f64> = remaining.iter().zip(&required).map(|(r, q)| r - q).collect();
    Feasibility { feasible: slack.iter().all(|s| *s >= 0.0), required, remaining, slack }
}

/// Worst-case feasibility of visiting `order` in turn from `(x, t)`.
pub fn feasible(order: &[SequenceTerm], x: &[f64], t: f64, u_max: f64) -> Feasibility {
    evaluate(order, &chain_times(order, u_max), x, t, u_max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectOptions {
    /// Orders headed by this subtask are skipped unless it is the only term.
    pub forbid_head: Option<usize>,
    pub exhaustive_limit: usize,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions { forbid_head: None, exhaustive_limit: EXHAUSTIVE_LIMIT }
    }
}

/// One evaluated order, as listed by [`evaluate_all`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub alternative: usize,
    pub order: Vec<usize>,
    pub clauses: Vec<usize>,
    pub required: Vec<f64>,
    pub remaining: Vec<f64>,
    pub slack: Vec<f64>,
    pub total_slack: f64,
    /// Whether the order survives waiting for windows to open.
    pub feasible: bool,
    /// Arrival times relative to now, including waits.
    pub arrival: Vec<f64>,
}

/// Advances `perm` to the next permutation in lexicographic order.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
        return false;
    };
    let j = (i..perm.len()).rev().find(|&j| perm[j] > perm[i - 1]).expect("pivot has a successor");
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Earliest deadline first, ties by subtask id.
fn edf_order(terms: &[SequenceTerm], t: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..terms.len()).collect();
    idx.sort_by(|&a, &b| {
        terms[a]
            .remaining(t)
            .total_cmp(&terms[b].remaining(t))
            .then(terms[a].subtask_id.cmp(&terms[b].subtask_id))
    });
    idx
}

/// Calls `visit` for every candidate order of every alternative.
fn for_each_order(
    alternatives: &[Vec<SequenceTerm>],
    t: f64,
    opts: &SelectOptions,
    mut visit: impl FnMut(usize, Vec<SequenceTerm>),
) {
    for (a, alt) in alternatives.iter().enumerate() {
        let k = alt.len();
        let allowed = |order: &[SequenceTerm]| match (opts.forbid_head, order.first()) {
            (Some(id), Some(head)) if k > 1 => head.subtask_id != id,
            _ => true,
        };
        if k > opts.exhaustive_limit {
            let mut order: Vec<SequenceTerm> = edf_order(alt, t).into_iter().map(|i| alt[i].clone()).collect();
            if !allowed(&order) {
                // Swap the forbidden head with its successor.
                order.swap(0, 1);
            }
            visit(a, order);
            continue;
        }
        let mut perm: Vec<usize> = (0..k).collect();
        loop {
            let order: Vec<SequenceTerm> = perm.iter().map(|&i| alt[i].clone()).collect();
            if allowed(&order) {
                visit(a, order);
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }
}

fn key(order: &[SequenceTerm]) -> (Vec<usize>, Vec<usize>) {
    (order.iter().map(|s| s.subtask_id).collect(), order.iter().map(|s| s.clause).collect())
}

/// Picks the order with the largest total slack (as computed by
/// [`feasible`]) among those that [`scheduled`] accepts.
pub fn select(
    alternatives: &[Vec<SequenceTerm>],
    x: &[f64],
    t: f64,
    u_max: f64,
) -> Result<SubtaskSequence, SequenceError> {
    select_with(alternatives, x, t, u_max, &SelectOptions::default())
}

/// [`select`] with explicit options. Ties on total slack go to the
/// lexicographically smallest list of subtask ids, then clauses.
pub fn select_with(
    alternatives: &[Vec<SequenceTerm>],
    x: &[f64],
    t: f64,
    u_max: f64,
    opts: &SelectOptions,
) -> Result<SubtaskSequence, SequenceError> {
    if !(u_max > 0.0) {
        return Err(SequenceError::BadSpeed(u_max));
    }
    if alternatives.is_empty() {
        return Err(SequenceError::NoAlternatives);
    }
    let mut best: Option<(f64, Vec<SequenceTerm>)> = None;
    let mut closest: Option<(f64, Vec<SequenceTerm>)> = None;
    for_each_order(alternatives, t, opts, |_, order| {
        let f = scheduled(&order, x, t, u_max);
        if f.feasible {
            let total = feasible(&order, x, t, u_max).total_slack();
            let better = match &best {
                None => true,
                Some((b, o)) => total > b + TIE_TOL || ((total - b).abs() <= TIE_TOL && key(&order) < key(o)),
            };
            if better {
                best = Some((total, order));
            }
        } else {
            let worst = f.min_slack();
            if closest.as_ref().is_none_or(|(w, _)| worst > *w) {
                closest = Some((worst, order));
            }
        }
    });
    match best {
        Some((_, order)) => Ok(SubtaskSequence::new(order, u_max)),
        None => {
            let (worst, order) = closest.ok_or(SequenceError::NoAlternatives)?;
            Err(SequenceError::NoFeasibleSequence {
                best_order: order.iter().map(|s| s.subtask_id).collect(),
                deficit: -worst,
            })
        }
    }
}

/// Every candidate order with its timing, for inspection.
pub fn evaluate_all(alternatives: &[Vec<SequenceTerm>], x: &[f64], t: f64, u_max: f64) -> Vec<OrderReport> {
    let mut out = Vec::new();
    for_each_order(alternatives, t, &SelectOptions::default(), |a, order| {
        let f = feasible(&order, x, t, u_max);
        let waiting = scheduled(&order, x, t, u_max);
        let (ids, clauses) = key(&order);
        out.push(OrderReport {
            alternative: a,
            order: ids,
            clauses,
            total_slack: f.total_slack(),
            feasible: waiting.feasible,
            required: f.required,
            remaining: f.remaining,
            slack: f.slack,
            arrival: waiting.required,
        });
    });
    out
}

/// The sequence without `subtask_id`, with the chain recomputed.
pub fn remove_completed(seq: &SubtaskSequence, subtask_id: usize) -> Result<SubtaskSequence, SequenceError> {
    if !seq.contains(subtask_id) {
        return Err(SequenceError::UnknownSubtask(subtask_id));
    }
    let terms: Vec<SequenceTerm> = seq.terms.iter().filter(|s| s.subtask_id != subtask_id).cloned().collect();
    let mut out = SubtaskSequence::new(terms, seq.u_max);
    out.margin = seq.margin;
    Ok(out)
}

/// Re-selects after a recurring subtask was reached: the reached subtask
/// may not lead the new order when anything else is pending, since the
/// state already sits in its set.
pub fn resequence_for_recurrence(
    alternatives: &[Vec<SequenceTerm>],
    achieved: usize,
    x: &[f64],
    t: f64,
    u_max: f64,
) -> Result<SubtaskSequence, SequenceError> {
    let opts = SelectOptions { forbid_head: Some(achieved), ..SelectOptions::default() };
    select_with(alternatives, x, t, u_max, &opts)
}

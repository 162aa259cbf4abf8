//! The closed loop: per-subtask lifecycle, one QP per time step, explicit
//! Euler integration of `ẋ = u`.
//!
//! All timing decisions are made on sample indices with the same window
//! rounding as the monitor, so a subtask the controller considers achieved
//! is also achieved in the monitor's eyes.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::cbf::{primary_disjunction, primary_value, secondary_value, CbfEvaluation, PrimaryCbf};
use crate::qp::{ball_inradius, ball_rows, solve, QpError, QpProblem, QpStatus, Row};
use crate::sequencer::{
    dwell, group_options, remove_completed, select_with, window_open, SelectOptions, SequenceError, SequenceTerm,
    SubtaskSequence,
};
use crate::stl::{
    monitor, required_samples, robustness, smooth_robustness, window_end, window_start, InnerFormula, MonitorError,
    MonitorResult, Sample, SpecTree, Subtask, SubtaskGroup, TemporalOp, Trajectory,
};

/// Tolerance for the runtime checks of sequence feasibility.
const CHECK_TOL: f64 = 1e-9;
const CORRECTION_ROUNDS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported specification: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("{which} barrier of subtask {subtask_id} is negative at the initial state ({value:.6})")]
    InitiallyInfeasible { subtask_id: usize, which: &'static str, value: f64 },
    #[error("QP infeasible at step {step} (t={t:.3}): {detail}")]
    QpInfeasible { step: usize, t: f64, detail: String },
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub spec: SpecTree,
    pub x0: Vec<f64>,
    pub u_max: f64,
    pub dt: f64,
    pub beta: f64,
    /// γ in the class-K function `α(h) = γ·h`.
    pub alpha_gain: f64,
    /// Facets of the polygon approximating the input disc (2-D only).
    pub facets: usize,
    pub relax_secondary: bool,
    pub relax_penalty: f64,
    /// Robustness the controller aims for inside target sets.
    pub margin: f64,
    /// Subtask ids that must be the chosen member of their disjunction.
    pub pin: Vec<usize>,
}

impl ScenarioConfig {
    pub fn new(spec: SpecTree, x0: Vec<f64>, u_max: f64) -> Self {
        ScenarioConfig {
            spec,
            x0,
            u_max,
            dt: 0.05,
            beta: 30.0,
            alpha_gain: 1.0,
            facets: 32,
            relax_secondary: false,
            relax_penalty: 1e3,
            margin: 1e-3,
            pin: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ControllerError> {
        let bad = |m: String| Err(ControllerError::InvalidConfig(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.u_max > 0.0 && self.u_max.is_finite()) {
            return bad(format!("u_max must be positive, got {}", self.u_max));
        }
        if !(self.alpha_gain > 0.0) {
            return bad(format!("alpha_gain must be positive, got {}", self.alpha_gain));
        }
        if !(self.beta > 0.0) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.relax_penalty > 0.0) {
            return bad(format!("relax_penalty must be positive, got {}", self.relax_penalty));
        }
        if !(self.margin >= 0.0) {
            return bad(format!("margin must be nonnegative, got {}", self.margin));
        }
        if self.facets < 4 {
            return bad(format!("need at least 4 facets, got {}", self.facets));
        }
        if self.x0.len() != self.spec.dim {
            return bad(format!("x0 has dimension {}, the specification {}", self.x0.len(), self.spec.dim));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return bad("x0 must be finite".into());
        }
        for s in self.spec.subtasks() {
            if !s.op.bounds_valid() {
                return bad(format!("subtask {} has invalid time bounds", s.id));
            }
        }
        for (g, group) in self.spec.groups.iter().enumerate() {
            if let SubtaskGroup::Any(members) = group {
                if let Some(s) = members.iter().find(|s| {
                    matches!(s.op, TemporalOp::GloballyFinally { .. } | TemporalOp::Until { .. })
                }) {
                    return Err(ControllerError::Unsupported(format!(
                        "group {} mixes {} into a disjunction",
                        g + 1,
                        s.op.name()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Phase {
    Pending,
    /// A Globally-type hold from `start` until `end` (seconds).
    HoldingGlobally { start: f64, end: f64 },
    Done,
}

/// Lifecycle summary of one top-level group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubtaskStatus {
    pub group: usize,
    /// Members of the group; the achieving one once known.
    pub subtask_ids: Vec<usize>,
    pub phase: Phase,
    /// Remaining time of the (first) member's deadline.
    pub remaining: f64,
    pub resets_done: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// Primary barrier of the sequence head.
    pub h: Option<f64>,
    /// Smallest barrier among active holds.
    pub h_hold: Option<f64>,
    /// Secondary barrier, when two or more terms are sequenced.
    pub b: Option<f64>,
    pub active_subtask: Option<usize>,
    pub critical_term: Option<usize>,
    pub qp_status: QpStatus,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceEvent {
    pub t: f64,
    pub order: Vec<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub satisfied: bool,
    pub robustness: f64,
    pub per_group: Vec<f64>,
    pub total_cost: f64,
    pub steps: usize,
    pub min_h: Option<f64>,
    pub min_h_hold: Option<f64>,
    pub min_b: Option<f64>,
    pub max_input_norm: f64,
    pub mean_solve_ms: f64,
    pub max_solve_ms: f64,
    pub sequence_history: Vec<SequenceEvent>,
    /// Selections made after the initial one.
    pub resequences: usize,
    /// Samples at which a recurring deadline was pushed back.
    pub gf_resets: usize,
    /// Separate visits to the sets of recurring subtasks.
    pub gf_visits: usize,
    pub completions: Vec<(usize, f64)>,
    /// Removals after which the remaining sequence was infeasible.
    pub removal_violations: usize,
    /// Steps where `b ≥ 0` but some sequenced subtask had a negative primary.
    pub ordering_violations: usize,
    pub relaxed_steps: usize,
    pub max_slack: f64,
    pub statuses: Vec<SubtaskStatus>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simulation {
    pub trajectory: Trajectory,
    pub steps: Vec<StepRecord>,
    pub report: RunReport,
}

#[derive(Debug, Clone)]
enum GroupPhase {
    Pending,
    Holding {
        member: usize,
        start_k: usize,
        end_k: usize,
        cbf: PrimaryCbf,
        /// Part of the hold the sequence assumed is spent crossing the set.
        credit: f64,
        /// Whether the head is steered toward during the hold, decided the
        /// first time each head is seen.
        steer: Option<(usize, bool)>,
    },
    Done,
}

#[derive(Debug, Clone)]
struct GroupState {
    members: Vec<Subtask>,
    primaries: Vec<PrimaryCbf>,
    phase: GroupPhase,
    /// Last outer index covered by a recurring subtask's visits.
    covered: i64,
    /// Inside the set of a recurring subtask, which is then left out of
    /// the sequence.
    visiting: bool,
    visits: usize,
    /// Samples at which a recurring deadline was pushed back.
    resets: usize,
    /// Hold on the left operand of an until.
    until_hold: Option<PrimaryCbf>,
}

/// Barrier values at one state, in row order.
#[derive(Debug, Clone)]
struct Barriers {
    head: Option<(usize, CbfEvaluation)>,
    /// The head barrier as constrained, tightened by any running hold.
    steered: Option<CbfEvaluation>,
    holds: Vec<CbfEvaluation>,
    secondary: Option<(CbfEvaluation, usize)>,
}

impl Barriers {
    /// Each row's barrier and whether the relaxation slack applies to it.
    fn rows(&self) -> Vec<(&CbfEvaluation, bool)> {
        let mut out: Vec<(&CbfEvaluation, bool)> = Vec::new();
        out.extend(self.steered.iter().map(|e| (e, false)));
        out.extend(self.holds.iter().map(|e| (e, false)));
        out.extend(self.secondary.iter().map(|(e, _)| (e, true)));
        out
    }
}

/// Controller state between steps.
#[derive(Debug, Clone)]
pub struct Controller {
    cfg: ScenarioConfig,
    /// Speed available in every direction of the input polytope.
    u_eff: f64,
    groups: Vec<GroupState>,
    seq: SubtaskSequence,
    x: Vec<f64>,
    k: usize,
    last: usize,
    samples: Vec<Sample>,
    steps: Vec<StepRecord>,
    history: Vec<SequenceEvent>,
    completions: Vec<(usize, f64)>,
    cost: f64,
    solve_ms: Vec<f64>,
    resequences: usize,
    removal_violations: usize,
    ordering_violations: usize,
}

fn idx(v: usize) -> i64 {
    v as i64
}

impl Controller {
    /// Builds the initial sequence and checks that every barrier starts
    /// nonnegative.
    pub fn new(cfg: ScenarioConfig) -> Result<Self, ControllerError> {
        cfg.validate()?;
        let u_eff = ball_inradius(cfg.u_max, cfg.spec.dim, cfg.facets);
        let dt = cfg.dt;
        let groups = cfg
            .spec
            .groups
            .iter()
            .map(|g| {
                let members = g.members().to_vec();
                let primaries = members
                    .iter()
                    .map(|s| {
                        let mut c = PrimaryCbf::new(
                            s.id,
                            s.inner.clone(),
                            crate::sequencer::initial_remaining(&s.op),
                            u_eff,
                            cfg.beta,
                        );
                        c.margin = cfg.margin;
                        c
                    })
                    .collect();
                let covered = match members[0].op {
                    TemporalOp::GloballyFinally { a, .. } => idx(window_start(a, dt)) - 1,
                    _ => 0,
                };
                let until_hold = members[0].left_inner.as_ref().map(|left| {
                    let mut c = PrimaryCbf::new(members[0].id, left.clone(), dt, u_eff, cfg.beta);
                    c.frozen = true;
                    c.margin = cfg.margin + dt * u_eff;
                    c
                });
                GroupState {
                    members,
                    primaries,
                    phase: GroupPhase::Pending,
                    covered,
                    visiting: false,
                    visits: 0,
                    resets: 0,
                    until_hold,
                }
            })
            .collect();
        let last = required_samples(&cfg.spec, dt) - 1;
        let mut ctl = Controller {
            x: cfg.x0.clone(),
            u_eff,
            groups,
            seq: SubtaskSequence::new(Vec::new(), u_eff),
            k: 0,
            last,
            samples: Vec::new(),
            steps: Vec::new(),
            history: Vec::new(),
            completions: Vec::new(),
            cost: 0.0,
            solve_ms: Vec::new(),
            resequences: 0,
            removal_violations: 0,
            ordering_violations: 0,
            cfg,
        };
        if !ctl.groups.is_empty() {
            let alternatives = ctl.alternatives(0.0)?;
            ctl.seq = select_with(&alternatives, &ctl.x, 0.0, u_eff, &SelectOptions::default())?;
            ctl.seq.margin = ctl.cfg.margin;
            ctl.history.push(SequenceEvent { t: 0.0, order: ctl.seq.ids(), reason: "initial".into() });
        }
        ctl.check_initial()?;
        Ok(ctl)
    }

    fn check_initial(&self) -> Result<(), ControllerError> {
        let x = &self.x;
        if let Some((id, e)) = self.head_barrier(x, 0.0) {
            if e.value < 0.0 {
                return Err(ControllerError::InitiallyInfeasible { subtask_id: id, which: "primary", value: e.value });
            }
        }
        if let Some((e, i)) = secondary_value(&self.seq, x, 0.0) {
            if e.value < 0.0 {
                return Err(ControllerError::InitiallyInfeasible {
                    subtask_id: self.seq.terms[i].subtask_id,
                    which: "secondary",
                    value: e.value,
                });
            }
        }
        for g in &self.groups {
            if let Some(c) = &g.until_hold {
                let v = primary_value(c, x, 0.0).value;
                if v < 0.0 {
                    return Err(ControllerError::InitiallyInfeasible { subtask_id: c.subtask_id, which: "until", value: v });
                }
            }
        }
        Ok(())
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn time(&self) -> f64 {
        self.k as f64 * self.cfg.dt
    }

    pub fn sequence(&self) -> &SubtaskSequence {
        &self.seq
    }

    pub fn is_finished(&self) -> bool {
        self.k > self.last
    }

    pub fn statuses(&self) -> Vec<SubtaskStatus> {
        let t = self.time();
        self.groups
            .iter()
            .enumerate()
            .map(|(g, s)| {
                let dt = self.cfg.dt;
                let (phase, ids) = match &s.phase {
                    GroupPhase::Pending => (Phase::Pending, s.members.iter().map(|m| m.id).collect()),
                    GroupPhase::Holding { member, start_k, end_k, .. } => (
                        Phase::HoldingGlobally { start: *start_k as f64 * dt, end: *end_k as f64 * dt },
                        vec![s.members[*member].id],
                    ),
                    GroupPhase::Done => (Phase::Done, s.members.iter().map(|m| m.id).collect()),
                };
                SubtaskStatus { group: g, subtask_ids: ids, phase, remaining: s.primaries[0].remaining(t), resets_done: s.resets }
            })
            .collect()
    }

    /// Options for every group still waiting in the sequence, with the
    /// deadlines as of `t`.
    fn alternatives(&self, t: f64) -> Result<Vec<Vec<SequenceTerm>>, ControllerError> {
        let all = group_options(&self.cfg.spec)?;
        let hold_margin = self.hold_margin();
        let mut per_group = Vec::new();
        for (g, options) in all.into_iter().enumerate() {
            let state = &self.groups[g];
            if !matches!(state.phase, GroupPhase::Pending) || state.visiting {
                continue;
            }
            let pinned: Vec<usize> =
                state.members.iter().map(|m| m.id).filter(|id| self.cfg.pin.contains(id)).collect();
            let options: Vec<SequenceTerm> = options
                .into_iter()
                .filter(|o| pinned.is_empty() || pinned.contains(&o.subtask_id))
                .map(|mut o| {
                    let m = state.members.iter().position(|s| s.id == o.subtask_id).expect("member of group");
                    o.remaining0 = state.primaries[m].remaining(t);
                    o.t_ref = t;
                    o.open = window_open(&state.members[m].op);
                    o.dwell = dwell(&state.members[m].op);
                    // Only the part of the set the hold barrier leaves open
                    // can be crossed.
                    o.crossing = (o.crossing - 4.0 * hold_margin).max(0.0);
                    o
                })
                .collect();
            per_group.push(options);
        }
        Ok(crate::sequencer::product(&per_group))
    }

    fn hold_margin(&self) -> f64 {
        self.cfg.margin + self.cfg.dt * self.u_eff
    }

    fn resequence(&mut self, t: f64, avoid_head: Option<usize>) -> Result<(), ControllerError> {
        let alternatives = self.alternatives(t)?;
        if alternatives.iter().all(|a| a.is_empty()) {
            return Ok(());
        }
        let strict = SelectOptions { forbid_head: avoid_head, ..SelectOptions::default() };
        let picked = select_with(&alternatives, &self.x, t, self.u_eff, &strict)
            .or_else(|_| select_with(&alternatives, &self.x, t, self.u_eff, &SelectOptions::default()));
        match picked {
            Ok(mut seq) => {
                seq.margin = self.cfg.margin;
                self.seq = seq;
                self.resequences += 1;
                self.history.push(SequenceEvent { t, order: self.seq.ids(), reason: "recurrence".into() });
            }
            Err(e) => {
                // Keep the current order; the run reports whatever follows.
                self.history.push(SequenceEvent { t, order: self.seq.ids(), reason: format!("resequence failed: {e}") });
            }
        }
        Ok(())
    }

    fn retire_from_sequence(&mut self, id: usize, t: f64, reason: &str) {
        if let Ok(next) = remove_completed(&self.seq, id) {
            self.seq = next;
            if !self.seq.is_feasible(&self.x, t) {
                self.removal_violations += 1;
            }
            self.history.push(SequenceEvent { t, order: self.seq.ids(), reason: reason.into() });
        }
    }

    /// Applies lifecycle transitions for the current sample.
    pub fn on_events(&mut self) -> Result<(), ControllerError> {
        let k = self.k;
        let dt = self.cfg.dt;
        let t = self.time();
        let x = self.x.clone();
        let hold_margin = self.hold_margin();
        let u_eff = self.u_eff;
        let seq = &self.seq;
        let mut reinsert: Option<usize> = None;
        let mut retire: Vec<(usize, &'static str)> = Vec::new();
        for state in self.groups.iter_mut() {
            match &state.phase {
                GroupPhase::Done => continue,
                GroupPhase::Holding { member, end_k, .. } => {
                    if k >= *end_k {
                        self.completions.push((state.members[*member].id, t));
                        state.phase = GroupPhase::Done;
                    }
                    continue;
                }
                GroupPhase::Pending => {}
            }
            let mut retired: Option<&'static str> = None;
            for m in 0..state.members.len() {
                let s = &state.members[m];
                let inside = robustness(&x, &s.inner) >= 0.0;
                // Holds start only once the smoothed margin is met, so the
                // hold barrier begins nonnegative.
                let settled = inside && smooth_robustness(&x, &s.inner, self.cfg.beta).0 >= self.cfg.margin;
                let crossing = seq.terms.iter().find(|term| term.subtask_id == s.id).map_or(0.0, |term| term.crossing);
                let hold = |end_k: usize| {
                    // r stays at Δt; the extra Δt·u of margin keeps the state
                    // inside with at least the configured robustness.
                    let mut cbf = state.primaries[m].clone();
                    cbf.r_ref = dt;
                    cbf.frozen = true;
                    cbf.margin = hold_margin;
                    let credit = (crossing / u_eff).min((end_k - k) as f64 * dt);
                    GroupPhase::Holding { member: m, start_k: k, end_k, cbf, credit, steer: None }
                };
                match s.op {
                    TemporalOp::Finally { a, b } | TemporalOp::Until { a, b } => {
                        if inside && k >= window_start(a, dt) && k <= window_end(b, dt) {
                            self.completions.push((s.id, t));
                            state.phase = GroupPhase::Done;
                            retired = Some("achieved");
                        }
                    }
                    TemporalOp::Globally { a, b } => {
                        if settled && k >= window_start(a, dt) && k <= window_end(b, dt) {
                            state.phase = hold(window_end(b, dt));
                            retired = Some("hold started");
                        }
                    }
                    TemporalOp::FinallyGlobally { a, b, c, d } => {
                        let (wc, wd) = (window_start(c, dt), window_end(d, dt));
                        if settled && k >= window_start(a, dt) + wc && k <= window_end(b, dt) + wc {
                            state.phase = hold(k - wc + wd);
                            retired = Some("hold started");
                        }
                    }
                    TemporalOp::GloballyFinally { b, c, d, .. } => {
                        if inside {
                            let (wc, wd) = (idx(window_start(c, dt)), idx(window_end(d, dt)));
                            let v = idx(k);
                            if v - wd <= state.covered + 1 && v - wc > state.covered {
                                state.covered = v - wc;
                                if state.covered >= idx(window_end(b, dt)) {
                                    self.completions.push((s.id, t));
                                    state.phase = GroupPhase::Done;
                                    retired = Some("achieved");
                                } else {
                                    let deadline = (state.covered + 1 + wd) as f64 * dt;
                                    state.primaries[m].reset(deadline - t, t);
                                    state.resets += 1;
                                    if !state.visiting {
                                        // Out of the sequence while inside; the
                                        // deadline keeps moving with each sample.
                                        state.visiting = true;
                                        state.visits += 1;
                                        retired = Some("visited");
                                    }
                                }
                            }
                        } else if state.visiting {
                            state.visiting = false;
                            reinsert = Some(s.id);
                        }
                    }
                }
                if retired.is_some() {
                    break;
                }
            }
            if let GroupPhase::Holding { end_k, member, .. } = &state.phase {
                // Zero-length holds end where they start.
                if k >= *end_k {
                    self.completions.push((state.members[*member].id, t));
                    state.phase = GroupPhase::Done;
                }
            }
            if let Some(reason) = retired {
                retire.extend(state.members.iter().map(|s| (s.id, reason)));
            }
        }
        for (id, reason) in retire {
            if self.seq.contains(id) {
                self.retire_from_sequence(id, t, reason);
            }
        }
        if let Some(id) = reinsert {
            self.resequence(t, Some(id))?;
        }
        Ok(())
    }

    /// The head's primary barrier: the sequenced member's, or the blend
    /// over all members when a disjunction is the only term left. With
    /// later terms waiting, only the sequenced clause counts.
    fn head_barrier(&self, x: &[f64], t: f64) -> Option<(usize, CbfEvaluation)> {
        let head = self.seq.head()?;
        let state = &self.groups[head.group];
        if !matches!(state.phase, GroupPhase::Pending) {
            return None;
        }
        if state.members.len() > 1 && self.seq.len() == 1 {
            return Some((head.subtask_id, primary_disjunction(&state.primaries, x, t)));
        }
        let m = state.members.iter().position(|s| s.id == head.subtask_id)?;
        let primary = &state.primaries[m];
        if self.seq.len() > 1 && primary.inner.clauses.len() > 1 {
            // Steer for the clause the sequence committed to, so the head
            // and the secondary barrier agree on the target.
            let mut committed = primary.clone();
            committed.inner = InnerFormula { clauses: vec![primary.inner.clauses[head.clause].clone()] };
            return Some((head.subtask_id, primary_value(&committed, x, t)));
        }
        Some((head.subtask_id, primary_value(primary, x, t)))
    }

    fn hold_barriers(&self, x: &[f64], t: f64) -> Vec<CbfEvaluation> {
        let mut out = Vec::new();
        for g in &self.groups {
            match &g.phase {
                GroupPhase::Holding { cbf, .. } => out.push(primary_value(cbf, x, t)),
                GroupPhase::Pending => {
                    if let Some(c) = &g.until_hold {
                        out.push(primary_value(c, x, t));
                    }
                }
                GroupPhase::Done => {}
            }
        }
        out
    }

    fn barriers(&mut self, x: &[f64], t: f64) -> Barriers {
        let head = self.head_barrier(x, t);
        let steered = head.as_ref().map(|(id, e)| self.steer_toward_head(*id, e, t));
        Barriers { head, steered, holds: self.hold_barriers(x, t), secondary: secondary_value(&self.seq, x, t) }
    }

    /// Tightens the head barrier while holds are running: the state must
    /// make its way toward the head inside the held set, so that when the
    /// hold ends the head is still reachable in time. The result never
    /// exceeds `h`, so keeping it nonnegative keeps `h` nonnegative.
    fn steer_toward_head(&mut self, head_id: usize, h: &CbfEvaluation, t: f64) -> CbfEvaluation {
        let dt = self.cfg.dt;
        let mut out = h.clone();
        for g in self.groups.iter_mut() {
            let GroupPhase::Holding { start_k, end_k, credit, steer, .. } = &mut g.phase else {
                continue;
            };
            let total = (*end_k - *start_k) as f64 * dt;
            let left = (*end_k as f64 * dt - t).max(0.0);
            if total <= 0.0 || left <= 0.0 {
                continue;
            }
            let rate = 1.0 - *credit / total;
            let value = h.value - left * rate;
            let on = match steer {
                Some((id, on)) if *id == head_id => *on,
                _ => {
                    // A head whose budget does not cover the hold keeps the
                    // plain barrier.
                    let on = value >= 0.0;
                    *steer = Some((head_id, on));
                    on
                }
            };
            if on && value < out.value {
                out = CbfEvaluation { value, grad_x: h.grad_x.clone(), dt_term: h.dt_term + rate };
            }
        }
        out
    }

    fn later_primaries_hold(&self, x: &[f64], t: f64) -> bool {
        self.seq.terms.iter().skip(1).all(|term| {
            let state = &self.groups[term.group];
            let Some(s) = state.members.iter().find(|s| s.id == term.subtask_id) else {
                return true;
            };
            term.remaining(t) + robustness(x, &s.inner) / self.u_eff >= -CHECK_TOL
        })
    }

    /// Events for the current sample, then one QP, then one Euler step.
    pub fn step(&mut self) -> Result<StepRecord, ControllerError> {
        self.on_events()?;
        let t = self.time();
        let x = self.x.clone();
        let n = x.len();
        let gamma = self.cfg.alpha_gain;

        let now = self.barriers(&x, t);
        let head = now.head.clone();
        let holds = now.holds.clone();
        let secondary = now.secondary.clone();
        let relax = self.cfg.relax_secondary && secondary.is_some();
        let dim = if relax { n + 1 } else { n };
        let pad = |a: &[f64], extra: f64| {
            let mut v = a.to_vec();
            if relax {
                v.push(extra);
            }
            v
        };
        let (u_max, facets, penalty) = (self.cfg.u_max, self.cfg.facets, self.cfg.relax_penalty);
        let rows_for = |b: &Barriers, extra: &[f64]| {
            let mut problem = QpProblem::min_norm(dim);
            if relax {
                problem.hessian[dim * dim - 1] = 2.0 * penalty;
            }
            for (i, (e, relaxable)) in b.rows().into_iter().enumerate() {
                let slack = if relax && relaxable { 1.0 } else { 0.0 };
                problem.push(Row::new(pad(&e.grad_x, slack), -e.dt_term - gamma * e.value + extra[i]));
            }
            if relax {
                let mut a = vec![0.0; dim];
                a[n] = 1.0;
                problem.push(Row::new(a, 0.0));
            }
            for row in ball_rows(u_max, n, facets) {
                problem.push(Row::new(pad(&row.a, 0.0), row.b));
            }
            problem
        };

        let started = Instant::now();
        let mut extra = vec![0.0; now.rows().len()];
        let mut sol = solve(&rows_for(&now, &extra))?;
        if sol.status == QpStatus::Infeasible {
            let detail = format!(
                "x={:?} h={:?} holds={:?} b={:?} sequence={:?}",
                x,
                head.as_ref().map(|(_, e)| e.value),
                holds.iter().map(|e| e.value).collect::<Vec<_>>(),
                secondary.as_ref().map(|(e, _)| e.value),
                self.seq.ids()
            );
            return Err(ControllerError::QpInfeasible { step: self.k, t, detail });
        }
        // The rows are first-order; a step along a curved level set loses a
        // little more. Tighten any row whose barrier would drop below the
        // discrete decay bound and solve again.
        let dt = self.cfg.dt;
        for _ in 0..CORRECTION_ROUNDS {
            let next_x: Vec<f64> = x.iter().zip(&sol.u).map(|(xi, ui)| xi + ui * dt).collect();
            let next = self.barriers(&next_x, t + dt);
            let (before, after) = (now.rows(), next.rows());
            if before.len() != after.len() {
                break;
            }
            let mut changed = false;
            for (i, ((e0, relaxable), (e1, _))) in before.iter().zip(&after).enumerate() {
                let floor = (1.0 - gamma * dt).max(0.0) * e0.value;
                if !(relax && *relaxable) && e1.value < floor - CHECK_TOL {
                    extra[i] += (floor - e1.value) / dt;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            match solve(&rows_for(&now, &extra)) {
                Ok(tighter) if tighter.status != QpStatus::Infeasible => sol = tighter,
                _ => break,
            }
        }
        self.solve_ms.push(started.elapsed().as_secs_f64() * 1e3);
        let u: Vec<f64> = sol.u[..n].to_vec();
        let slack = if relax { sol.u[n].max(0.0) } else { 0.0 };

        if let Some((e, _)) = &secondary {
            if e.value >= 0.0 && !self.later_primaries_hold(&x, t) {
                self.ordering_violations += 1;
            }
        }
        let record = StepRecord {
            t,
            x: x.clone(),
            u: u.clone(),
            h: head.as_ref().map(|(_, e)| e.value),
            h_hold: holds.iter().map(|e| e.value).reduce(f64::min),
            b: secondary.as_ref().map(|(e, _)| e.value),
            active_subtask: head.as_ref().map(|(id, _)| *id),
            critical_term: secondary.as_ref().map(|(_, i)| self.seq.terms[*i].subtask_id),
            qp_status: sol.status,
            slack,
        };
        self.samples.push(Sample { t, x: x.clone(), u: u.clone() });
        if self.k < self.last {
            for (xi, ui) in self.x.iter_mut().zip(&u) {
                *xi += ui * dt;
            }
            self.cost += u.iter().map(|v| v * v).sum::<f64>() * dt;
        }
        self.k += 1;
        self.steps.push(record.clone());
        Ok(record)
    }

    /// Runs to the end of the horizon and scores the result with the monitor.
    pub fn run(mut self) -> Result<Simulation, ControllerError> {
        while !self.is_finished() {
            self.step()?;
        }
        self.finish()
    }

    fn finish(self) -> Result<Simulation, ControllerError> {
        let trajectory = Trajectory { dt: self.cfg.dt, samples: self.samples.clone() };
        let MonitorResult { satisfied, robustness, per_group } = monitor(&trajectory, &self.cfg.spec)?;
        let min_of = |f: fn(&StepRecord) -> Option<f64>| self.steps.iter().filter_map(f).reduce(f64::min);
        let relaxed: Vec<f64> = self.steps.iter().map(|s| s.slack).filter(|s| *s > 1e-9).collect();
        let report = RunReport {
            satisfied,
            robustness,
            per_group,
            total_cost: self.cost,
            steps: self.steps.len(),
            min_h: min_of(|s| s.h),
            min_h_hold: min_of(|s| s.h_hold),
            min_b: min_of(|s| s.b),
            max_input_norm: self
                .steps
                .iter()
                .map(|s| s.u.iter().map(|v| v * v).sum::<f64>().sqrt())
                .fold(0.0, f64::max),
            mean_solve_ms: if self.solve_ms.is_empty() {
                0.0
            } else {
                self.solve_ms.iter().sum::<f64>() / self.solve_ms.len() as f64
            },
            max_solve_ms: self.solve_ms.iter().copied().fold(0.0, f64::max),
            sequence_history: self.history.clone(),
            resequences: self.resequences,
            gf_resets: self.groups.iter().map(|g| g.resets).sum(),
            gf_visits: self.groups.iter().map(|g| g.visits).sum(),
            completions: self.completions.clone(),
            removal_violations: self.removal_violations,
            ordering_violations: self.ordering_violations,
            relaxed_steps: relaxed.len(),
            max_slack: relaxed.iter().copied().fold(0.0, f64::max),
            statuses: self.statuses(),
        };
        Ok(Simulation { trajectory, steps: self.steps, report })
    }
}

/// Initializes, runs to the horizon and scores the trajectory.
pub fn simulate(cfg: ScenarioConfig) -> Result<Simulation, ControllerError> {
    Controller::new(cfg)?.run()
}

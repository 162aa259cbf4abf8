use std::fmt;

use serde::Serialize;

use crate::geometry::TargetSet;

/// Membership predicate `signed_distance(x, set) ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Predicate {
    pub set: TargetSet,
}

/// Conjunction of predicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause {
    pub predicates: Vec<Predicate>,
}

/// Negation-free formula in disjunctive normal form over compact sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerFormula {
    pub clauses: Vec<Clause>,
}

impl InnerFormula {
    /// A single-predicate formula.
    pub fn set(set: TargetSet) -> Self {
        InnerFormula { clauses: vec![Clause { predicates: vec![Predicate { set }] }] }
    }

    /// One clause per set.
    pub fn any_of(sets: impl IntoIterator<Item = TargetSet>) -> Self {
        InnerFormula {
            clauses: sets
                .into_iter()
                .map(|set| Clause { predicates: vec![Predicate { set }] })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.clauses[0].predicates[0].set.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TemporalOp {
    Finally { a: f64, b: f64 },
    Globally { a: f64, b: f64 },
    FinallyGlobally { a: f64, b: f64, c: f64, d: f64 },
    GloballyFinally { a: f64, b: f64, c: f64, d: f64 },
    Until { a: f64, b: f64 },
}

impl TemporalOp {
    /// Time needed to decide the operator from time zero.
    pub fn horizon(&self) -> f64 {
        match *self {
            TemporalOp::Finally { b, .. } | TemporalOp::Globally { b, .. } | TemporalOp::Until { b, .. } => b,
            TemporalOp::FinallyGlobally { b, d, .. } | TemporalOp::GloballyFinally { b, d, .. } => b + d,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TemporalOp::Finally { .. } => "F",
            TemporalOp::Globally { .. } => "G",
            TemporalOp::FinallyGlobally { .. } => "FG",
            TemporalOp::GloballyFinally { .. } => "GF",
            TemporalOp::Until { .. } => "U",
        }
    }

    pub(crate) fn bounds_valid(&self) -> bool {
        let ok = |lo: f64, hi: f64| lo >= 0.0 && hi >= lo && hi.is_finite();
        match *self {
            TemporalOp::Finally { a, b } | TemporalOp::Globally { a, b } | TemporalOp::Until { a, b } => ok(a, b),
            TemporalOp::FinallyGlobally { a, b, c, d } | TemporalOp::GloballyFinally { a, b, c, d } => {
                ok(a, b) && ok(c, d)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subtask {
    /// Unique within a spec, numbered from 1 in order of appearance.
    pub id: usize,
    pub op: TemporalOp,
    pub inner: InnerFormula,
    /// Left operand of `Until`; `None` for every other operator.
    pub left_inner: Option<InnerFormula>,
}

/// A top-level conjunct: one subtask or a disjunction of subtasks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SubtaskGroup {
    Single(Subtask),
    Any(Vec<Subtask>),
}

impl SubtaskGroup {
    pub fn members(&self) -> &[Subtask] {
        match self {
            SubtaskGroup::Single(s) => std::slice::from_ref(s),
            SubtaskGroup::Any(v) => v,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.members().iter().map(|s| s.op.horizon()).fold(0.0, f64::max)
    }
}

/// Conjunction of subtask groups over a state space of dimension `dim`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecTree {
    pub dim: usize,
    pub groups: Vec<SubtaskGroup>,
}

impl SpecTree {
    pub fn subtasks(&self) -> impl Iterator<Item = &Subtask> {
        self.groups.iter().flat_map(|g| g.members())
    }
}

/// Mission horizon: the longest group horizon (zero for an empty spec).
pub fn horizon(spec: &SpecTree) -> f64 {
    spec.groups.iter().map(SubtaskGroup::horizon).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Canonical printer. The output re-parses to an identical tree.

fn var_name(axis: usize, dim: usize) -> String {
    if dim <= 3 {
        ["x", "y", "z"][axis].to_string()
    } else {
        format!("x{}", axis + 1)
    }
}

struct SetDisplay<'a>(&'a TargetSet);

impl fmt::Display for SetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            TargetSet::Box { lo, hi } if lo.len() == 1 => write!(f, "box(x,{},{})", lo[0], hi[0]),
            TargetSet::Box { lo, hi } if lo.len() == 2 => {
                write!(f, "rect({},{},{},{})", lo[0], hi[0], lo[1], hi[1])
            }
            TargetSet::Box { lo, hi } => {
                let n = lo.len();
                let parts: Vec<String> = (0..n)
                    .map(|k| format!("box({},{},{})", var_name(k, n), lo[k], hi[k]))
                    .collect();
                write!(f, "{}", parts.join(" & "))
            }
            TargetSet::Disc { center, radius } if center.len() == 2 => {
                write!(f, "circle(x,y,{},{},{})", center[0], center[1], radius)
            }
            TargetSet::Disc { center, radius } if center.len() == 1 => {
                write!(f, "box(x,{},{})", center[0] - radius, center[0] + radius)
            }
            TargetSet::Disc { .. } => Err(fmt::Error),
            TargetSet::Polytope(p) => {
                let parts: Vec<String> = p
                    .normals()
                    .iter()
                    .zip(p.offsets())
                    .map(|(a, b)| {
                        let coeffs: Vec<String> = a.iter().map(|v| v.to_string()).collect();
                        format!("lin({},{})", coeffs.join(","), b)
                    })
                    .collect();
                write!(f, "{}", parts.join(" & "))
            }
        }
    }
}

impl fmt::Display for InnerFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, clause) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            for (j, p) in clause.predicates.iter().enumerate() {
                if j > 0 {
                    write!(f, " & ")?;
                }
                write!(f, "{}", SetDisplay(&p.set))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Subtask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op {
            TemporalOp::Finally { a, b } => write!(f, "F[{a},{b}]({})", self.inner),
            TemporalOp::Globally { a, b } => write!(f, "G[{a},{b}]({})", self.inner),
            TemporalOp::FinallyGlobally { a, b, c, d } => write!(f, "F[{a},{b}]G[{c},{d}]({})", self.inner),
            TemporalOp::GloballyFinally { a, b, c, d } => write!(f, "G[{a},{b}]F[{c},{d}]({})", self.inner),
            TemporalOp::Until { a, b } => {
                let left = self.left_inner.as_ref().ok_or(fmt::Error)?;
                write!(f, "({left}) U[{a},{b}] ({})", self.inner)
            }
        }
    }
}

impl fmt::Display for SpecTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                write!(f, " && ")?;
            }
            match g {
                SubtaskGroup::Single(s) => write!(f, "{s}")?,
                SubtaskGroup::Any(members) => {
                    write!(f, "(")?;
                    for (j, s) in members.iter().enumerate() {
                        if j > 0 {
                            write!(f, " || ")?;
                        }
                        write!(f, "{s}")?;
                    }
                    write!(f, ")")?;
                }
            }
        }
        Ok(())
    }
}

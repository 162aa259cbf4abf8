//! Negation elimination and DNF conversion for inner (predicate-level)
//! formulas, followed by reduction of every clause to compact sets.

use serde::Serialize;
use thiserror::Error;

use super::ast::{Clause, InnerFormula, Predicate};
use crate::geometry::{GeometryError, TargetSet};

/// Largest number of DNF clauses accepted before giving up.
const MAX_CLAUSES: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalizeError {
    #[error("clause does not describe a compact set: {0}")]
    NonCompact(String),
    #[error("clause is empty (its predicates do not intersect)")]
    EmptyClause,
    #[error("negation of a disc cannot be expressed with linear predicates")]
    NegatedDisc,
    #[error("formula expands to more than {MAX_CLAUSES} clauses")]
    TooManyClauses,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Atomic proposition over the state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Atom {
    /// `x ∈ set`.
    Set(TargetSet),
    /// `normalᵀx ≤ offset`.
    Halfspace { normal: Vec<f64>, offset: f64 },
}

impl Atom {
    /// `x_axis ≤ value` in a `dim`-dimensional space.
    pub fn upper(axis: usize, dim: usize, value: f64) -> Self {
        let mut normal = vec![0.0; dim];
        normal[axis] = 1.0;
        Atom::Halfspace { normal, offset: value }
    }

    /// `x_axis ≥ value`.
    pub fn lower(axis: usize, dim: usize, value: f64) -> Self {
        let mut normal = vec![0.0; dim];
        normal[axis] = -1.0;
        Atom::Halfspace { normal, offset: -value }
    }

    fn dim(&self) -> usize {
        match self {
            Atom::Set(s) => s.dim(),
            Atom::Halfspace { normal, .. } => normal.len(),
        }
    }

    /// Closure of the complement, as a disjunction of atoms.
    fn negate(&self) -> Result<Vec<Atom>, NormalizeError> {
        match self {
            Atom::Halfspace { normal, offset } => Ok(vec![Atom::Halfspace {
                normal: normal.iter().map(|v| -v).collect(),
                offset: -offset,
            }]),
            Atom::Set(TargetSet::Box { lo, hi }) => {
                let n = lo.len();
                let mut out = Vec::with_capacity(2 * n);
                for k in 0..n {
                    out.push(Atom::upper(k, n, lo[k]));
                    out.push(Atom::lower(k, n, hi[k]));
                }
                Ok(out)
            }
            Atom::Set(TargetSet::Polytope(p)) => Ok(p
                .normals()
                .iter()
                .zip(p.offsets())
                .map(|(a, b)| Atom::Halfspace { normal: a.iter().map(|v| -v).collect(), offset: -b })
                .collect()),
            Atom::Set(TargetSet::Disc { .. }) => Err(NormalizeError::NegatedDisc),
        }
    }
}

/// Boolean combination of atoms, possibly with negations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BoolFormula {
    Atom(Atom),
    Not(Box<BoolFormula>),
    And(Vec<BoolFormula>),
    Or(Vec<BoolFormula>),
}

impl BoolFormula {
    pub fn atom(a: Atom) -> Self {
        BoolFormula::Atom(a)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: BoolFormula) -> Self {
        BoolFormula::Not(Box::new(f))
    }
}

/// Negation-free DNF: a disjunction of conjunctions of atoms.
///
/// Negations are pushed to the atoms (De Morgan), where a negated
/// halfspace flips its inequality and a negated box or polytope becomes a
/// disjunction of the flipped facet halfspaces. Boundaries are kept closed.
pub fn to_dnf(formula: &BoolFormula) -> Result<Vec<Vec<Atom>>, NormalizeError> {
    dnf(formula, false)
}

fn dnf(f: &BoolFormula, negated: bool) -> Result<Vec<Vec<Atom>>, NormalizeError> {
    match (f, negated) {
        (BoolFormula::Atom(a), false) => Ok(vec![vec![a.clone()]]),
        (BoolFormula::Atom(a), true) => Ok(a.negate()?.into_iter().map(|a| vec![a]).collect()),
        (BoolFormula::Not(inner), n) => dnf(inner, !n),
        (BoolFormula::Or(parts), false) | (BoolFormula::And(parts), true) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(dnf(p, negated)?);
                if out.len() > MAX_CLAUSES {
                    return Err(NormalizeError::TooManyClauses);
                }
            }
            Ok(out)
        }
        (BoolFormula::And(parts), false) | (BoolFormula::Or(parts), true) => {
            let mut acc: Vec<Vec<Atom>> = vec![Vec::new()];
            for p in parts {
                let rhs = dnf(p, negated)?;
                if acc.len() * rhs.len() > MAX_CLAUSES {
                    return Err(NormalizeError::TooManyClauses);
                }
                let mut next = Vec::with_capacity(acc.len() * rhs.len());
                for l in &acc {
                    for r in &rhs {
                        let mut c = l.clone();
                        c.extend(r.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
    }
}

/// Negation-free DNF whose clauses are conjunctions of compact sets.
///
/// Each clause is reduced as follows: axis-aligned halfspaces and boxes are
/// intersected into one box, general halfspaces and polytopes into one
/// polytope, discs are kept. A clause whose linear part is unbounded is
/// clipped to `bounds` when supplied, or to the bounding box of one of its
/// discs (which leaves the intersection unchanged); otherwise it is
/// rejected as non-compact.
pub fn normalize(formula: &BoolFormula, dim: usize, bounds: Option<&TargetSet>) -> Result<InnerFormula, NormalizeError> {
    let clauses = to_dnf(formula)?;
    let mut out = Vec::with_capacity(clauses.len());
    for clause in &clauses {
        out.push(compact_clause(clause, dim, bounds)?);
    }
    Ok(InnerFormula { clauses: out })
}

pub(crate) fn compact_clause(atoms: &[Atom], dim: usize, bounds: Option<&TargetSet>) -> Result<Clause, NormalizeError> {
    let mut lo = vec![f64::NEG_INFINITY; dim];
    let mut hi = vec![f64::INFINITY; dim];
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut discs: Vec<TargetSet> = Vec::new();
    let mut has_interval = false;

    for atom in atoms {
        if atom.dim() != dim {
            return Err(NormalizeError::DimensionMismatch { expected: dim, got: atom.dim() });
        }
        match atom {
            Atom::Set(TargetSet::Box { lo: l, hi: h }) => {
                has_interval = true;
                for k in 0..dim {
                    lo[k] = lo[k].max(l[k]);
                    hi[k] = hi[k].min(h[k]);
                }
            }
            Atom::Set(TargetSet::Polytope(p)) => {
                rows.extend(p.normals().iter().cloned().zip(p.offsets().iter().copied()));
            }
            Atom::Set(d @ TargetSet::Disc { .. }) => discs.push(d.clone()),
            Atom::Halfspace { normal, offset } => match axis_of(normal) {
                Some((k, s)) if s > 0.0 => {
                    has_interval = true;
                    hi[k] = hi[k].min(offset / s);
                }
                Some((k, s)) => {
                    has_interval = true;
                    lo[k] = lo[k].max(offset / s);
                }
                None => rows.push((normal.clone(), *offset)),
            },
        }
    }
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Err(NormalizeError::EmptyClause);
    }

    let clip = |lo: &mut [f64], hi: &mut [f64]| -> Result<(), NormalizeError> {
        let (cl, ch) = match (bounds, discs.first()) {
            (Some(TargetSet::Box { lo, hi }), _) => (lo.clone(), hi.clone()),
            (Some(other), _) => {
                return Err(NormalizeError::NonCompact(format!("bounding region must be a box, got {other:?}")))
            }
            (None, Some(TargetSet::Disc { center, radius })) => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            _ => return Err(NormalizeError::NonCompact("linear predicates leave some direction unbounded".into())),
        };
        for k in 0..dim {
            lo[k] = lo[k].max(cl[k]);
            hi[k] = hi[k].min(ch[k]);
        }
        Ok(())
    };

    let mut predicates = Vec::new();
    if !rows.is_empty() {
        let mut all = rows.clone();
        push_interval_rows(&mut all, &lo, &hi);
        let set = match TargetSet::polytope(all.iter().map(|r| r.0.clone()).collect(), all.iter().map(|r| r.1).collect()) {
            Ok(s) => s,
            Err(GeometryError::UnboundedPolytope) => {
                let (mut l2, mut h2) = (lo.clone(), hi.clone());
                clip(&mut l2, &mut h2)?;
                let mut all = rows.clone();
                push_interval_rows(&mut all, &l2, &h2);
                TargetSet::polytope(all.iter().map(|r| r.0.clone()).collect(), all.iter().map(|r| r.1).collect())
                    .map_err(empty_or)?
            }
            Err(e) => return Err(empty_or(e)),
        };
        predicates.push(Predicate { set });
    } else if has_interval {
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            clip(&mut lo, &mut hi)?;
        }
        let set = TargetSet::boxed(lo, hi).map_err(empty_or)?;
        predicates.push(Predicate { set });
    }
    predicates.extend(discs.into_iter().map(|set| Predicate { set }));
    if predicates.is_empty() {
        return Err(NormalizeError::NonCompact("empty conjunction".into()));
    }
    check_pairwise_intersection(&predicates)?;
    Ok(Clause { predicates })
}

fn empty_or(e: GeometryError) -> NormalizeError {
    match e {
        GeometryError::EmptyBox { .. } | GeometryError::EmptyPolytope => NormalizeError::EmptyClause,
        other => NormalizeError::Geometry(other),
    }
}

fn push_interval_rows(rows: &mut Vec<(Vec<f64>, f64)>, lo: &[f64], hi: &[f64]) {
    let dim = lo.len();
    for k in 0..dim {
        if lo[k].is_finite() {
            let mut a = vec![0.0; dim];
            a[k] = -1.0;
            rows.push((a, -lo[k]));
        }
        if hi[k].is_finite() {
            let mut a = vec![0.0; dim];
            a[k] = 1.0;
            rows.push((a, hi[k]));
        }
    }
}

/// `(axis, coefficient)` if the normal has exactly one nonzero entry.
fn axis_of(normal: &[f64]) -> Option<(usize, f64)> {
    let mut found = None;
    for (k, &v) in normal.iter().enumerate() {
        if v != 0.0 {
            if found.is_some() {
                return None;
            }
            found = Some((k, v));
        }
    }
    found
}

/// Rejects clauses with two predicates that provably do not intersect.
fn check_pairwise_intersection(preds: &[Predicate]) -> Result<(), NormalizeError> {
    for (i, a) in preds.iter().enumerate() {
        for b in &preds[i + 1..] {
            let disjoint = match (&a.set, &b.set) {
                (TargetSet::Disc { center, radius }, other) | (other, TargetSet::Disc { center, radius }) => {
                    other.distance(center) > *radius + 1e-12
                }
                _ => false,
            };
            if disjoint {
                return Err(NormalizeError::EmptyClause);
            }
        }
    }
    Ok(())
}

//! Control synthesis for signal temporal logic tasks on a bounded-input
//! single integrator, using a primary barrier function per subtask and a
//! secondary, sequence-aware barrier function solved as a small QP at every
//! time step.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod smooth;
pub mod qp;
pub mod geometry;
pub mod stl;
pub mod cbf;
pub mod sequencer;
pub mod controller;

pub use geometry::{diameter, ordered_set_distance, signed_distance, travel_times, GeometryError, TargetSet, TravelTimes};
pub use qp::{QpError, QpProblem, QpSolution, QpStatus, Row};
pub use cbf::{primary_disjunction, primary_value, secondary_candidates, secondary_value, CbfEvaluation, PrimaryCbf};
pub use controller::{
    simulate, Controller, ControllerError, Phase, RunReport, ScenarioConfig, SequenceEvent, Simulation, StepRecord,
    SubtaskStatus,
};
pub use sequencer::{enumerate_alternatives, select, SequenceError, SequenceTerm, SubtaskSequence};
pub use stl::{horizon, monitor, parse_spec, InnerFormula, SpecTree, StlError, Subtask, SubtaskGroup, TemporalOp, Trajectory};

//! Signal temporal logic front end: syntax tree, parser, normalization to
//! negation-free DNF over compact sets, and the exact offline monitor.

mod ast;
mod monitor;
mod normalize;
mod parse;
mod robustness;

pub use ast::{horizon, Clause, InnerFormula, Predicate, SpecTree, Subtask, SubtaskGroup, TemporalOp};
pub use monitor::{
    monitor, required_samples, subtask_robustness, window_end, window_start, MonitorError, MonitorResult, Sample,
    Trajectory,
};
pub use normalize::{normalize, to_dnf, Atom, BoolFormula, NormalizeError};
pub use parse::{parse_spec, Pos, StlError};
pub use robustness::{robustness, smooth_robustness};

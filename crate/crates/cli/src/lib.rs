//! Scenario files, trajectory CSV and the subcommands behind the `stlcbf`
//! binary. Every command writes to a caller-supplied sink and returns its
//! exit code, so the binary stays a thin argument parser.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use stlcbf_core::sequencer::evaluate_all;
use stlcbf_core::{
    monitor, parse_spec, simulate, ControllerError, RunReport, ScenarioConfig, SequenceError, Simulation, StepRecord,
    StlError, TemporalOp, Trajectory,
};
use thiserror::Error;

pub const EXIT_SATISFIED: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_NO_SEQUENCE: i32 = 3;
pub const EXIT_QP_INFEASIBLE: i32 = 4;

/// Reference figures printed next to the case-study benchmark row.
pub const REFERENCE_COST: f64 = 20.29;
pub const REFERENCE_SOLVE_MS: f64 = 0.013;
pub const REFERENCE_MIQP_COST: f64 = 17.03;
pub const REFERENCE_NLP_COST: f64 = 14.65;

/// Scenarios shipped with the binary, addressable by name.
pub const BUNDLED: [(&str, &str); 6] = [
    ("conflict", include_str!("../scenarios/conflict.json")),
    ("recurrence", include_str!("../scenarios/recurrence.json")),
    ("disjunction", include_str!("../scenarios/disjunction.json")),
    ("case_study", include_str!("../scenarios/case_study.json")),
    ("example", include_str!("../scenarios/example.json")),
    ("infeasible", include_str!("../scenarios/infeasible.json")),
];

/// Bundled scenarios that `bench` runs and expects to satisfy.
pub const SUITE: [&str; 4] = ["conflict", "recurrence", "disjunction", "case_study"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("specification error: {0}")]
    Spec(#[from] StlError),
    #[error("trajectory CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    BadInput(String),
    #[error("no scenario file or bundled scenario named `{0}`")]
    UnknownScenario(String),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Monitor(#[from] stlcbf_core::stl::MonitorError),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Controller(e) => controller_exit_code(e),
            _ => EXIT_BAD_INPUT,
        }
    }
}

pub fn controller_exit_code(e: &ControllerError) -> i32 {
    match e {
        ControllerError::Sequence(SequenceError::NoFeasibleSequence { .. }) | ControllerError::InitiallyInfeasible { .. } => {
            EXIT_NO_SEQUENCE
        }
        ControllerError::QpInfeasible { .. } | ControllerError::Qp(_) => EXIT_QP_INFEASIBLE,
        _ => EXIT_BAD_INPUT,
    }
}

/// On-disk scenario description. Omitted tuning fields take the
/// controller defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    pub spec: String,
    pub x0: Vec<f64>,
    pub u_max: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub alpha_gain: Option<f64>,
    #[serde(default)]
    pub facets: Option<usize>,
    #[serde(default)]
    pub margin: Option<f64>,
    #[serde(default)]
    pub relax_secondary: Option<bool>,
    #[serde(default)]
    pub relax_penalty: Option<f64>,
    /// Subtask ids forced as the chosen member of their disjunction.
    #[serde(default)]
    pub pin: Vec<usize>,
}

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub beta: Option<f64>,
    pub alpha_gain: Option<f64>,
    pub facets: Option<usize>,
    pub relax: bool,
}

impl ScenarioFile {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|source| CliError::Json { path: origin.to_string(), source })
    }

    pub fn bundled(name: &str) -> Option<Self> {
        BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, text)| Self::from_json(text, n).expect("bundled scenarios parse"))
    }

    /// Reads `arg` as a path, falling back to a bundled scenario name.
    pub fn load(arg: &str) -> Result<Self, CliError> {
        let path = Path::new(arg);
        if path.exists() {
            let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
            return Self::from_json(&text, arg);
        }
        Self::bundled(arg).ok_or_else(|| CliError::UnknownScenario(arg.to_string()))
    }

    pub fn config(&self, o: &Overrides) -> Result<ScenarioConfig, CliError> {
        let spec = parse_spec(&self.spec)?;
        let mut cfg = ScenarioConfig::new(spec, self.x0.clone(), self.u_max);
        let pick = |cli: Option<f64>, file: Option<f64>, default: f64| cli.or(file).unwrap_or(default);
        cfg.dt = pick(o.dt, self.dt, cfg.dt);
        cfg.beta = pick(o.beta, self.beta, cfg.beta);
        cfg.alpha_gain = pick(o.alpha_gain, self.alpha_gain, cfg.alpha_gain);
        cfg.facets = o.facets.or(self.facets).unwrap_or(cfg.facets);
        cfg.margin = self.margin.unwrap_or(cfg.margin);
        cfg.relax_secondary = o.relax || self.relax_secondary.unwrap_or(false);
        cfg.relax_penalty = self.relax_penalty.unwrap_or(cfg.relax_penalty);
        cfg.pin = self.pin.clone();
        cfg.validate()?;
        Ok(cfg)
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes one row per step: `t, x1..xn, u1..un, h, h_hold, b,
/// active_subtask, critical_term, qp_status, slack`.
pub fn write_trajectory_csv<W: Write>(out: W, steps: &[StepRecord]) -> Result<(), CliError> {
    let n = steps.first().map_or(0, |s| s.x.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=n).map(|i| format!("u{i}")));
    header.extend(["h", "h_hold", "b", "active_subtask", "critical_term", "qp_status", "slack"].map(String::from));
    w.write_record(&header)?;
    for s in steps {
        let mut row = vec![s.t.to_string()];
        row.extend(s.x.iter().map(f64::to_string));
        row.extend(s.u.iter().map(f64::to_string));
        row.extend([opt(s.h), opt(s.h_hold), opt(s.b), opt(s.active_subtask), opt(s.critical_term)]);
        row.push(format!("{:?}", s.qp_status));
        row.push(s.slack.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the `t` and `x1..xn` columns of a trajectory CSV; other columns
/// are ignored.
pub fn read_trajectory_csv(text: &str) -> Result<Trajectory, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let t_col = find("t").ok_or_else(|| CliError::BadInput("missing column `t`".into()))?;
    let x_cols: Vec<usize> = (1..).map_while(|i| find(&format!("x{i}"))).collect();
    if x_cols.is_empty() {
        return Err(CliError::BadInput("missing column `x1`".into()));
    }
    let num = |rec: &csv::StringRecord, c: usize, line: usize| {
        rec.get(c)
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| CliError::BadInput(format!("row {line}: column `{}` is not a number", &headers[c])))
    };
    let mut samples = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let x = x_cols.iter().map(|&c| num(&rec, c, i + 2)).collect::<Result<Vec<_>, _>>()?;
        samples.push(stlcbf_core::stl::Sample { t: num(&rec, t_col, i + 2)?, u: vec![0.0; x.len()], x });
    }
    let dt = match samples.as_slice() {
        [] => return Err(CliError::BadInput("trajectory has no rows".into())),
        [_] => 1.0,
        [a, b, ..] => b.t - a.t,
    };
    Ok(Trajectory { dt, samples })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Write { path: path.into(), source })
}

/// Runs a scenario, optionally saving the trajectory and report. Exit 0
/// iff the monitor accepts the trajectory.
pub fn run_command(
    scenario: &ScenarioFile,
    overrides: &Overrides,
    out: Option<&Path>,
    report: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let cfg = scenario.config(overrides)?;
    let started = Instant::now();
    let sim = simulate(cfg)?;
    let wall = started.elapsed();
    if let Some(path) = out {
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &sim.steps)?;
        write_file(path, &buf)?;
    }
    if let Some(path) = report {
        let json = serde_json::to_vec_pretty(&sim.report).map_err(|source| CliError::Json { path: path.display().to_string(), source })?;
        write_file(path, &json)?;
    }
    stdout.write_all(summary(&scenario.name, &sim, wall.as_secs_f64()).as_bytes())?;
    Ok(if sim.report.satisfied { EXIT_SATISFIED } else { EXIT_VIOLATED })
}

fn summary(name: &str, sim: &Simulation, wall_s: f64) -> String {
    let r: &RunReport = &sim.report;
    let fmt_opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6}"));
    let mut s = String::new();
    let verdict = if r.satisfied { "satisfied" } else { "VIOLATED" };
    let _ = writeln!(s, "{name}: {verdict} (robustness {:.6})", r.robustness);
    let _ = writeln!(s, "  steps {}  cost {:.4}  max |u| {:.4}", r.steps, r.total_cost, r.max_input_norm);
    let _ = writeln!(s, "  min h {}  min hold {}  min b {}", fmt_opt(r.min_h), fmt_opt(r.min_h_hold), fmt_opt(r.min_b));
    let _ = writeln!(s, "  solve mean {:.4} ms  max {:.4} ms  wall {:.3} s", r.mean_solve_ms, r.max_solve_ms, wall_s);
    let _ = writeln!(s, "  resequences {}  recurrence resets {}  visits {}", r.resequences, r.gf_resets, r.gf_visits);
    for e in &r.sequence_history {
        let _ = writeln!(s, "  t={:>7.2}  {:<14} {:?}", e.t, e.reason, e.order);
    }
    s
}

/// Scores an existing trajectory against `spec_text`. Exit 0 iff the
/// robustness is nonnegative.
pub fn check_command(traj_csv: &str, spec_text: &str, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let spec = parse_spec(spec_text)?;
    let traj = read_trajectory_csv(traj_csv)?;
    let result = monitor(&traj, &spec)?;
    writeln!(stdout, "robustness {:.9}", result.robustness)?;
    for (g, rho) in result.per_group.iter().enumerate() {
        writeln!(stdout, "  group {}: {:.9}", g + 1, rho)?;
    }
    writeln!(stdout, "{}", if result.satisfied { "satisfied" } else { "violated" })?;
    Ok(if result.satisfied { EXIT_SATISFIED } else { EXIT_VIOLATED })
}

/// Lists every candidate order at the initial state. Exit 3 when none is
/// feasible.
pub fn sequences_command(scenario: &ScenarioFile, overrides: &Overrides, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = scenario.config(overrides)?;
    let ctl = match stlcbf_core::Controller::new(cfg.clone()) {
        Ok(c) => Some(c),
        Err(ControllerError::Sequence(SequenceError::NoFeasibleSequence { .. }))
        | Err(ControllerError::InitiallyInfeasible { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let alternatives = stlcbf_core::enumerate_alternatives(&cfg.spec).map_err(ControllerError::from)?;
    let u_eff = stlcbf_core::qp::ball_inradius(cfg.u_max, cfg.spec.dim, cfg.facets);
    let reports = evaluate_all(&alternatives, &cfg.x0, 0.0, u_eff);
    writeln!(stdout, "{} alternative(s), {} order(s) at x0={:?}", alternatives.len(), reports.len(), cfg.x0)?;
    for r in &reports {
        let label: Vec<String> = r.order.iter().zip(&r.clauses).map(|(id, c)| format!("{id}.{c}")).collect();
        writeln!(
            stdout,
            "  [{}] {:<4} total slack {:>9.4}",
            label.join(" "),
            if r.feasible { "ok" } else { "miss" },
            r.total_slack
        )?;
        let cols = |v: &[f64]| v.iter().map(|x| format!("{x:8.3}")).collect::<Vec<_>>().join(" ");
        writeln!(stdout, "      required  {}", cols(&r.required))?;
        writeln!(stdout, "      remaining {}", cols(&r.remaining))?;
        writeln!(stdout, "      slack     {}", cols(&r.slack))?;
    }
    let recurring: Vec<usize> = cfg
        .spec
        .subtasks()
        .filter(|s| matches!(s.op, TemporalOp::GloballyFinally { .. }))
        .map(|s| s.id)
        .collect();
    match ctl {
        Some(ctl) => {
            writeln!(stdout, "selected {:?}", ctl.sequence().ids())?;
            for id in recurring {
                writeln!(stdout, "  subtask {id} resequences at runtime")?;
            }
            Ok(EXIT_SATISFIED)
        }
        None => {
            writeln!(stdout, "no feasible order")?;
            Ok(EXIT_NO_SEQUENCE)
        }
    }
}

/// One row of the benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub satisfied: bool,
    pub cost: f64,
    pub mean_solve_ms: f64,
    pub wall_s: f64,
    pub resequences: usize,
}

/// Runs one bundled scenario for the benchmark table.
pub fn bench_row(name: &str, overrides: &Overrides) -> Result<BenchRow, CliError> {
    let scenario = ScenarioFile::bundled(name).ok_or_else(|| CliError::UnknownScenario(name.into()))?;
    let cfg = scenario.config(overrides)?;
    let started = Instant::now();
    let sim = simulate(cfg)?;
    Ok(BenchRow {
        name: name.into(),
        satisfied: sim.report.satisfied,
        cost: sim.report.total_cost,
        mean_solve_ms: sim.report.mean_solve_ms,
        wall_s: started.elapsed().as_secs_f64(),
        resequences: sim.report.resequences,
    })
}

/// Runs the bundled suite, then `trials` case-study runs from starts
/// jittered by up to `jitter` per axis. Exit 0 iff every suite scenario
/// is satisfied; jittered runs are reported but do not affect the code.
pub fn bench_command(overrides: &Overrides, trials: usize, jitter: f64, seed: u64, stdout: &mut dyn Write) -> Result<i32, CliError> {
    writeln!(stdout, "{:<12} {:>9} {:>10} {:>13} {:>9} {:>6}", "scenario", "satisfied", "cost", "solve ms/step", "wall s", "reseq")?;
    let mut all = true;
    for name in SUITE {
        match bench_row(name, overrides) {
            Ok(r) => {
                all &= r.satisfied;
                writeln!(
                    stdout,
                    "{:<12} {:>9} {:>10.4} {:>13.5} {:>9.4} {:>6}",
                    r.name, r.satisfied, r.cost, r.mean_solve_ms, r.wall_s, r.resequences
                )?;
                if name == "case_study" {
                    writeln!(
                        stdout,
                        "{:<12} reference cost {REFERENCE_COST} at {REFERENCE_SOLVE_MS} ms/step; \
                         other methods: MIQP {REFERENCE_MIQP_COST}, NLP {REFERENCE_NLP_COST} (not run)",
                        ""
                    )?;
                }
            }
            Err(e) => {
                all = false;
                writeln!(stdout, "{name:<12} error: {e}")?;
            }
        }
    }
    if trials > 0 {
        let base = ScenarioFile::bundled("case_study").expect("bundled");
        let mut rng = StdRng::seed_from_u64(seed);
        let (mut sat, mut failed) = (0, 0);
        for _ in 0..trials {
            let mut s = base.clone();
            for v in s.x0.iter_mut() {
                *v += rng.random_range(-jitter..=jitter);
            }
            match s.config(overrides).and_then(|c| simulate(c).map_err(CliError::from)) {
                Ok(sim) if sim.report.satisfied => sat += 1,
                Ok(_) => {}
                Err(_) => failed += 1,
            }
        }
        writeln!(stdout, "case_study jittered starts (seed {seed}): {sat}/{trials} satisfied, {failed} rejected or infeasible")?;
    }
    Ok(if all { EXIT_SATISFIED } else { EXIT_VIOLATED })
}

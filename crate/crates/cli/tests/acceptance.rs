//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::f64::consts::TAU;
use std::process::{Command, ExitCode};
use std::time::Instant;

use oracle::{central_diff, feasible_within, grid_minimizer, norm, sub};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use stlcbf_cli::{ScenarioFile, BUNDLED, EXIT_NO_SEQUENCE};
use stlcbf_core::qp::{kkt_residual, solve};
use stlcbf_core::sequencer::feasible;
use stlcbf_core::smooth::{smooth_max, smooth_min};
use stlcbf_core::stl::{smooth_robustness, Clause, Predicate};
use stlcbf_core::{
    diameter, primary_value, secondary_candidates, secondary_value, simulate, InnerFormula, PrimaryCbf, QpProblem,
    QpStatus, Row, SequenceTerm, Simulation, SubtaskSequence, TargetSet,
};

const SEED: u64 = 0x5eed_2024;

type Outcome = Result<String, String>;

fn run(name: &str) -> (Simulation, f64) {
    run_pinned(name, &[])
}

fn run_pinned(name: &str, pin: &[usize]) -> (Simulation, f64) {
    let mut cfg = ScenarioFile::bundled(name).expect("bundled").config(&Default::default()).expect("valid scenario");
    cfg.pin = pin.to_vec();
    let started = Instant::now();
    let sim = simulate(cfg).expect("scenario runs");
    (sim, started.elapsed().as_secs_f64())
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

fn conflict() -> Outcome {
    let (sim, wall) = run("conflict");
    let r = &sim.report;
    let detail = format!("robustness {:.4}, groups {:?}, {wall:.3} s", r.robustness, r.per_group);
    ensure(r.satisfied && r.robustness >= 0.0 && r.per_group.iter().all(|g| *g >= 0.0) && wall < 1.0, detail)
}

fn recurrence() -> Outcome {
    let (sim, wall) = run("recurrence");
    let r = &sim.report;
    let logged = r.sequence_history.iter().filter(|e| e.reason == "recurrence").count();
    let detail = format!("robustness {:.4}, resets {}, resequences logged {logged}, {wall:.3} s", r.robustness, r.gf_resets);
    ensure(r.satisfied && r.gf_resets >= 2 && logged >= 1 && logged == r.resequences && wall < 2.0, detail)
}

fn disjunction() -> Outcome {
    let (free, _) = run("disjunction");
    let spec = &ScenarioFile::bundled("disjunction").unwrap().config(&Default::default()).unwrap().spec;
    let members: Vec<usize> = spec
        .groups
        .iter()
        .filter(|g| g.members().len() > 1)
        .flat_map(|g| g.members().iter().map(|m| m.id).collect::<Vec<_>>())
        .collect();
    let chosen = free.report.sequence_history[0].order.iter().copied().find(|id| members.contains(id));
    let Some(chosen) = chosen else {
        return Err(format!("no disjunct in the initial order {:?}", free.report.sequence_history[0].order));
    };
    let other: Vec<usize> = members.iter().copied().filter(|id| *id != chosen).collect();
    let (pinned, _) = run_pinned("disjunction", &other);
    let detail = format!(
        "branch {chosen} cost {:.4} vs pinned {other:?} cost {:.4}",
        free.report.total_cost, pinned.report.total_cost
    );
    ensure(free.report.satisfied && free.report.total_cost < pinned.report.total_cost, detail)
}

fn case_study() -> Outcome {
    let (sim, wall) = run("case_study");
    let r = &sim.report;
    let times: Vec<f64> = r.sequence_history.iter().filter(|e| e.reason == "recurrence").map(|e| e.t).collect();
    let detail = format!(
        "cost {:.4}, resequences at {times:?}, mean solve {:.4} ms, {wall:.3} s",
        r.total_cost, r.mean_solve_ms
    );
    let timed = times.len() == 1 && (times[0] - 11.0).abs() <= 3.0;
    ensure(
        r.satisfied
            && (15.0..=30.0).contains(&r.total_cost)
            && r.resequences == 1
            && timed
            && r.mean_solve_ms < 1.0
            && wall < 10.0,
        detail,
    )
}

fn invariance() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut lines = Vec::new();
    for (name, _) in BUNDLED {
        let cfg = ScenarioFile::bundled(name).unwrap().config(&Default::default()).unwrap();
        let Ok(sim) = simulate(cfg) else { continue };
        let r = &sim.report;
        let m = [r.min_h, r.min_h_hold, r.min_b].into_iter().flatten().fold(f64::INFINITY, f64::min);
        worst = worst.min(m);
        lines.push(format!("{name} {m:.2e}"));
    }
    ensure(worst >= -1e-6, lines.join(", "))
}

fn soundness(rng: &mut StdRng) -> Outcome {
    let mut failures = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..8);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for beta in [1.0, 10.0, 100.0] {
            if smooth_min(&v, beta) > lo || smooth_max(&v, beta) > hi {
                failures += 1;
            }
        }
    }
    ensure(failures == 0, format!("{failures} failures in 3000 checks"))
}

fn random_set(rng: &mut StdRng) -> TargetSet {
    if rng.random_bool(0.5) {
        let c = vec![rng.random_range(1.0..19.0), rng.random_range(1.0..19.0)];
        TargetSet::disc(c, rng.random_range(0.2..2.0)).unwrap()
    } else {
        let lo = vec![rng.random_range(0.0..18.0), rng.random_range(0.0..18.0)];
        let hi = vec![lo[0] + rng.random_range(0.2..2.0), lo[1] + rng.random_range(0.2..2.0)];
        TargetSet::boxed(lo, hi).unwrap()
    }
}

fn random_point(rng: &mut StdRng) -> Vec<f64> {
    vec![rng.random_range(-2.0..22.0), rng.random_range(-2.0..22.0)]
}

fn point_in(set: &TargetSet, rng: &mut StdRng) -> Vec<f64> {
    match set {
        TargetSet::Disc { center, radius } => {
            let a = rng.random_range(0.0..TAU);
            let r = radius * rng.random_range(0.0..1.0f64).sqrt();
            vec![center[0] + r * a.cos(), center[1] + r * a.sin()]
        }
        TargetSet::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| rng.random_range(*l..=*h)).collect(),
        TargetSet::Polytope(_) => unreachable!(),
    }
}

fn term(id: usize, target: TargetSet, remaining: f64, dwell: f64) -> SequenceTerm {
    SequenceTerm {
        group: id - 1,
        subtask_id: id,
        clause: 0,
        crossing: diameter(&target),
        target,
        remaining0: remaining,
        t_ref: 0.0,
        dwell,
        open: 0.0,
    }
}

fn removal_feasibility(rng: &mut StdRng) -> Outcome {
    let (mut cases, mut checks, mut failures) = (0, 0, 0);
    while cases < 500 {
        let k = rng.random_range(1..=5);
        let mut terms: Vec<SequenceTerm> = (0..k)
            .map(|i| {
                let dwell = if rng.random_bool(0.5) { rng.random_range(0.0..5.0) } else { 0.0 };
                term(i + 1, random_set(rng), rng.random_range(0.0..6.0), dwell)
            })
            .collect();
        let x = random_point(rng);
        let u = rng.random_range(0.5..3.0);
        if terms[0].target.contains(&x) {
            continue;
        }
        cases += 1;
        let need = feasible(&terms, &x, 0.0, u).required;
        for (t, q) in terms.iter_mut().zip(need) {
            t.remaining0 += q;
        }
        if feasible(&terms, &x, 0.0, u).min_slack() < -1e-9 {
            failures += 1;
        }
        let arrival = terms[0].target.distance(&x) / u;
        for mask in 1u32..(1 << k) - 1 {
            let kept: Vec<SequenceTerm> = (0..k).filter(|i| mask & (1 << i) == 0).map(|i| terms[i].clone()).collect();
            if mask & 1 == 1 {
                for _ in 0..8 {
                    let y = point_in(&terms[0].target, rng);
                    checks += 1;
                    if feasible(&kept, &y, arrival, u).min_slack() < -1e-9 {
                        failures += 1;
                    }
                }
            } else {
                checks += 1;
                if feasible(&kept, &x, 0.0, u).min_slack() < -1e-9 {
                    failures += 1;
                }
            }
        }
    }
    ensure(failures == 0, format!("{failures} failures over {cases} sequences, {checks} removals"))
}

fn random_qp(rng: &mut StdRng) -> QpProblem {
    let dim = rng.random_range(1..=2);
    let anchor: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let noise: Vec<f64> = (0..dim * dim).map(|_| rng.random_range(-0.3..0.3)).collect();
    let mut hessian = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            hessian[i * dim + j] = if i == j { 1.0 } else { 0.0 } + 0.5 * (noise[i * dim + j] + noise[j * dim + i]);
        }
    }
    let linear = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
    let mut rows = Vec::new();
    for _ in 0..rng.random_range(1..=6) {
        let a: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if norm(&a) < 0.1 {
            continue;
        }
        let at: f64 = a.iter().zip(&anchor).map(|(x, y)| x * y).sum();
        rows.push(Row::new(a, at - rng.random_range(0.05..2.0)));
    }
    QpProblem { dim, hessian, linear, rows }
}

fn qp_oracle(rng: &mut StdRng) -> Outcome {
    let (mut worst_gap, mut worst_kkt, mut failures) = (0.0f64, 0.0f64, 0);
    for _ in 0..500 {
        let p = random_qp(rng);
        let Ok(sol) = solve(&p) else {
            failures += 1;
            continue;
        };
        let oracle = grid_minimizer(&p).expect("anchor is strictly feasible");
        let gap = sol.u.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let kkt = kkt_residual(&p, &sol.u, &sol.multipliers).max(sol.kkt_residual);
        worst_gap = worst_gap.max(gap);
        worst_kkt = worst_kkt.max(kkt);
        if sol.status != QpStatus::Optimal || !feasible_within(&p, &sol.u, 1e-12) || gap > 1e-3 || kkt > 1e-8 {
            failures += 1;
        }
    }
    ensure(failures == 0, format!("{failures} failures, max gap {worst_gap:.2e}, max KKT {worst_kkt:.2e}"))
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = norm(a).max(norm(b));
    let err = norm(&sub(a, b));
    if scale > 1e-3 { err / scale } else { err }
}

/// True when `grad` is continuous around `x`, so finite differences apply.
fn smooth_near(x: &[f64], grad: &dyn Fn(&[f64]) -> Vec<f64>) -> bool {
    let g = grad(x);
    (0..x.len()).all(|i| {
        [-1e-4, 1e-4].iter().all(|d| {
            let mut y = x.to_vec();
            y[i] += d;
            norm(&sub(&grad(&y), &g)) < 0.05
        })
    })
}

fn random_inner(rng: &mut StdRng) -> InnerFormula {
    let clauses = (0..rng.random_range(1..4))
        .map(|_| Clause { predicates: (0..rng.random_range(1..3)).map(|_| Predicate { set: random_set(rng) }).collect() })
        .collect();
    InnerFormula { clauses }
}

fn random_sequence(rng: &mut StdRng) -> SubtaskSequence {
    let u = rng.random_range(0.5..3.0);
    let terms = (0..rng.random_range(2..5))
        .map(|i| {
            let mut t = term(i + 1, random_set(rng), rng.random_range(0.0..60.0), 0.0);
            t.crossing = 0.0;
            t
        })
        .collect();
    SubtaskSequence::new(terms, u)
}

/// Draws states until `check` accepts `want` non-degenerate ones; returns
/// the worst relative error.
fn gradient_cases(rng: &mut StdRng, want: usize, mut check: impl FnMut(&mut StdRng) -> Option<f64>) -> (usize, f64) {
    let (mut done, mut worst, mut tries) = (0, 0.0f64, 0);
    while done < want && tries < 100 * want {
        tries += 1;
        if let Some(e) = check(rng) {
            done += 1;
            worst = worst.max(e);
        }
    }
    (done, worst)
}

fn gradients(rng: &mut StdRng) -> Outcome {
    let betas = [1.0, 10.0, 30.0];
    let rho = gradient_cases(rng, 200, |rng| {
        let f = random_inner(rng);
        let x = random_point(rng);
        let beta = betas[rng.random_range(0..3)];
        if !smooth_near(&x, &|y| smooth_robustness(y, &f, beta).1) {
            return None;
        }
        let g = smooth_robustness(&x, &f, beta).1;
        Some(rel_err(&g, &central_diff(|y| smooth_robustness(y, &f, beta).0, &x, 1e-6)))
    });
    let primary = gradient_cases(rng, 200, |rng| {
        let cbf = PrimaryCbf::new(
            1,
            InnerFormula::set(random_set(rng)),
            rng.random_range(0.0..20.0),
            rng.random_range(0.5..3.0),
            betas[rng.random_range(0..3)],
        );
        let x = random_point(rng);
        if !smooth_near(&x, &|y| primary_value(&cbf, y, 0.0).grad_x) {
            return None;
        }
        let e = primary_value(&cbf, &x, 0.0);
        Some(rel_err(&e.grad_x, &central_diff(|y| primary_value(&cbf, y, 0.0).value, &x, 1e-6)))
    });
    let secondary = gradient_cases(rng, 200, |rng| {
        let seq = random_sequence(rng);
        let x = random_point(rng);
        let t = rng.random_range(0.0..5.0);
        let mut cands = secondary_candidates(&seq, &x, t);
        cands.sort_by(f64::total_cmp);
        let value = |y: &[f64]| secondary_value(&seq, y, t).unwrap().0;
        if (cands.len() >= 2 && cands[1] - cands[0] <= 1e-3) || !smooth_near(&x, &|y| value(y).grad_x) {
            return None;
        }
        Some(rel_err(&value(&x).grad_x, &central_diff(|y| value(y).value, &x, 1e-6)))
    });
    let detail = format!(
        "smooth robustness {} states max {:.1e}, primary {} max {:.1e}, secondary {} max {:.1e}",
        rho.0, rho.1, primary.0, primary.1, secondary.0, secondary.1
    );
    let ok = [rho, primary, secondary].iter().all(|(n, e)| *n == 200 && *e <= 1e-5);
    ensure(ok, detail)
}

fn infeasible() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let csv = dir.path().join("trajectory.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_stlcbf"))
        .args(["run", "infeasible", "--out", csv.to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    let code = out.status.code();
    let stderr = String::from_utf8_lossy(&out.stderr).trim().to_string();
    let detail = format!("exit {code:?}, trajectory written {}, {stderr}", csv.exists());
    ensure(code == Some(EXIT_NO_SEQUENCE) && !csv.exists() && stderr.contains("no feasible sequence"), detail)
}

fn main() -> ExitCode {
    let mut rng = StdRng::seed_from_u64(SEED);
    let results: Vec<(&str, Outcome)> = vec![
        ("conflicting deadlines", conflict()),
        ("recurrence", recurrence()),
        ("disjunction", disjunction()),
        ("case study", case_study()),
        ("forward invariance", invariance()),
        ("smooth soundness", soundness(&mut rng)),
        ("removal feasibility", removal_feasibility(&mut rng)),
        ("QP oracle", qp_oracle(&mut rng)),
        ("gradients", gradients(&mut rng)),
        ("infeasibility reporting", infeasible()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(d) => println!("PASS {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}

mod common;

mod oracle;

use common::{planar_set, point};
use oracle::{central_diff, norm, sub};
use proptest::prelude::*;
use stlcbf_core::stl::{robustness, smooth_robustness, Clause, Predicate, Sample};
use stlcbf_core::{horizon, monitor, parse_spec, InnerFormula, SpecTree, Subtask, SubtaskGroup, TemporalOp, Trajectory};

fn inner() -> impl Strategy<Value = InnerFormula> {
    let clause = prop::collection::vec(planar_set(), 1..3)
        .prop_map(|sets| Clause { predicates: sets.into_iter().map(|set| Predicate { set }).collect() });
    prop::collection::vec(clause, 1..4).prop_map(|clauses| InnerFormula { clauses })
}

fn temporal_op() -> impl Strategy<Value = TemporalOp> {
    let iv = (0.0..10.0f64, 0.0..10.0f64).prop_map(|(a, w)| (a, a + w));
    (0..4usize, iv.clone(), iv).prop_map(|(k, (a, b), (c, d))| match k {
        0 => TemporalOp::Finally { a, b },
        1 => TemporalOp::Globally { a, b },
        2 => TemporalOp::FinallyGlobally { a, b, c, d },
        _ => TemporalOp::GloballyFinally { a, b, c, d },
    })
}

fn group(id: usize, op: TemporalOp) -> SubtaskGroup {
    let set = stlcbf_core::TargetSet::interval(0.0, 1.0).unwrap();
    SubtaskGroup::Single(Subtask { id, op, inner: InnerFormula::set(set), left_inner: None })
}

/// Whether `smooth_robustness`'s gradient is continuous around `x`.
fn away_from_kinks(x: &[f64], f: &InnerFormula, beta: f64) -> bool {
    let g = smooth_robustness(x, f, beta).1;
    (0..x.len()).all(|i| {
        [-1e-4, 1e-4].iter().all(|d| {
            let mut y = x.to_vec();
            y[i] += d;
            norm(&sub(&smooth_robustness(&y, f, beta).1, &g)) < 0.05
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn smooth_robustness_is_sound(f in inner(), x in point(), beta in prop::sample::select(vec![1.0, 10.0, 30.0, 100.0])) {
        let exact = robustness(&x, &f);
        let (smooth, _) = smooth_robustness(&x, &f, beta);
        prop_assert!(smooth <= exact + 1e-9);
        if smooth >= 0.0 {
            prop_assert!(exact >= 0.0);
        }
    }

    #[test]
    fn horizon_never_shrinks_when_adding(ops in prop::collection::vec(temporal_op(), 0..5), extra in temporal_op()) {
        let mut spec = SpecTree { dim: 1, groups: ops.into_iter().enumerate().map(|(i, op)| group(i + 1, op)).collect() };
        let before = horizon(&spec);
        let n = spec.groups.len();
        spec.groups.push(group(n + 1, extra));
        prop_assert!(horizon(&spec) >= before);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn smooth_robustness_gradient_matches_differences(f in inner(), x in point(), beta in prop::sample::select(vec![1.0, 10.0, 30.0])) {
        prop_assume!(away_from_kinks(&x, &f, beta));
        let (_, g) = smooth_robustness(&x, &f, beta);
        let fd = central_diff(|y| smooth_robustness(y, &f, beta).0, &x, 1e-6);
        let scale = norm(&g).max(norm(&fd));
        let err = norm(&sub(&g, &fd));
        prop_assert!(if scale > 1e-3 { err / scale <= 1e-5 } else { err <= 1e-8 }, "err {err}, scale {scale}");
    }
}

#[test]
fn smooth_robustness_converges() {
    let text = "F[0,1](circle(x,y,0,0,1) & rect(-0.5,3,-2,2) | circle(x,y,4,0,1))";
    let spec = parse_spec(text).unwrap();
    let f = &spec.groups[0].members()[0].inner;
    let x = [0.3, 0.2];
    let exact = robustness(&x, f);
    let gaps: Vec<f64> = [1.0, 10.0, 100.0, 1000.0].iter().map(|&b| exact - smooth_robustness(&x, f, b).0).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{gaps:?}");
    assert!(gaps[3] < 2e-3);
}

/// Robustness of `[lo, hi]` for a scalar state.
fn interval_rho(x: f64, lo: f64, hi: f64) -> f64 {
    (x - lo).min(hi - x)
}

/// Indices of samples whose time lies in `[lo, hi]`, within half a step.
fn window(lo: f64, hi: f64, dt: f64, len: usize) -> Vec<usize> {
    (0..len).filter(|&k| k as f64 * dt >= lo - dt / 2.0 && k as f64 * dt <= hi + dt / 2.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn monitor_matches_brute_force(
        xs in prop::collection::vec(-3.0..3.0f64, 61),
        kind in 0..4usize,
        a in 0u32..10, w in 0u32..10, c in 0u32..10, v in 0u32..10,
    ) {
        let dt = 0.25;
        let (a, b, c, d) = (a as f64 * 0.25, (a + w) as f64 * 0.25, c as f64 * 0.25, (c + v) as f64 * 0.25);
        let text = match kind {
            0 => format!("F[{a},{b}](box(x,-1,1))"),
            1 => format!("G[{a},{b}](box(x,-1,1))"),
            2 => format!("F[{a},{b}]G[{c},{d}](box(x,-1,1))"),
            _ => format!("G[{a},{b}]F[{c},{d}](box(x,-1,1))"),
        };
        let spec = parse_spec(&text).unwrap();
        let traj = Trajectory {
            dt,
            samples: xs.iter().enumerate().map(|(k, x)| Sample { t: k as f64 * dt, x: vec![*x], u: vec![0.0] }).collect(),
        };
        let rho: Vec<f64> = xs.iter().map(|x| interval_rho(*x, -1.0, 1.0)).collect();
        let n = rho.len();
        let max_over = |ks: Vec<usize>, f: &dyn Fn(usize) -> f64| ks.into_iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let min_over = |ks: Vec<usize>, f: &dyn Fn(usize) -> f64| ks.into_iter().map(f).fold(f64::INFINITY, f64::min);
        let expected = match kind {
            0 => max_over(window(a, b, dt, n), &|k| rho[k]),
            1 => min_over(window(a, b, dt, n), &|k| rho[k]),
            2 => max_over(window(a, b, dt, n), &|k| min_over(window(c, d, dt, n), &|j| rho[k + j])),
            _ => min_over(window(a, b, dt, n), &|k| max_over(window(c, d, dt, n), &|j| rho[k + j])),
        };
        let got = monitor(&traj, &spec).unwrap();
        prop_assert!((got.robustness - expected).abs() < 1e-12, "{text}: {} vs {expected}", got.robustness);
        prop_assert_eq!(got.satisfied, expected >= 0.0);
    }
}

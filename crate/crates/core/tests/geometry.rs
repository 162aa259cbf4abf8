mod common;

mod oracle;

use common::{planar_set, point};
use oracle::{norm, sub};
use proptest::prelude::*;
use stlcbf_core::{diameter, ordered_set_distance, signed_distance, TargetSet};

/// Euclidean distance from a point to an axis-aligned box, by clamping.
fn box_distance(x: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let c: Vec<f64> = x.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| v.clamp(*l, *h)).collect();
    norm(&sub(x, &c))
}

fn grid_points(lo: &[f64], hi: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            let fx = i as f64 / n as f64;
            let fy = j as f64 / n as f64;
            out.push(vec![lo[0] + fx * (hi[0] - lo[0]), lo[1] + fy * (hi[1] - lo[1])]);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn signed_distance_is_one_lipschitz(set in planar_set(), x in point(), y in point()) {
        let gap = (set.signed_distance(&x) - set.signed_distance(&y)).abs();
        prop_assert!(gap <= norm(&sub(&x, &y)) + 1e-9);
    }

    #[test]
    fn sign_matches_membership(set in planar_set(), x in point()) {
        let sd = set.signed_distance(&x);
        if sd > 1e-9 {
            prop_assert!(set.contains(&x));
        }
        if sd < -1e-9 {
            prop_assert!(!set.contains(&x));
        }
        prop_assert!((set.distance(&x) - (-sd).max(0.0)).abs() < 1e-12);
    }

    #[test]
    fn gradient_has_unit_length_outside(set in planar_set(), x in point()) {
        let (sd, g) = signed_distance(&x, &set);
        prop_assume!(sd < -1e-3);
        prop_assert!((norm(&g) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn box_distance_matches_clamping(x in point(), lx in 0.0..18.0f64, ly in 0.0..18.0f64, w in 0.1..3.0f64, h in 0.1..3.0f64) {
        let (lo, hi) = (vec![lx, ly], vec![lx + w, ly + h]);
        let set = TargetSet::boxed(lo.clone(), hi.clone()).unwrap();
        prop_assert!((set.distance(&x) - box_distance(&x, &lo, &hi)).abs() < 1e-9);
    }

    #[test]
    fn box_to_box_distance_matches_corners(a in planar_set(), lx in 0.0..18.0f64, ly in 0.0..18.0f64, w in 0.1..3.0f64, h in 0.1..3.0f64) {
        // Distance to a convex set is convex, so its sup over a box sits at a corner.
        let (lo, hi) = (vec![lx, ly], vec![lx + w, ly + h]);
        let from = TargetSet::boxed(lo.clone(), hi.clone()).unwrap();
        let corners = [vec![lo[0], lo[1]], vec![lo[0], hi[1]], vec![hi[0], lo[1]], vec![hi[0], hi[1]]];
        let expected = corners.iter().map(|c| a.distance(c)).fold(0.0, f64::max);
        prop_assert!((ordered_set_distance(&from, &a) - expected).abs() < 1e-9);
    }

    #[test]
    fn disc_source_matches_dense_sampling(cx in 1.0..19.0f64, cy in 1.0..19.0f64, r in 0.2..2.0f64, to in planar_set()) {
        let from = TargetSet::disc(vec![cx, cy], r).unwrap();
        let sampled = (0..20_000)
            .map(|i| {
                let a = i as f64 / 20_000.0 * std::f64::consts::TAU;
                to.distance(&[cx + r * a.cos(), cy + r * a.sin()])
            })
            .fold(0.0, f64::max);
        let d = ordered_set_distance(&from, &to);
        prop_assert!(d >= sampled - 1e-9);
        prop_assert!(d - sampled < 1e-6);
    }

    #[test]
    fn ordered_distance_bounds_pointwise_distance(a in planar_set(), b in planar_set()) {
        let d = ordered_set_distance(&a, &b);
        let (lo, hi) = match &a {
            TargetSet::Disc { center, radius } => (
                vec![center[0] - radius, center[1] - radius],
                vec![center[0] + radius, center[1] + radius],
            ),
            _ => return Ok(()),
        };
        for p in grid_points(&lo, &hi, 12).into_iter().filter(|p| a.contains(p)) {
            prop_assert!(b.distance(&p) <= d + 1e-9);
        }
    }

    #[test]
    fn ordered_distance_obeys_triangle_inequality(a in planar_set(), b in planar_set(), c in planar_set()) {
        let direct = ordered_set_distance(&a, &c);
        prop_assert!(direct <= ordered_set_distance(&a, &b) + ordered_set_distance(&b, &c) + 1e-6);
    }

    #[test]
    fn diameter_bounds_inner_distances(set in planar_set(), x in point(), y in point()) {
        if set.contains(&x) && set.contains(&y) {
            prop_assert!(norm(&sub(&x, &y)) <= diameter(&set) + 1e-9);
        }
    }
}

#[test]
fn interval_distances() {
    let iv = |a: f64, b: f64| TargetSet::interval(a, b).unwrap();
    let cases = [
        ((5.0, 6.0), (7.0, 8.0), 2.0),
        ((0.0, 1.0), (5.0, 6.0), 5.0),
        ((0.0, 1.0), (3.0, 4.0), 3.0),
        ((3.0, 4.0), (8.0, 9.0), 5.0),
        ((4.0, 5.0), (2.0, 3.0), 2.0),
        ((2.0, 3.0), (10.0, 11.0), 8.0),
        ((10.0, 11.0), (4.0, 5.0), 6.0),
        ((10.0, 11.0), (2.0, 3.0), 8.0),
    ];
    for ((a, b), (c, d), want) in cases {
        assert!((ordered_set_distance(&iv(a, b), &iv(c, d)) - want).abs() < 1e-12, "[{a},{b}] to [{c},{d}]");
    }
}

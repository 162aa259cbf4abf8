//! Pointwise (static) robustness of inner formulas.

use super::ast::InnerFormula;
use crate::geometry::signed_distance;
use crate::smooth::{smooth_max_with_weights, smooth_min_with_weights};

/// Exact robustness: max over clauses of the min over predicates of the
/// signed distance.
pub fn robustness(x: &[f64], inner: &InnerFormula) -> f64 {
    inner
        .clauses
        .iter()
        .map(|c| c.predicates.iter().map(|p| p.set.signed_distance(x)).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smooth robustness and its gradient with respect to `x`.
///
/// Smooth min inside each clause, smooth max across clauses; both bound the
/// exact operators from below, so the result never exceeds [`robustness`].
pub fn smooth_robustness(x: &[f64], inner: &InnerFormula, beta: f64) -> (f64, Vec<f64>) {
    let n = x.len();
    let mut clause_values = Vec::with_capacity(inner.clauses.len());
    let mut clause_grads = Vec::with_capacity(inner.clauses.len());
    for clause in &inner.clauses {
        let (vals, grads): (Vec<f64>, Vec<Vec<f64>>) =
            clause.predicates.iter().map(|p| signed_distance(x, &p.set)).unzip();
        let (v, w) = smooth_min_with_weights(&vals, beta);
        let mut g = vec![0.0; n];
        for (wi, gi) in w.iter().zip(&grads) {
            for k in 0..n {
                g[k] += wi * gi[k];
            }
        }
        clause_values.push(v);
        clause_grads.push(g);
    }
    let (v, w) = smooth_max_with_weights(&clause_values, beta);
    let mut g = vec![0.0; n];
    for (wi, gi) in w.iter().zip(&clause_grads) {
        for k in 0..n {
            g[k] += wi * gi[k];
        }
    }
    (v, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TargetSet;

    #[test]
    fn single_disc_predicate() {
        let inner = InnerFormula::set(TargetSet::disc(vec![0.0, 0.0], 1.0).unwrap());
        let (v, g) = smooth_robustness(&[0.5, 0.0], &inner, 30.0);
        assert!((v - 0.5).abs() < 1e-15);
        assert!((g[0] + 1.0).abs() < 1e-15 && g[1].abs() < 1e-15);
    }

    #[test]
    fn exact_disjunction_of_intervals() {
        let inner = InnerFormula::any_of([TargetSet::interval(2.0, 3.0).unwrap(), TargetSet::interval(5.0, 6.0).unwrap()]);
        assert_eq!(robustness(&[4.0], &inner), -1.0);
        assert_eq!(robustness(&[5.5], &inner), 0.5);
        // Equal clause values: the smooth max is exact.
        assert!((smooth_robustness(&[4.0], &inner, 10.0).0 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_is_below_exact() {
        let inner = InnerFormula::any_of([TargetSet::interval(2.0, 3.0).unwrap(), TargetSet::interval(5.0, 6.0).unwrap()]);
        for k in 0..80 {
            let x = [k as f64 * 0.1];
            assert!(smooth_robustness(&x, &inner, 5.0).0 <= robustness(&x, &inner) + 1e-12);
        }
    }
}

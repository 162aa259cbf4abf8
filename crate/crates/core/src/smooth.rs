//! Log-sum-exp style approximations of `min` and `max` that never
//! overestimate the exact value.
//!
//! ```text
//! smin(c) = -(1/β) ln Σ exp(-β c_i)          ≤ min c
//! smax(c) = Σ c_i exp(β c_i) / Σ exp(β c_i)  ≤ max c
//! ```
//!
//! Both are evaluated with the usual max-shift so that large `β·c` does not
//! overflow. The derivative helpers return `∂f/∂c_i`, which callers chain
//! with the gradients of the individual terms.

/// Smooth lower bound of `min(values)`.
///
/// A single value is returned unchanged. Panics on an empty slice.
pub fn smooth_min(values: &[f64], beta: f64) -> f64 {
    assert!(!values.is_empty(), "smooth_min of an empty slice");
    if values.len() == 1 {
        return values[0];
    }
    let m = values.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = values.iter().map(|&c| (-beta * (c - m)).exp()).sum();
    m - sum.ln() / beta
}

/// Smooth lower bound of `max(values)` (softmax-weighted average).
pub fn smooth_max(values: &[f64], beta: f64) -> f64 {
    assert!(!values.is_empty(), "smooth_max of an empty slice");
    if values.len() == 1 {
        return values[0];
    }
    smooth_max_with_weights(values, beta).0
}

/// `smooth_min` together with `∂smin/∂c_i` (the softmin weights).
pub fn smooth_min_with_weights(values: &[f64], beta: f64) -> (f64, Vec<f64>) {
    if values.len() == 1 {
        return (values[0], vec![1.0]);
    }
    let neg: Vec<f64> = values.iter().map(|c| -c).collect();
    (smooth_min(values, beta), softmax(&neg, beta))
}

/// `smooth_max` together with `∂smax/∂c_i = p_i (1 + β (c_i - smax))`.
pub fn smooth_max_with_weights(values: &[f64], beta: f64) -> (f64, Vec<f64>) {
    if values.len() == 1 {
        return (values[0], vec![1.0]);
    }
    let p = softmax(values, beta);
    // The weights sum to 1 only up to rounding; the clamp keeps the bound exact.
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let value = values.iter().zip(&p).map(|(c, p)| c * p).sum::<f64>().min(top);
    let grad = values
        .iter()
        .zip(&p)
        .map(|(c, p)| p * (1.0 + beta * (c - value)))
        .collect();
    (value, grad)
}

fn softmax(values: &[f64], beta: f64) -> Vec<f64> {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = values.iter().map(|&c| (beta * (c - m)).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_term_is_identity() {
        assert_eq!(smooth_min(&[0.7], 10.0), 0.7);
        assert_eq!(smooth_max(&[-3.0], 10.0), -3.0);
    }

    #[test]
    fn equal_values_smooth_max_is_exact() {
        assert_eq!(smooth_max(&[0.0, 0.0], 10.0), 0.0);
        let (v, w) = smooth_max_with_weights(&[2.0, 2.0], 10.0);
        assert!((v - 2.0).abs() < 1e-15);
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closed_form_smooth_min() {
        let expected = -(1.0 / 10.0) * ((-10.0f64).exp() + (-20.0f64).exp()).ln();
        let got = smooth_min(&[1.0, 2.0], 10.0);
        assert!((got - expected).abs() < 1e-14);
        assert!((got - 0.999_995_46).abs() < 1e-8);
        assert!(got <= 1.0);
    }

    #[test]
    fn no_overflow_for_large_arguments() {
        let v = smooth_min(&[1e4, 1e4 + 1.0], 1e3);
        assert!(v.is_finite() && v <= 1e4);
        let v = smooth_max(&[-1e4, 1e4], 1e3);
        assert!(v.is_finite() && (v - 1e4).abs() < 1e-9);
    }

    #[test]
    fn convergence_is_monotone_in_beta() {
        let c = [0.3, -1.2, 0.9, -1.1];
        let mut prev = f64::INFINITY;
        for beta in [1.0, 10.0, 100.0, 1000.0] {
            let err = (smooth_min(&c, beta) - (-1.2)).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn weights_match_finite_differences() {
        let c = [0.4, 0.1, -0.3];
        let beta = 7.0;
        let h = 1e-6;
        let (_, wmin) = smooth_min_with_weights(&c, beta);
        let (_, wmax) = smooth_max_with_weights(&c, beta);
        for i in 0..c.len() {
            let mut p = c;
            let mut m = c;
            p[i] += h;
            m[i] -= h;
            let fd_min = (smooth_min(&p, beta) - smooth_min(&m, beta)) / (2.0 * h);
            let fd_max = (smooth_max(&p, beta) - smooth_max(&m, beta)) / (2.0 * h);
            assert!((fd_min - wmin[i]).abs() < 1e-7);
            assert!((fd_max - wmax[i]).abs() < 1e-7);
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub c: f64,
    /// `Σ aₙ` over the given prefix.
    pub s: f64,
    /// `max{b₀, 1}`.
    pub b: f64,
    /// `(b + 2c(2+b)s)·e^{6cs}`.
    pub bound: f64,
    pub hypothesis_holds: bool,
    /// First `k` with `b_{k+1} − b_k ≥ 2c(2 + b_k)a_k`.
    pub violation_index: Option<usize>,
    /// `2c(2+b_k)a_k − (b_{k+1} − b_k)` at the violation; nonpositive there.
    pub violation_margin: Option<f64>,
    pub max_b: f64,
    /// Whether every `bₙ ≤ bound`; only asserted when the hypothesis holds.
    /// (`b₀` itself equals the bound when `s = 0` and `b₀ ≥ 1`.)
    pub bound_holds: Option<bool>,
}

impl SeriesReport {
    pub fn passed(&self) -> bool {
        self.hypothesis_holds && self.bound_holds == Some(true)
    }
}

/// Checks `b_{n+1} − b_n < 2c(2 + b_n)a_n` index by index, then that every
/// `b_n` lies below `(b + 2c(2+b)s)e^{6cs}`.
///
/// `b` may have the same length as `a` or one more entry.
pub fn verify_series_bound(a: &[f64], b: &[f64], c: f64) -> Result<SeriesReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::input(format!("c must be positive, got {c}")));
    }
    if b.is_empty() || !(b.len() == a.len() || b.len() == a.len() + 1) {
        return Err(Error::input("b must have the length of a or one more"));
    }
    if let Some(i) = a.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::input(format!("a[{i}] must be nonnegative and finite")));
    }
    if let Some(i) = b.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::input(format!("b[{i}] must be positive and finite")));
    }
    let s: f64 = a.iter().sum();
    let b0 = b[0].max(1.0);
    let bound = (b0 + 2.0 * c * (2.0 + b0) * s) * (6.0 * c * s).exp();
    let mut violation = None;
    for n in 0..b.len() - 1 {
        let margin = 2.0 * c * (2.0 + b[n]) * a[n] - (b[n + 1] - b[n]);
        if !(margin > 0.0) {
            violation = Some((n, margin));
            break;
        }
    }
    let max_b = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SeriesReport {
        c,
        s,
        b: b0,
        bound,
        hypothesis_holds: violation.is_none(),
        violation_index: violation.map(|v| v.0),
        violation_margin: violation.map(|v| v.1),
        max_b,
        bound_holds: violation.is_none().then(|| b.iter().all(|&v| v <= bound)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recursion(a: &[f64], b0: f64, c: f64, factor: f64) -> Vec<f64> {
        let mut b = vec![b0];
        for (n, an) in a.iter().enumerate() {
            let bn = b[n];
            b.push(bn + factor * 2.0 * c * (2.0 + bn) * an);
        }
        b
    }

    #[test]
    fn geometric_example() {
        let a: Vec<f64> = (0..40).map(|n| 0.5f64.powi(n)).collect();
        let b = recursion(&a, 1.0, 1.0, 0.95);
        let r = verify_series_bound(&a, &b, 1.0).unwrap();
        assert!(r.passed());
        // with the full sum s = 2 the bound is 13e¹²; the prefix bound is below it
        assert!(r.bound <= 13.0 * 12f64.exp());
        assert!((r.s - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_series_needs_decrease() {
        let a = vec![0.0; 4];
        let r = verify_series_bound(&a, &[3.0, 2.0, 1.5, 1.0, 0.5], 1.0).unwrap();
        assert!(r.passed());
        assert_eq!(r.bound, 3.0);
        let r = verify_series_bound(&[0.0], &[3.0, 3.0], 1.0).unwrap();
        assert_eq!(r.violation_index, Some(0));
    }

    #[test]
    fn planted_violation_at_index_four() {
        let a: Vec<f64> = (0..10).map(|n| 0.5f64.powi(n)).collect();
        let mut b = recursion(&a, 1.0, 1.0, 0.5);
        b[5] = b[4] + 2.0 * (2.0 + b[4]) * a[4] * 1.5;
        let r = verify_series_bound(&a, &b, 1.0).unwrap();
        assert_eq!(r.violation_index, Some(4));
        assert!(r.violation_margin.unwrap() <= 0.0);
        assert_eq!(r.bound_holds, None);
        assert!(!r.passed());
    }

    #[test]
    fn bad_inputs() {
        assert!(verify_series_bound(&[1.0], &[1.0, 2.0], 0.0).is_err());
        assert!(verify_series_bound(&[-1.0], &[1.0, 2.0], 1.0).is_err());
        assert!(verify_series_bound(&[1.0], &[0.0, 2.0], 1.0).is_err());
        assert!(verify_series_bound(&[1.0], &[1.0, 2.0, 3.0], 1.0).is_err());
    }
}

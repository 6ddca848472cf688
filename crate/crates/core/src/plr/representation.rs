use serde::{Deserialize, Serialize};

use super::certificate::{analytic_slopes, certify_regular_slope, RegularSlopeCertificate};
use super::sampling::Sampling;
use crate::ekeland::slope_perturbed_min;
use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::metric_space::{EuclideanGrid, MetricSpace, ScalarField};
use crate::subdifferential::Expr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationStep {
    pub n: usize,
    /// `n > 1/r`; smaller indices are reported but not constructed.
    pub in_range: bool,
    pub r_n: f64,
    pub eps_n: f64,
    /// `inf (f − f(x̄) + gₙ)` over the space.
    pub infimum: f64,
    pub x_n: Option<usize>,
    pub label: Option<String>,
    pub distance: f64,
    /// `(f(x̄) − f(xₙ)) / d(xₙ, x̄)`, must exceed `rₙ`.
    pub quotient: f64,
    pub quotient_ok: bool,
    /// `d(xₙ, x̄) < 1/(cn)`.
    pub distance_ok: bool,
    pub slope: f64,
    /// `|∇f|(xₙ) − |∇f|(x̄)`, must stay below `2c(r+2)·d`.
    pub slope_gap: f64,
    pub gap_bound: f64,
    pub gap_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl RepresentationStep {
    pub fn passed(&self) -> bool {
        !self.in_range || (self.quotient_ok && self.distance_ok && self.gap_ok)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationReport {
    pub center: usize,
    pub slope: f64,
    pub c: f64,
    pub steps: Vec<RepresentationStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regularity: Option<RegularSlopeCertificate>,
    pub passed: bool,
}

/// Smallest index with `n > 1/r`.
pub fn first_index(r: f64) -> usize {
    (1.0 / r).floor() as usize + 1
}

/// Builds `xₙ → x̄` realizing the slope at `x̄` as a limit of difference
/// quotients.
///
/// For each `n > 1/r` the perturbation `gₙ = rₙ·d(·,x̄) + c(r+2)·d(·,x̄)²`
/// with `rₙ = r − 1/n` is added to `f − f(x̄)` and `xₙ` is taken from
/// [`slope_perturbed_min`] with `εₙ = min{1/(2n), |inf(f − f(x̄) + gₙ)|/2}`.
pub fn representation_sequence<S: MetricSpace + ?Sized>(
    space: &S,
    f: &ScalarField,
    slopes: &[ExtReal],
    center: usize,
    c: f64,
    ns: &[usize],
) -> Result<RepresentationReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::input(format!("c must be positive, got {c}")));
    }
    if slopes.len() != space.len() || f.len() != space.len() || center >= space.len() {
        return Err(Error::input("field, slopes and center must match the space"));
    }
    let f_center = f.finite_at(center)?;
    let r = match slopes[center] {
        ExtReal::Finite(r) if r > 0.0 => r,
        other => {
            return Err(Error::precondition(
                format!("slope at the center must be positive and finite, got {other}"),
                Some(center),
            ))
        }
    };
    let normalized = f.shifted(-f_center);
    let mut steps = Vec::with_capacity(ns.len());
    for &n in ns {
        let nf = n as f64;
        let r_n = r - 1.0 / nf;
        let mut step = RepresentationStep {
            n,
            in_range: nf * r > 1.0,
            r_n,
            eps_n: 0.0,
            infimum: 0.0,
            x_n: None,
            label: None,
            distance: 0.0,
            quotient: 0.0,
            quotient_ok: false,
            distance_ok: false,
            slope: 0.0,
            slope_gap: 0.0,
            gap_bound: 0.0,
            gap_ok: false,
            note: None,
        };
        if !step.in_range {
            step.note = Some("n ≤ 1/r: index out of range".into());
            steps.push(step);
            continue;
        }
        let g = ScalarField::from_finite(
            (0..space.len())
                .map(|i| {
                    let d = space.dist(i, center);
                    r_n * d + c * (r + 2.0) * d * d
                })
                .collect(),
        )?;
        let (_, infimum) = normalized.sum(&g)?.argmin();
        step.infimum = infimum;
        if !(infimum < 0.0) {
            step.note = Some("inf(f − f(x̄) + gₙ) is not negative at this resolution".into());
            steps.push(step);
            continue;
        }
        let eps = (0.5 / nf).min(infimum.abs() / 2.0);
        let (x, _) = slope_perturbed_min(space, &normalized, &g, eps, None)?;
        let d = space.dist(x, center);
        let slope = slopes[x].to_f64();
        step.eps_n = eps;
        step.x_n = Some(x);
        step.label = Some(space.label(x));
        step.distance = d;
        step.quotient = if d > 0.0 { (f_center - f.finite_at(x)?) / d } else { 0.0 };
        step.quotient_ok = d > 0.0 && step.quotient > r_n;
        step.distance_ok = d < 1.0 / (c * nf);
        step.slope = slope;
        step.slope_gap = slope - r;
        step.gap_bound = 2.0 * c * (r + 2.0) * d;
        step.gap_ok = step.slope_gap < step.gap_bound;
        steps.push(step);
    }
    Ok(RepresentationReport {
        center,
        slope: r,
        c,
        passed: steps.iter().all(RepresentationStep::passed),
        steps,
        regularity: None,
    })
}

/// Grid version for an analytic function: samples `B(x̄; radius)` at spacing
/// `h`, uses min-norm slopes, and certifies regular slopedness at `c` first.
pub fn representation_sequence_on_grid(
    f: &Expr,
    center: &[f64],
    c: f64,
    ns: &[usize],
    radius: f64,
    h: f64,
    sampling: &Sampling,
) -> Result<(EuclideanGrid, RepresentationReport)> {
    let dim = f.validate()?;
    if center.len() != dim {
        return Err(Error::input("center has the wrong dimension"));
    }
    let grid = EuclideanGrid::new(dim, center.to_vec(), radius, h)?;
    let field = ScalarField::sample(&grid, |x| f.eval(x).into())?;
    let slopes = analytic_slopes(&grid, f)?;
    let regularity = certify_regular_slope(&grid, &field, &slopes, c, sampling)?;
    if !regularity.passed() {
        return Err(Error::precondition(
            format!("f is not regularly sloped at c = {c} on the sample"),
            regularity.violations.first().map(|v| v.x),
        ));
    }
    let x_bar = grid.locate(center)?;
    let mut report = representation_sequence(&grid, &field, &slopes, x_bar, c, ns)?;
    report.regularity = Some(regularity);
    Ok((grid, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_space::Coordinates;

    #[test]
    fn negative_identity_on_a_line() {
        let f = Expr::Affine { slope: vec![-1.0], offset: 0.0 };
        let ns: Vec<usize> = (1..=6).collect();
        let (grid, rep) =
            representation_sequence_on_grid(&f, &[0.0], 1.0, &ns, 0.5, 1e-3, &Sampling::default()).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(!rep.steps[0].in_range);
        let two = &rep.steps[1];
        assert!(two.distance < 0.5 && two.quotient > 0.5);
        // descent is to the right
        assert!(grid.coords(two.x_n.unwrap())[0] > 0.0);
    }

    #[test]
    fn quotients_approach_the_slope() {
        let f = Expr::Quadratic { diag: vec![-2.0, -2.0], center: vec![0.0, 0.0], offset: 0.0 };
        let ns = [2, 4, 8, 16];
        let (_, rep) =
            representation_sequence_on_grid(&f, &[0.5, 0.0], 1.0, &ns, 0.25, 2.5e-3, &Sampling::default())
                .unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!((rep.slope - 1.0).abs() < 1e-12);
        let q: Vec<f64> = rep.steps.iter().map(|s| s.quotient).collect();
        assert!((q[3] - 1.0).abs() < (q[0] - 1.0).abs() + 1e-12, "{q:?}");
    }

    #[test]
    fn zero_slope_is_rejected() {
        let f = Expr::Quadratic { diag: vec![1.0], center: vec![0.0], offset: 0.0 };
        let err = representation_sequence_on_grid(&f, &[0.0], 1.0, &[2], 0.5, 0.01, &Sampling::default());
        assert!(matches!(err, Err(Error::Precondition { .. })));
    }
}

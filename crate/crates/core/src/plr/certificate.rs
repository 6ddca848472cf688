use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::Sampling;
use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::linalg::{dist, dot, norm, sub};
use crate::metric_space::{Coordinates, MetricSpace, ScalarField};
use crate::subdifferential::{slope_from_subdifferential, Expr, SubdifferentialOracle};

/// Relative slack on certificate inequalities. Sampled values are exact
/// evaluations, so only rounding needs absorbing.
pub const CERT_TOL: f64 = 1e-9;
/// Violations kept in a report (worst first).
pub const MAX_REPORTED: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

fn tol(a: f64, b: f64) -> f64 {
    CERT_TOL * (1.0 + a.abs() + b.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlrViolation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub p: Vec<f64>,
    /// `f(y) − [f(x) + ⟨p, y−x⟩ − c(1+‖p‖)‖y−x‖²]`; negative when violated.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlrCertificate {
    pub center: Vec<f64>,
    pub c: f64,
    pub delta: f64,
    pub status: Status,
    pub provenance: String,
    pub points: usize,
    pub pairs: usize,
    pub subgradients: usize,
    pub violation_count: usize,
    /// Smallest margin seen over all checked triples.
    pub worst_margin: f64,
    pub violations: Vec<PlrViolation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PlrCertificate {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

fn check_params(c: f64, delta: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::input(format!("c must be positive, got {c}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::input(format!("delta must be positive, got {delta}")));
    }
    Ok(())
}

/// Checks `x̄ ∈ plr_{c,δ} f` for an analytic expression.
pub fn certify_plr(f: &Expr, center: &[f64], c: f64, delta: f64, sampling: &Sampling) -> Result<PlrCertificate> {
    f.validate()?;
    certify_plr_with(&|x: &[f64]| f.eval(x), f, center, c, delta, sampling)
}

struct PointOutcome {
    pairs: usize,
    subgradients: usize,
    count: usize,
    min_margin: f64,
    worst: Option<PlrViolation>,
}

/// Checks `f(y) ≥ f(x) + ⟨p, y−x⟩ − c(1+‖p‖)‖y−x‖²` for sampled
/// `x, y ∈ B°(center; δ)` and `p` from the oracle's test set at `x`.
pub fn certify_plr_with(
    eval: &(dyn Fn(&[f64]) -> f64 + Sync),
    oracle: &dyn SubdifferentialOracle,
    center: &[f64],
    c: f64,
    delta: f64,
    sampling: &Sampling,
) -> Result<PlrCertificate> {
    check_params(c, delta)?;
    sampling.validate()?;
    if center.len() != oracle.dim() {
        return Err(Error::input("center has the wrong dimension"));
    }
    let grid = sampling.open_ball(center, delta)?;
    let n = grid.len();
    let values: Vec<f64> = (0..n).into_par_iter().map(|i| eval(grid.coords(i))).collect();
    let outcomes = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.coords(i);
            let set = oracle.subdifferential_at(x).ok_or(Error::Coverage { point: i })?;
            let mut rng = sampling.rng_for(i);
            let mut ps = set.test_points(sampling.p_extra, &mut rng)?;
            ps.dedup();
            let mut unique: Vec<Vec<f64>> = Vec::with_capacity(ps.len());
            for p in ps {
                if !unique.contains(&p) {
                    unique.push(p);
                }
            }
            let partners = sampling.partners(n, i);
            let fx = values[i];
            let mut out = PointOutcome {
                pairs: partners.len(),
                subgradients: unique.len(),
                count: 0,
                min_margin: f64::INFINITY,
                worst: None,
            };
            for p in &unique {
                let coef = c * (1.0 + norm(p));
                for &j in &partners {
                    let y = grid.coords(j);
                    let d = dist(x, y);
                    let fy = values[j];
                    let margin = fy - (fx + dot(p, &sub(y, x)) - coef * d * d);
                    out.min_margin = out.min_margin.min(margin);
                    if margin < -tol(fx, fy) {
                        out.count += 1;
                        if out.worst.as_ref().is_none_or(|w| margin < w.margin) {
                            out.worst = Some(PlrViolation { x: x.to_vec(), y: y.to_vec(), p: p.clone(), margin });
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut violations: Vec<PlrViolation> = Vec::new();
    let (mut pairs, mut subgradients, mut count, mut worst_margin) = (0, 0, 0, f64::INFINITY);
    for o in outcomes {
        pairs += o.pairs;
        subgradients += o.subgradients;
        count += o.count;
        worst_margin = worst_margin.min(o.min_margin);
        violations.extend(o.worst);
    }
    // stable sort keeps point order among equal margins
    violations.sort_by(|a, b| a.margin.total_cmp(&b.margin));
    violations.truncate(MAX_REPORTED);
    Ok(PlrCertificate {
        center: center.to_vec(),
        c,
        delta,
        status: Status::from_bool(count == 0),
        provenance: oracle.provenance(),
        points: n,
        pairs,
        subgradients,
        violation_count: count,
        worst_margin: if worst_margin.is_finite() { worst_margin } else { 0.0 },
        violations,
        note: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeViolation {
    pub x: usize,
    pub y: usize,
    pub x_label: String,
    pub y_label: String,
    /// `f(y) − [f(x) − s·d − c(1+s)d²]`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularSlopeCertificate {
    pub c: f64,
    pub status: Status,
    pub points: usize,
    /// Points with infinite slope, where the inequality is vacuous.
    pub skipped: usize,
    pub pairs: usize,
    pub violation_count: usize,
    pub worst_margin: f64,
    pub violations: Vec<SlopeViolation>,
}

impl RegularSlopeCertificate {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Checks `f(y) ≥ f(x) − s(x)·d − c(1+s(x))·d²` over sampled pairs, where
/// `s` is the supplied slope (analytic min-norm or exact finite-space slope).
pub fn certify_regular_slope<S: MetricSpace + ?Sized>(
    space: &S,
    f: &ScalarField,
    slopes: &[ExtReal],
    c: f64,
    sampling: &Sampling,
) -> Result<RegularSlopeCertificate> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::input(format!("c must be positive, got {c}")));
    }
    let n = space.len();
    if f.len() != n || slopes.len() != n {
        return Err(Error::input("field or slope length does not match the space"));
    }
    let outcomes: Vec<(bool, usize, usize, f64, Option<SlopeViolation>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (Some(fx), Some(s)) = (f.value(i).finite(), slopes[i].finite()) else {
                return (true, 0, 0, f64::INFINITY, None);
            };
            let partners = sampling.partners(n, i);
            let mut count = 0;
            let mut min_margin = f64::INFINITY;
            let mut worst: Option<SlopeViolation> = None;
            for &j in &partners {
                let Some(fy) = f.value(j).finite() else { continue };
                let d = space.dist(i, j);
                let margin = fy - (fx - s * d - c * (1.0 + s) * d * d);
                min_margin = min_margin.min(margin);
                if margin < -tol(fx, fy) {
                    count += 1;
                    if worst.as_ref().is_none_or(|w| margin < w.margin) {
                        worst = Some(SlopeViolation {
                            x: i,
                            y: j,
                            x_label: space.label(i),
                            y_label: space.label(j),
                            margin,
                        });
                    }
                }
            }
            (false, partners.len(), count, min_margin, worst)
        })
        .collect();
    let mut cert = RegularSlopeCertificate {
        c,
        status: Status::Pass,
        points: n,
        skipped: 0,
        pairs: 0,
        violation_count: 0,
        worst_margin: f64::INFINITY,
        violations: Vec::new(),
    };
    for (skipped, pairs, count, m, worst) in outcomes {
        cert.skipped += skipped as usize;
        cert.pairs += pairs;
        cert.violation_count += count;
        cert.worst_margin = cert.worst_margin.min(m);
        cert.violations.extend(worst);
    }
    cert.violations.sort_by(|a, b| a.margin.total_cmp(&b.margin));
    cert.violations.truncate(MAX_REPORTED);
    if !cert.worst_margin.is_finite() {
        cert.worst_margin = 0.0;
    }
    cert.status = Status::from_bool(cert.violation_count == 0);
    Ok(cert)
}

/// Min-norm slopes `min{‖p‖ : p ∈ ∂f(x)}` at every point of a coordinate space.
pub fn analytic_slopes<S: Coordinates + ?Sized>(space: &S, oracle: &dyn SubdifferentialOracle) -> Result<Vec<ExtReal>> {
    (0..space.len())
        .into_par_iter()
        .map(|i| slope_from_subdifferential(oracle, space.coords(i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_space::{EuclideanGrid, FiniteMetricSpace};
    use crate::subdifferential::Catalog;

    fn neg_sq() -> Expr {
        Catalog::builtin().get("neg_sq_norm").unwrap().params.clone()
    }

    #[test]
    fn convex_entry_passes_for_any_constants() {
        let l1 = Catalog::builtin().get("l1").unwrap().params.clone();
        for c in [1e-3, 1.0] {
            let cert = certify_plr(&l1, &[0.0, 0.0], c, 1.0, &Sampling::default()).unwrap();
            assert!(cert.passed(), "{:?}", cert.violations.first());
            assert!(cert.subgradients > cert.points);
        }
    }

    #[test]
    fn neg_sq_norm_pass_and_fail() {
        let f = neg_sq();
        let ok = certify_plr(&f, &[0.0, 0.0], 1.0, 2.0, &Sampling::default()).unwrap();
        assert!(ok.passed());
        // the identity f(y) = f(x) + ⟨∇f(x), y−x⟩ − ‖y−x‖² is attained
        assert!(ok.worst_margin >= -1e-9);
        let bad = certify_plr(&f, &[0.0, 0.0], 0.1, 2.0, &Sampling::default()).unwrap();
        assert!(!bad.passed());
        let w = &bad.violations[0];
        // worst pair: small subgradient and far-apart points
        assert!(dist(&w.x, &w.y) > 2.0, "{w:?}");
        assert!(w.margin < 0.0);
    }

    #[test]
    fn parameters_are_validated() {
        let f = neg_sq();
        assert!(certify_plr(&f, &[0.0, 0.0], 0.0, 1.0, &Sampling::default()).is_err());
        assert!(certify_plr(&f, &[0.0, 0.0], 1.0, -1.0, &Sampling::default()).is_err());
        assert!(certify_plr(&f, &[0.0], 1.0, 1.0, &Sampling::default()).is_err());
    }

    #[test]
    fn results_are_deterministic_with_random_pairs() {
        let f = neg_sq();
        let s = Sampling { exhaustive_limit: 50, pairs_per_point: 8, seed: 9, ..Sampling::default() };
        let a = certify_plr(&f, &[0.0, 0.0], 0.1, 2.0, &s).unwrap();
        let b = certify_plr(&f, &[0.0, 0.0], 0.1, 2.0, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn regular_slope_examples() {
        let s = Sampling::default();
        let space = FiniteMetricSpace::path(4);
        let f = ScalarField::from_finite(vec![2.0; 4]).unwrap();
        let zero = vec![ExtReal::ZERO; 4];
        assert!(certify_regular_slope(&space, &f, &zero, 1e-6, &s).unwrap().passed());

        let grid = EuclideanGrid::new(2, vec![0.0, 0.0], 1.0, 0.1).unwrap();
        let e = neg_sq();
        let field = ScalarField::sample(&grid, |x| e.eval(x).into()).unwrap();
        let slopes = analytic_slopes(&grid, &e).unwrap();
        assert!(certify_regular_slope(&grid, &field, &slopes, 1.0, &s).unwrap().passed());

        let cubed = Catalog::builtin().get("neg_cubed_norm").unwrap().params.clone();
        let grid = EuclideanGrid::new(2, vec![0.0, 0.0], 2.0, 0.2).unwrap();
        let field = ScalarField::sample(&grid, |x| cubed.eval(x).into()).unwrap();
        let slopes = analytic_slopes(&grid, &cubed).unwrap();
        let cert = certify_regular_slope(&grid, &field, &slopes, 0.1, &s).unwrap();
        assert!(!cert.passed());
        let w = &cert.violations[0];
        let far = grid.coords(w.x).iter().chain(grid.coords(w.y)).fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(far >= 1.5, "{w:?}");
    }

    #[test]
    fn infinite_slopes_are_skipped() {
        let space = FiniteMetricSpace::path(3);
        let f = ScalarField::from_finite(vec![0.0, 5.0, 0.0]).unwrap();
        let slopes = vec![ExtReal::ZERO, ExtReal::PosInf, ExtReal::ZERO];
        let cert = certify_regular_slope(&space, &f, &slopes, 1.0, &Sampling::default()).unwrap();
        assert_eq!(cert.skipped, 1);
        assert!(cert.passed());
    }
}

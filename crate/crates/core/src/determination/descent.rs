use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::metric_space::{MetricSpace, ScalarField};
use crate::orbit::{
    build_determination_map, membership_violations, orbit_length_bound, run_orbit, ComponentCounts, Termination,
};
use crate::plr::{certify_regular_slope, verify_series_bound, Sampling};

/// Dilations `f_δ = (1+δ)f` run by default.
pub const DEFAULT_DILATIONS: [f64; 3] = [0.5, 0.1, 0.01];

fn tol(a: f64, b: f64) -> f64 {
    1e-9 * (1.0 + a.abs() + b.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRun {
    pub start: usize,
    pub end: usize,
    pub steps: usize,
    pub length: f64,
    /// `f_δ(x₀)/ε` with `f_δ` normalised to vanish at `x̄`.
    pub length_bound: f64,
    pub length_ok: bool,
    pub termination: Termination,
    pub reached_center: bool,
    /// Series bound along the slopes met by the orbit.
    pub series_ok: bool,
    /// `(f_δ − g)(x₀) − (f_δ − g)(x̄)`, positive by strict descent on `S₁`.
    pub start_gap: f64,
    pub membership_ok: bool,
    /// Component counts at the last point when the orbit stalls away from `x̄`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stall: Option<ComponentCounts>,
}

impl OrbitRun {
    pub fn passed(&self) -> bool {
        self.reached_center && self.length_ok && self.series_ok && self.membership_ok && (self.steps == 0 || self.start_gap > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationRun {
    pub dilation: f64,
    pub eps: f64,
    /// Regular-slope coefficient of `f_δ`.
    pub c: f64,
    pub orbits: Vec<OrbitRun>,
    /// `min_x (f_δ − g)(x) − (f_δ − g)(x̄)` over the whole space.
    pub min_gap: f64,
    pub pointwise_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreReport {
    pub points: usize,
    pub c: f64,
    /// Smallest `|∇f|` off `x̄`.
    pub min_slope: f64,
    pub regular_slope_pairs: usize,
    /// `min (|∇f| − |∇g|)`.
    pub slope_domination_margin: f64,
    pub mixed_pairs: usize,
    pub mixed_worst_margin: f64,
    pub dilations: Vec<DilationRun>,
    pub passed: bool,
}

/// Checks `|∇g| ≤ |∇f|` at every point.
fn check_slope_domination(slope_f: &[ExtReal], slope_g: &[ExtReal]) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for (x, (&sf, &sg)) in slope_f.iter().zip(slope_g).enumerate() {
        let (Some(sf), Some(sg)) = (sf.finite(), sg.finite()) else {
            if sf.is_finite() {
                return Err(Error::Hypothesis { which: "slope domination".into(), point: x, other: None, margin: f64::NEG_INFINITY });
            }
            continue;
        };
        let margin = sf - sg;
        if margin < -1e-9 * (1.0 + sf) {
            return Err(Error::Hypothesis { which: "slope domination".into(), point: x, other: None, margin });
        }
        worst = worst.min(margin);
    }
    Ok(worst)
}

/// Checks `g(y) ≥ g(x) − |∇f|(x)d − c(|∇f|(x)+1)d²` over sampled pairs.
fn check_mixed<S: MetricSpace + ?Sized>(
    space: &S,
    g: &ScalarField,
    slope_f: &[ExtReal],
    c: f64,
    sampling: &Sampling,
) -> Result<(usize, f64)> {
    let n = space.len();
    let per_point: Vec<(usize, f64, Option<(usize, f64)>)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let (Some(gx), Some(s)) = (g.value(x).finite(), slope_f[x].finite()) else {
                return (0, f64::INFINITY, None);
            };
            let partners = sampling.partners(n, x);
            let mut worst = f64::INFINITY;
            let mut bad: Option<(usize, f64)> = None;
            for &y in &partners {
                let Some(gy) = g.value(y).finite() else { continue };
                let d = space.dist(x, y);
                let margin = gy - (gx - s * d - c * (s + 1.0) * d * d);
                worst = worst.min(margin);
                if margin < -tol(gx, gy) && bad.is_none_or(|b| margin < b.1) {
                    bad = Some((y, margin));
                }
            }
            (partners.len(), worst, bad)
        })
        .collect();
    let mut pairs = 0;
    let mut worst = f64::INFINITY;
    for (x, (count, w, bad)) in per_point.into_iter().enumerate() {
        if let Some((y, margin)) = bad {
            return Err(Error::Hypothesis { which: "mixed inequality".into(), point: x, other: Some(y), margin });
        }
        pairs += count;
        worst = worst.min(w);
    }
    Ok((pairs, if worst.is_finite() { worst } else { 0.0 }))
}

/// The slope-determination step on a finite space.
///
/// Given `f` regularly sloped of order 2 with coefficient `c` and a sharp
/// minimum at `center`, and `g` with `|∇g| ≤ |∇f|` and the mixed quadratic
/// lower bound, runs the determination map for each dilation `(1+δ)f` from
/// every start and checks that `f − g` is minimised at `center`.
///
/// Hypothesis failures are returned as [`Error::Hypothesis`] naming the
/// inequality and the point.
#[allow(clippy::too_many_arguments)]
pub fn slope_determination_core<S: MetricSpace + ?Sized>(
    space: &S,
    f: &ScalarField,
    g: &ScalarField,
    slope_f: &[ExtReal],
    slope_g: &[ExtReal],
    c: f64,
    center: usize,
    starts: &[usize],
    dilations: &[f64],
    sampling: &Sampling,
) -> Result<CoreReport> {
    let n = space.len();
    if f.len() != n || g.len() != n || slope_f.len() != n || slope_g.len() != n {
        return Err(Error::input("fields and slopes must match the space"));
    }
    if center >= n || starts.iter().any(|&s| s >= n) {
        return Err(Error::input("center or start outside the space"));
    }
    if dilations.is_empty() || dilations.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::input("dilations must be positive"));
    }
    let fc = f.finite_at(center)?;
    let gc = g.finite_at(center)?;

    let cert = certify_regular_slope(space, f, slope_f, c, sampling)?;
    if !cert.passed() {
        return Err(Error::precondition(
            format!("f is not regularly sloped at c = {c} (margin {:e})", cert.worst_margin),
            cert.violations.first().map(|v| v.x),
        ));
    }
    if let Some(x) = (0..n).find(|&x| f.value(x).finite().is_some_and(|v| v < fc - tol(v, fc))) {
        return Err(Error::precondition("center is not a minimum of f", Some(x)));
    }
    let min_slope = (0..n)
        .filter(|&x| x != center && f.is_finite_at(x))
        .map(|x| slope_f[x].to_f64())
        .fold(f64::INFINITY, f64::min);
    if !(min_slope > 0.0) {
        return Err(Error::precondition("minimum is not sharp: a slope vanishes off the center", None));
    }
    let slope_domination_margin = check_slope_domination(slope_f, slope_g)?;
    let (mixed_pairs, mixed_worst_margin) = check_mixed(space, g, slope_f, c, sampling)?;

    let g0 = g.shifted(-gc);
    let mut runs = Vec::with_capacity(dilations.len());
    for &delta in dilations {
        let k = 1.0 + delta;
        let fd = f.shifted(-fc).scaled(k);
        let sd: Vec<ExtReal> = slope_f.iter().map(|s| s.scale(k)).collect();
        let eps = 0.5 * k * min_slope.min(1e12);
        let cd = c * k;
        let map = build_determination_map(space, &fd, &g0, &sd, slope_g, eps, cd, center)?;
        let gap = |x: usize| fd.value(x).to_f64() - g0.value(x).to_f64();
        let orbits = starts
            .iter()
            .map(|&x0| {
                let orbit = run_orbit(space, &map, x0, None)?;
                let length = orbit_length_bound(space, &orbit, &fd, eps)?;
                let reached = orbit.termination == Termination::EmptyS && orbit.end() == center;
                let series_ok = if reached && orbit.points.len() > 1 {
                    let m = orbit.points.len();
                    let b: Vec<f64> = orbit.points[..m - 1].iter().map(|&x| sd[x].to_f64()).collect();
                    verify_series_bound(&orbit.steps[..m - 2], &b, cd)?.passed()
                } else {
                    reached
                };
                Ok(OrbitRun {
                    start: x0,
                    end: orbit.end(),
                    steps: orbit.steps.len(),
                    length: orbit.length,
                    length_bound: length.bound,
                    length_ok: length.holds,
                    termination: orbit.termination,
                    reached_center: reached,
                    series_ok,
                    start_gap: gap(x0),
                    membership_ok: membership_violations(&map, &orbit).is_empty(),
                    stall: (!reached).then(|| map.diagnose(orbit.end())),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let min_gap = (0..n)
            .filter(|&x| fd.is_finite_at(x) && g0.is_finite_at(x))
            .map(gap)
            .fold(f64::INFINITY, f64::min);
        let scale = (0..n).filter_map(|x| fd.value(x).finite()).fold(0.0f64, |m, v| m.max(v.abs()));
        runs.push(DilationRun {
            dilation: delta,
            eps,
            c: cd,
            orbits,
            min_gap,
            pointwise_holds: min_gap >= -tol(scale, 0.0),
        });
    }
    let passed = runs.iter().all(|r| r.pointwise_holds && r.orbits.iter().all(OrbitRun::passed));
    Ok(CoreReport {
        points: n,
        c,
        min_slope,
        regular_slope_pairs: cert.pairs,
        slope_domination_margin,
        mixed_pairs,
        mixed_worst_margin,
        dilations: runs,
        passed,
    })
}

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::equality::{verify_subdifferential_equality, EqualityReport};
use super::instance::DeterminationInstance;
use super::one_sided::{equality_tolerance, run_one_sided, OneSidedConfig, OneSidedReport};
use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::linalg::{dist, random_in_ball};
use crate::metric_space::{Coordinates, EuclideanGrid, MetricSpace};
use crate::plr::certify_plr;
use crate::subdifferential::slope_from_subdifferential;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeterminationConfig {
    pub one_sided: OneSidedConfig,
    /// Cap on the number of `δ̂`-ball lattice points used as targets.
    pub max_targets: usize,
    /// Sample points re-used as centres for runs aimed back at `x̄`.
    pub recentered: usize,
    /// Off-lattice probes behind the certified continuum deviation.
    pub probes: usize,
}

impl Default for DeterminationConfig {
    fn default() -> Self {
        DeterminationConfig {
            one_sided: OneSidedConfig::default(),
            max_targets: 400,
            recentered: 4,
            probes: 200,
        }
    }
}

impl DeterminationConfig {
    pub fn with_spacing(h: f64) -> Self {
        DeterminationConfig {
            one_sided: OneSidedConfig::with_spacing(h),
            ..Self::default()
        }
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.one_sided.sampling.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// `f − g` is constant on the sample and every run certified it.
    Determined,
    /// The subdifferentials differ; the experiment did not run.
    RejectedAtGate,
    /// A PLR certificate of `f` or `g` failed at `(c, δ, x̄)`.
    NotCertified,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub point: Vec<f64>,
    pub f: f64,
    pub g: f64,
    /// `f − g − a`.
    pub deviation: f64,
    pub slope_f: f64,
    pub slope_g: f64,
}

/// One target in one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRun {
    pub target: Vec<f64>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSummary {
    /// `"f_vs_g"` or `"g_vs_f"`.
    pub direction: String,
    pub runs: usize,
    pub failures: usize,
    pub orbits: usize,
    /// Orbits ending at their centre with `S = ∅` there.
    pub orbits_at_center: usize,
    pub length_bound_holds: bool,
    pub min_margin: f64,
    pub max_alpha: f64,
    pub min_alpha: f64,
    /// Failing targets, up to twenty.
    pub failing: Vec<TargetRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecenteredRun {
    pub center: Vec<f64>,
    pub forward: TargetRun,
    pub backward: TargetRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterminationReport {
    pub id: String,
    pub outcome: Outcome,
    pub passed: bool,
    pub constants: Constants,
    pub h: f64,
    pub eps: f64,
    pub tolerance: f64,
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_a: Option<f64>,
    pub subdifferential_equality_verified: bool,
    pub equality: EqualityReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plr_f: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plr_g: Option<bool>,
    /// Largest `|f − g − a|` over the `δ̂`-ball lattice sample.
    pub max_deviation: f64,
    /// Bound on `|f − g − a|` at off-lattice probes, propagated from the
    /// nearest certified lattice point with the Lipschitz bounds of `f, g`.
    pub certified_deviation: f64,
    /// Graphical-density surrogate: minima of `f − g` over finite-slope and
    /// all sample points agree.
    pub density_ok: bool,
    /// `|m_{f,g}(x) + m_{g,f}(x)| ≤ 2·tol` at every target.
    pub two_sided_ok: bool,
    pub forward: Option<DirectionSummary>,
    pub backward: Option<DirectionSummary>,
    pub recentered: Vec<RecenteredRun>,
    pub samples: Vec<SamplePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl DeterminationReport {
    /// Whether the run matched the instance's expectation.
    pub fn as_expected(&self, inst: &DeterminationInstance) -> bool {
        if inst.expected.equal_up_to_constant {
            self.passed
        } else {
            self.outcome == Outcome::RejectedAtGate
        }
    }

    /// CSV with columns `point,f,g,f-g-a,slope_f,slope_g`; coordinates are
    /// joined by `;` inside the first column.
    pub fn csv(&self) -> String {
        let mut out = String::from("point,f,g,f-g-a,slope_f,slope_g\n");
        for s in &self.samples {
            let point: Vec<String> = s.point.iter().map(|v| format!("{v:.12}")).collect();
            let _ = writeln!(
                out,
                "{},{:.15e},{:.15e},{:.6e},{:.12e},{:.12e}",
                point.join(";"),
                s.f,
                s.g,
                s.deviation,
                s.slope_f,
                s.slope_g
            );
        }
        out
    }

    /// `(radius, max deviation within radius)` pairs, by increasing radius.
    pub fn radius_profile(&self, center: &[f64]) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = self.samples.iter().map(|s| (dist(&s.point, center), s.deviation.abs())).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut running = 0.0f64;
        pts.into_iter()
            .map(|(r, d)| {
                running = running.max(d);
                (r, running)
            })
            .collect()
    }
}

fn summarize(direction: &str, runs: &[(Vec<f64>, Result<OneSidedReport>)]) -> DirectionSummary {
    let mut s = DirectionSummary {
        direction: direction.into(),
        runs: runs.len(),
        failures: 0,
        orbits: 0,
        orbits_at_center: 0,
        length_bound_holds: true,
        min_margin: f64::INFINITY,
        max_alpha: 0.0,
        min_alpha: f64::INFINITY,
        failing: Vec::new(),
    };
    for (target, r) in runs {
        let run = target_run(target, r);
        if let Ok(rep) = r {
            s.min_margin = s.min_margin.min(rep.direct_margin);
            s.max_alpha = s.max_alpha.max(rep.alpha);
            s.min_alpha = s.min_alpha.min(rep.alpha);
            for d in &rep.core.dilations {
                for o in &d.orbits {
                    s.orbits += 1;
                    s.orbits_at_center += o.reached_center as usize;
                    s.length_bound_holds &= o.length_ok;
                }
            }
        }
        if !run.passed {
            s.failures += 1;
            if s.failing.len() < 20 {
                s.failing.push(run);
            }
        }
    }
    s
}

fn target_run(target: &[f64], r: &Result<OneSidedReport>) -> TargetRun {
    match r {
        Ok(rep) => TargetRun {
            target: rep.target.clone(),
            passed: rep.passed,
            margin: Some(rep.direct_margin),
            error: None,
        },
        Err(e) => TargetRun {
            target: target.to_vec(),
            passed: false,
            margin: None,
            error: Some(e.to_string()),
        },
    }
}

fn gate_report(inst: &DeterminationInstance, cfg: &DeterminationConfig, equality: EqualityReport, outcome: Outcome, note: String) -> DeterminationReport {
    let constants = Constants::new(inst.c, inst.delta);
    let h = cfg.one_sided.h;
    DeterminationReport {
        id: inst.id.clone(),
        outcome,
        passed: false,
        constants,
        h,
        eps: cfg.one_sided.eps(),
        tolerance: equality_tolerance(cfg.one_sided.eps(), h, inst.f.lipschitz_bound(&inst.center, constants.delta_prime)),
        a: inst.offset(),
        expected_a: inst.expected.a,
        subdifferential_equality_verified: equality.equal,
        equality,
        plr_f: None,
        plr_g: None,
        max_deviation: f64::NAN,
        certified_deviation: f64::NAN,
        density_ok: false,
        two_sided_ok: false,
        forward: None,
        backward: None,
        recentered: Vec::new(),
        samples: Vec::new(),
        note: Some(note),
    }
}

/// Evenly spaced picks from `0..n`, at most `k` of them.
fn strided(n: usize, k: usize) -> Vec<usize> {
    if k == 0 || n == 0 {
        return Vec::new();
    }
    if n <= k {
        return (0..n).collect();
    }
    (0..k).map(|j| j * n / k).collect()
}

/// Runs the determination experiment on one instance.
///
/// The subdifferential-equality gate runs first; negative controls stop
/// there with witnesses. Otherwise both PLR certificates are checked, the
/// one-sided argument runs from `x̄` to every lattice point of `B°(x̄; δ̂)`
/// in both directions, and a few sample points are re-used as centres for
/// runs aimed back at `x̄`. The constant is `a = f(x̄) − g(x̄)`.
pub fn run_determination(inst: &DeterminationInstance, cfg: &DeterminationConfig) -> Result<DeterminationReport> {
    inst.validate()?;
    cfg.one_sided.validate()?;
    let sampling = &cfg.one_sided.sampling;
    let equality = verify_subdifferential_equality(inst, sampling)?;
    if !equality.equal {
        let note = format!("subdifferentials differ at {} sample points; experiment not run", equality.mismatched_points);
        return Ok(gate_report(inst, cfg, equality, Outcome::RejectedAtGate, note));
    }
    let plr_f = certify_plr(&inst.f, &inst.center, inst.c, inst.delta, sampling)?.passed();
    let plr_g = certify_plr(&inst.g, &inst.center, inst.c, inst.delta, sampling)?.passed();
    if !(plr_f && plr_g) {
        let mut rep = gate_report(inst, cfg, equality, Outcome::NotCertified, "PLR certificate failed".into());
        rep.plr_f = Some(plr_f);
        rep.plr_g = Some(plr_g);
        return Ok(rep);
    }

    let constants = Constants::new(inst.c, inst.delta);
    let h = cfg.one_sided.h;
    let eps = cfg.one_sided.eps();
    let center = &inst.center;
    let dim = inst.dim();
    let lf = inst.f.lipschitz_bound(center, constants.delta_prime);
    let lg = inst.g.lipschitz_bound(center, constants.delta_prime);
    let tolerance = equality_tolerance(eps, h, lf);
    let a = inst.offset();

    let sample = EuclideanGrid::on_lattice(center.clone(), h, vec![0; dim], constants.delta_hat, true)?;
    let samples: Vec<SamplePoint> = (0..sample.len())
        .into_par_iter()
        .map(|i| {
            let x = sample.coords(i);
            let (fv, gv) = (inst.f.eval(x), inst.g.eval(x));
            Ok(SamplePoint {
                point: x.to_vec(),
                f: fv,
                g: gv,
                deviation: fv - gv - a,
                slope_f: slope_from_subdifferential(&inst.f, x)?.to_f64(),
                slope_g: slope_from_subdifferential(&inst.g, x)?.to_f64(),
            })
        })
        .collect::<Result<_>>()?;

    // centres with finite slope; every point when f is real-valued
    let finite: Vec<usize> = (0..sample.len()).filter(|&i| samples[i].slope_f.is_finite()).collect();
    let targets: Vec<usize> = strided(finite.len(), cfg.max_targets).into_iter().map(|k| finite[k]).collect();
    let runs: Vec<(Vec<f64>, Result<OneSidedReport>, Result<OneSidedReport>)> = targets
        .par_iter()
        .map(|&i| {
            let x = sample.coords(i);
            let fwd = run_one_sided(&inst.f, &inst.g, center, inst.c, inst.delta, x, &cfg.one_sided);
            let bwd = run_one_sided(&inst.g, &inst.f, center, inst.c, inst.delta, x, &cfg.one_sided);
            (x.to_vec(), fwd, bwd)
        })
        .collect();
    let (fwd, bwd): (Vec<_>, Vec<_>) = runs.into_iter().map(|(x, f, b)| ((x.clone(), f), (x, b))).unzip();
    let two_sided_ok = fwd.iter().zip(&bwd).all(|((_, f), (_, b))| match (f, b) {
        (Ok(f), Ok(b)) => (f.direct_margin + b.direct_margin).abs() <= 2.0 * tolerance,
        _ => false,
    });
    let forward = summarize("f_vs_g", &fwd);
    let backward = summarize("g_vs_f", &bwd);

    // the theorem's route: centre at x, aim at x̄, radius δ/2
    let others: Vec<usize> = (0..sample.len()).filter(|&i| sample.coords(i) != center.as_slice()).collect();
    let recentered: Vec<RecenteredRun> = strided(others.len(), cfg.recentered)
        .into_par_iter()
        .map(|k| {
            let x = sample.coords(others[k]);
            let half = inst.delta / 2.0;
            let f = run_one_sided(&inst.f, &inst.g, x, inst.c, half, center, &cfg.one_sided);
            let b = run_one_sided(&inst.g, &inst.f, x, inst.c, half, center, &cfg.one_sided);
            RecenteredRun {
                center: x.to_vec(),
                forward: target_run(center, &f),
                backward: target_run(center, &b),
            }
        })
        .collect();

    let max_deviation = samples.iter().map(|s| s.deviation.abs()).fold(0.0, f64::max);
    let min_all = samples.iter().map(|s| s.f - s.g).fold(f64::INFINITY, f64::min);
    let min_finite = finite.iter().map(|&i| samples[i].f - samples[i].g).fold(f64::INFINITY, f64::min);
    let density_ok = (min_all - min_finite).abs() <= tolerance;

    let verified: Vec<bool> = {
        let mut ok = vec![false; sample.len()];
        for (&i, ((_, f), (_, b))) in targets.iter().zip(fwd.iter().zip(&bwd)) {
            ok[i] = matches!((f, b), (Ok(f), Ok(b)) if f.passed && b.passed);
        }
        ok
    };
    let certified_deviation = certified_deviation(&sample, &samples, &verified, center, constants.delta_hat, lf + lg, cfg.probes, sampling.seed);

    let expected_ok = inst.expected.a.is_none_or(|e| (a - e).abs() <= 1e-12 * (1.0 + e.abs()));
    let passed = forward.failures == 0
        && backward.failures == 0
        && recentered.iter().all(|r| r.forward.passed && r.backward.passed)
        && max_deviation <= tolerance
        && two_sided_ok
        && density_ok
        && expected_ok;
    Ok(DeterminationReport {
        id: inst.id.clone(),
        outcome: if passed { Outcome::Determined } else { Outcome::Failed },
        passed,
        constants,
        h,
        eps,
        tolerance,
        a,
        expected_a: inst.expected.a,
        subdifferential_equality_verified: true,
        equality,
        plr_f: Some(plr_f),
        plr_g: Some(plr_g),
        max_deviation,
        certified_deviation,
        density_ok,
        two_sided_ok,
        forward: Some(forward),
        backward: Some(backward),
        recentered,
        samples,
        note: (!expected_ok).then(|| format!("a = {a} differs from the stated constant")),
    })
}

/// `max_z |(f−g)(ẑ) − a| + L‖z − ẑ‖` over seeded probes `z` in the open
/// `δ̂`-ball, `ẑ` the nearest verified lattice point. Infinite when no
/// lattice point was verified.
#[allow(clippy::too_many_arguments)]
fn certified_deviation(
    grid: &EuclideanGrid,
    samples: &[SamplePoint],
    verified: &[bool],
    center: &[f64],
    radius: f64,
    lipschitz: f64,
    probes: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_D15C);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let z = random_in_ball(center, radius, &mut rng);
        let nearest = (0..grid.len())
            .filter(|&i| verified[i])
            .map(|i| (dist(grid.coords(i), &z), i))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let Some((d, i)) = nearest else { return f64::INFINITY };
        worst = worst.max(samples[i].deviation.abs() + lipschitz * d);
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub h: f64,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub certified_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub id: String,
    pub rows: Vec<RefinementRow>,
    /// The certified deviation decreases strictly at every halving.
    pub monotone: bool,
}

/// Reruns the experiment at `h0, h0/2, …` (`halvings` halvings).
pub fn refinement_study(inst: &DeterminationInstance, h0: f64, halvings: usize, base: &DeterminationConfig) -> Result<RefinementReport> {
    if !(h0 > 0.0) {
        return Err(Error::input("initial spacing must be positive"));
    }
    let mut rows = Vec::with_capacity(halvings + 1);
    for k in 0..=halvings {
        let h = h0 / f64::powi(2.0, k as i32);
        let mut cfg = base.clone();
        cfg.one_sided.h = h;
        cfg.one_sided.eps = base.one_sided.eps.map(|e| e / f64::powi(2.0, k as i32));
        let rep = run_determination(inst, &cfg)?;
        rows.push(RefinementRow {
            h,
            tolerance: rep.tolerance,
            max_deviation: rep.max_deviation,
            certified_deviation: rep.certified_deviation,
            passed: rep.passed,
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].certified_deviation < w[0].certified_deviation);
    Ok(RefinementReport { id: inst.id.clone(), rows, monotone })
}

#[cfg(test)]
mod tests {
    use super::super::instance::builtin_instance;
    use super::*;

    #[test]
    fn constant_shift_is_recovered() {
        let inst = builtin_instance("shift_2p5").unwrap();
        let rep = run_determination(&inst, &DeterminationConfig::default()).unwrap();
        assert!(rep.passed, "{:?}", rep.forward);
        assert_eq!(rep.outcome, Outcome::Determined);
        assert!((rep.a - 2.5).abs() < 1e-12);
        assert!(rep.max_deviation <= rep.tolerance);
        assert_eq!(rep.constants.delta_hat, 1.0 / 18.0);
        let fwd = rep.forward.as_ref().unwrap();
        assert_eq!(fwd.orbits, fwd.orbits_at_center);
        assert!(fwd.length_bound_holds);
        assert!(rep.as_expected(&inst));
    }

    #[test]
    fn doubled_function_is_refused() {
        let inst = builtin_instance("neg_scaled").unwrap();
        let rep = run_determination(&inst, &DeterminationConfig::default()).unwrap();
        assert_eq!(rep.outcome, Outcome::RejectedAtGate);
        assert!(!rep.subdifferential_equality_verified);
        assert!(!rep.equality.witnesses.is_empty());
        assert!(rep.forward.is_none() && rep.samples.is_empty());
        assert!(rep.as_expected(&inst));
    }

    #[test]
    fn csv_and_profile_cover_the_sample() {
        let inst = builtin_instance("kink_m3").unwrap();
        let rep = run_determination(&inst, &DeterminationConfig::default()).unwrap();
        assert!(rep.passed);
        let csv = rep.csv();
        assert_eq!(csv.lines().count(), rep.samples.len() + 1);
        assert!(csv.starts_with("point,f,g,f-g-a,slope_f,slope_g"));
        let prof = rep.radius_profile(&inst.center);
        assert_eq!(prof.len(), rep.samples.len());
        assert!(prof.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
    }

    #[test]
    fn strided_picks_are_spread() {
        assert_eq!(strided(10, 3), vec![0, 3, 6]);
        assert_eq!(strided(2, 5), vec![0, 1]);
        assert!(strided(4, 0).is_empty());
    }
}

//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use slopekit::constants::Constants;
use slopekit::determination::{
    builtin_instance, builtin_instances, refinement_study, run_determination, DeterminationConfig, Outcome,
    SMOOTH_POSITIVE,
};
use slopekit::ekeland::{ekeland_point, verify_ekeland};
use slopekit::linalg::norm;
use slopekit::metric_space::{Coordinates, EuclideanGrid, FiniteMetricSpace, MetricSpace, ScalarField};
use slopekit::plr::{certify_plr, representation_sequence_on_grid, sharp_min_transform, verify_series_bound, Sampling};
use slopekit::slope::discrete_slope;
use slopekit::subdifferential::{slope_from_subdifferential, Catalog, Expr};
use slopekit::ExtReal;

type Outcome_ = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome_ {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn constants() -> Outcome_ {
    let k = Constants::new(1.0, 1.0);
    let ok = k.delta_prime == 1.0 / 9.0 && k.c_prime == 6.0 && k.delta_hat == 1.0 / 18.0;
    check(ok, format!("delta' = {}, c' = {}, delta_hat = {}", k.delta_prime, k.c_prime, k.delta_hat))
}

fn ekeland() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=50);
        let dim = rng.gen_range(1..=3);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let space = FiniteMetricSpace::from_points(&pts).map_err(|e| e.to_string())?;
        let x0 = rng.gen_range(0..n);
        let values: Vec<ExtReal> = (0..n)
            .map(|i| {
                if i != x0 && rng.gen_bool(0.15) {
                    ExtReal::PosInf
                } else {
                    ExtReal::Finite(rng.gen_range(-5.0..5.0))
                }
            })
            .collect();
        let f = ScalarField::new(values).map_err(|e| e.to_string())?;
        let lambda = 10f64.powf(rng.gen_range(-2.0..1.0));
        let r = ekeland_point(&space, &f, x0, lambda).map_err(|e| e.to_string())?;
        let v = verify_ekeland(&space, &f, x0, lambda, r.x_lambda).map_err(|e| e.to_string())?;
        violations += (!v.descent_holds) as usize + v.strict_violations.len();
    }
    check(violations == 0, format!("200 random spaces, {violations} violations"))
}

fn slope_characterization() -> Outcome_ {
    let h = 1e-2;
    let eps = 4.0 * h;
    let radius = 0.6;
    let catalog = Catalog::builtin();
    let mut total = 0usize;
    let mut within = 0usize;
    let mut worst_ratio = 0.0f64;
    for e in catalog.entries.iter().filter(|e| e.f_regular_flag && e.dim() <= 2) {
        let center = vec![0.0; e.dim()];
        let grid = EuclideanGrid::new(e.dim(), center.clone(), radius, h).map_err(|x| x.to_string())?;
        let field = e.field(&grid).map_err(|x| x.to_string())?;
        let bound = 5.0 * (eps + h) * (1.0 + e.params.curvature_bound(&center, radius));
        let ratios: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .filter(|&i| norm(grid.coords(i)) <= radius - eps)
            .map(|i| {
                let d = discrete_slope(&grid, &field, i, eps).unwrap().value.to_f64();
                let a = slope_from_subdifferential(&e.params, grid.coords(i)).unwrap().to_f64();
                (d - a).abs() / bound
            })
            .collect();
        total += ratios.len();
        within += ratios.iter().filter(|&&r| r <= 1.0).count();
        worst_ratio = ratios.iter().copied().fold(worst_ratio, f64::max);
    }
    let share = within as f64 / total as f64;
    check(
        share >= 0.99 && worst_ratio <= 10.0,
        format!("{:.4}% of {total} interior points within bound, worst error {worst_ratio:.3}x bound", 100.0 * share),
    )
}

fn plr_certification() -> Outcome_ {
    let catalog = Catalog::builtin();
    let sampling = Sampling::default();
    let mut runs = 0;
    for e in catalog.entries.iter().filter(|e| e.is_convex()) {
        let center = vec![0.0; e.dim()];
        for c in [0.1, 1.0, 10.0] {
            for delta in [0.5, 1.0] {
                let cert = certify_plr(&e.params, &center, c, delta, &sampling).map_err(|x| x.to_string())?;
                if !cert.passed() {
                    return Err(format!("{} fails at c = {c}, delta = {delta}", e.id));
                }
                runs += 1;
            }
        }
    }
    let neg = &catalog.get("neg_sq_norm").unwrap().params;
    let ok = certify_plr(neg, &[0.0, 0.0], 1.0, 2.0, &sampling).map_err(|x| x.to_string())?;
    let bad = certify_plr(neg, &[0.0, 0.0], 0.1, 2.0, &sampling).map_err(|x| x.to_string())?;
    let witness = bad.violations.first().map(|v| (v.x.clone(), v.y.clone(), v.margin));
    check(
        ok.passed() && !bad.passed() && witness.is_some(),
        format!("{runs} convex certificates pass; -|x|^2 passes at c = 1, fails at c = 0.1 with witness {witness:?}"),
    )
}

fn valid_series(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, f64) {
    let len = rng.gen_range(2..40);
    let c = rng.gen_range(0.05..2.0);
    let a: Vec<f64> = (0..len).map(|_| rng.gen_range(1e-3..0.1)).collect();
    let mut b = vec![rng.gen_range(0.01..3.0)];
    for an in &a {
        let bn = *b.last().unwrap();
        let shrink = rng.gen_range(0.5..1.0);
        let push = rng.gen_range(0.0..0.99);
        b.push(bn * shrink + push * 2.0 * c * (2.0 + bn) * an);
    }
    (a, b, c)
}

fn series() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut respected = 0;
    for _ in 0..1000 {
        let (a, b, c) = valid_series(&mut rng);
        let r = verify_series_bound(&a, &b, c).map_err(|e| e.to_string())?;
        respected += (r.hypothesis_holds && r.bound_holds == Some(true)) as usize;
    }
    let mut detected = 0;
    for _ in 0..100 {
        let (a, mut b, c) = valid_series(&mut rng);
        let k = rng.gen_range(0..a.len());
        b[k + 1] = b[k] + 2.0 * c * (2.0 + b[k]) * a[k] + rng.gen_range(0.01..1.0);
        for n in k + 1..a.len() {
            b[n + 1] = b[n] + 0.5 * 2.0 * c * (2.0 + b[n]) * a[n];
        }
        let r = verify_series_bound(&a, &b, c).map_err(|e| e.to_string())?;
        detected += (r.violation_index == Some(k)) as usize;
    }
    check(
        respected == 1000 && detected == 100,
        format!("{respected}/1000 bounds respected, {detected}/100 planted violations found at the right index"),
    )
}

fn sharp_minimum() -> Outcome_ {
    let sampling = Sampling::default();
    let mut worst = f64::INFINITY;
    let mut lines = Vec::new();
    for inst in builtin_instances().into_iter().filter(|i| i.expected.equal_up_to_constant) {
        let p_min = inst.f.subdifferential(&inst.center).min_norm_element().map_err(|e| e.to_string())?;
        // rescale when the slope at x̄ is not below 1, as the one-sided argument does
        let alpha = if norm(&p_min) < 1.0 { 1.0 } else { 0.5 / norm(&p_min) };
        let f = if alpha < 1.0 { Expr::scale(alpha, inst.f.clone()) } else { inst.f.clone() };
        let p: Vec<f64> = p_min.iter().map(|v| alpha * v).collect();
        let r = sharp_min_transform(&f, &inst.center, inst.c, inst.delta, &p, &sampling).map_err(|e| e.to_string())?;
        if !(r.min_slope >= 1.0 - 1e-6 && r.minimum_holds) {
            return Err(format!("{}: min slope {}, minimum holds {}", inst.id, r.min_slope, r.minimum_holds));
        }
        worst = worst.min(r.min_slope);
        lines.push(inst.id);
    }
    check(true, format!("{} positive instances, smallest slope of f1 {worst:.6}", lines.len()))
}

fn representation() -> Outcome_ {
    let catalog = Catalog::builtin();
    let cases: [(&str, Vec<f64>, f64); 5] = [
        ("linear", vec![0.0, 0.0], 2.5e-3),
        ("neg_sq_norm", vec![0.5, 0.0], 2.5e-3),
        ("saddle", vec![0.3, 0.4], 2.5e-3),
        ("abs_plus_sq", vec![0.5], 1e-3),
        ("euclid_norm", vec![0.3, 0.0], 2.5e-3),
    ];
    let mut checked = 0;
    for (id, center, h) in cases {
        let f = &catalog.get(id).unwrap().params;
        let r = slope_from_subdifferential(f, &center).unwrap().to_f64();
        let start = (1.0 / r).ceil() as usize + 1;
        let ns: Vec<usize> = (start..start + 10).collect();
        let (_, rep) = representation_sequence_on_grid(f, &center, 1.0, &ns, 0.25, h, &Sampling::default())
            .map_err(|e| format!("{id}: {e}"))?;
        if !rep.passed || rep.steps.iter().any(|s| !s.in_range) {
            let bad = rep.steps.iter().find(|s| !s.passed());
            return Err(format!("{id}: failing step {bad:?}"));
        }
        checked += rep.steps.len();
    }
    check(true, format!("5 fields, {checked} indices satisfy quotient, distance and slope-gap bounds"))
}

fn determination() -> Outcome_ {
    let cfg = DeterminationConfig::default();
    let instances = builtin_instances();
    let reports: Vec<_> = instances
        .par_iter()
        .map(|inst| run_determination(inst, &cfg).map_err(|e| format!("{}: {e}", inst.id)))
        .collect::<Result<_, _>>()?;
    let mut notes = Vec::new();
    let mut ok = true;
    for (inst, rep) in instances.iter().zip(&reports) {
        if inst.expected.equal_up_to_constant {
            let (f, b) = (rep.forward.as_ref().unwrap(), rep.backward.as_ref().unwrap());
            let terminus = f.orbits == f.orbits_at_center && b.orbits == b.orbits_at_center;
            let lengths = f.length_bound_holds && b.length_bound_holds;
            let good = rep.passed && terminus && lengths && (rep.a - inst.expected.a.unwrap()).abs() < 1e-12;
            ok &= good;
            notes.push(format!(
                "{} a={} dev={:.1e}<=tol={:.2} orbits={}",
                inst.id,
                rep.a,
                rep.max_deviation,
                rep.tolerance,
                f.orbits + b.orbits
            ));
        } else {
            let good = rep.outcome == Outcome::RejectedAtGate && !rep.equality.witnesses.is_empty();
            ok &= good;
            notes.push(format!("{} rejected with {} witnesses", inst.id, rep.equality.witnesses.len()));
        }
    }
    check(ok, notes.join("; "))
}

fn refinement() -> Outcome_ {
    let mut notes = Vec::new();
    let mut ok = true;
    for id in SMOOTH_POSITIVE {
        let inst = builtin_instance(id).map_err(|e| e.to_string())?;
        let r = refinement_study(&inst, 4e-2, 3, &DeterminationConfig::default()).map_err(|e| e.to_string())?;
        ok &= r.monotone && r.rows.iter().all(|row| row.passed);
        let devs: Vec<String> = r.rows.iter().map(|row| format!("{:.2e}", row.certified_deviation)).collect();
        notes.push(format!("{id} [{}]", devs.join(" > ")));
    }
    check(ok, notes.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome_); 9] = [
        ("constant exactness", constants),
        ("Ekeland oracle", ekeland),
        ("slope characterization", slope_characterization),
        ("PLR certification", plr_certification),
        ("series lemma", series),
        ("sharp-minimum transform", sharp_minimum),
        ("representation sequences", representation),
        ("determination end-to-end", determination),
        ("refinement convergence", refinement),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = run();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

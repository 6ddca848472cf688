use proptest::prelude::*;

use slopekit::ekeland::{ekeland_point, verify_ekeland};
use slopekit::linalg::{dist, dot, norm};
use slopekit::metric_space::{sublevel_restrict, FiniteMetricSpace, MetricSpace, ScalarField};
use slopekit::orbit::{membership_violations, run_orbit, ExplicitMap, MultiMap, Termination};
use slopekit::slope::discrete_slope;
use slopekit::subdifferential::min_norm::{min_norm_exact, min_norm_wolfe};
use slopekit::ExtReal;

fn points(max: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0..3.0f64, dim), 1..=max)
}

fn space_and_field(max: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (1..=max).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 2), n),
            prop::collection::vec(-5.0..5.0f64, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn balls_grow_with_the_radius(pts in points(30, 2), r1 in 0.0..4.0f64, extra in 0.0..4.0f64) {
        let s = FiniteMetricSpace::from_points(&pts).unwrap();
        let small = s.closed_ball(0, r1);
        let big = s.closed_ball(0, r1 + extra);
        prop_assert!(small.iter().all(|x| big.contains(x)));
        prop_assert!(s.open_ball(0, r1).iter().all(|x| small.contains(x)));
    }

    #[test]
    fn broken_triangles_are_rejected(a in 0.1..1.0f64, b in 0.1..1.0f64, gap in 0.01..1.0f64) {
        let c = a + b + gap;
        let d = vec![vec![0.0, a, c], vec![a, 0.0, b], vec![c, b, 0.0]];
        let ids = vec!["x".into(), "y".into(), "z".into()];
        prop_assert!(FiniteMetricSpace::new(ids, d).is_err());
    }

    #[test]
    fn sublevel_sets_are_exact((pts, vals) in space_and_field(30), pick in any::<prop::sample::Index>()) {
        let s = FiniteMetricSpace::from_points(&pts).unwrap();
        let f = ScalarField::from_finite(vals.clone()).unwrap();
        let x0 = pick.index(pts.len());
        let (y, fy) = sublevel_restrict(&s, &f, x0).unwrap();
        let expected: Vec<usize> = (0..pts.len()).filter(|&i| vals[i] <= vals[x0]).collect();
        prop_assert_eq!(y.members(), expected.as_slice());
        for k in 0..y.len() {
            prop_assert_eq!(fy.value(k), f.value(y.to_parent(k)));
        }
    }

    #[test]
    fn slopes_scale_with_the_function((pts, vals) in space_and_field(25), alpha in 0.1..10.0f64, eps in 0.1..3.0f64) {
        let s = FiniteMetricSpace::from_points(&pts).unwrap();
        let f = ScalarField::from_finite(vals).unwrap();
        let g = f.scaled(alpha);
        for x in 0..s.len() {
            let a = discrete_slope(&s, &f, x, eps).unwrap().value.to_f64();
            let b = discrete_slope(&s, &g, x, eps).unwrap().value.to_f64();
            prop_assert!((b - alpha * a).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn sublevel_restriction_keeps_slopes((pts, vals) in space_and_field(25), pick in any::<prop::sample::Index>(), eps in 0.1..3.0f64) {
        let s = FiniteMetricSpace::from_points(&pts).unwrap();
        let f = ScalarField::from_finite(vals).unwrap();
        let x0 = pick.index(pts.len());
        let (y, fy) = sublevel_restrict(&s, &f, x0).unwrap();
        for k in 0..y.len() {
            let inner = discrete_slope(&y, &fy, k, eps).unwrap().value;
            let outer = discrete_slope(&s, &f, y.to_parent(k), eps).unwrap().value;
            prop_assert_eq!(inner, outer);
        }
    }

    #[test]
    fn ekeland_points_pass_exhaustive_checks(
        (pts, vals) in space_and_field(40),
        holes in prop::collection::vec(any::<bool>(), 40),
        lambda in 0.01..5.0f64,
        pick in any::<prop::sample::Index>(),
    ) {
        let s = FiniteMetricSpace::from_points(&pts).unwrap();
        let x0 = pick.index(pts.len());
        let values: Vec<ExtReal> = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| if i != x0 && holes[i] { ExtReal::PosInf } else { ExtReal::Finite(v) })
            .collect();
        let f = ScalarField::new(values).unwrap();
        let r = ekeland_point(&s, &f, x0, lambda).unwrap();
        prop_assert!(verify_ekeland(&s, &f, x0, lambda, r.x_lambda).unwrap().passed());
        prop_assert!(r.decrease >= 0.0);
    }

    #[test]
    fn wolfe_matches_enumeration(pts in prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 2), 1..=8)) {
        let exact = min_norm_exact(&pts).unwrap();
        let wolfe = min_norm_wolfe(&pts).unwrap();
        prop_assert!((norm(&exact) - norm(&wolfe)).abs() < 1e-7, "{:?} vs {:?}", exact, wolfe);
        // optimality: ⟨q, v⟩ ≥ ‖q‖² for every vertex v
        let q2 = dot(&exact, &exact);
        prop_assert!(pts.iter().all(|v| dot(&exact, v) >= q2 - 1e-9));
        prop_assert!(dist(&exact, &wolfe) < 1e-5);
    }

    #[test]
    fn orbits_follow_their_map(n in 2..25usize, edges in prop::collection::vec((0..25usize, 0..25usize), 0..60), pick in any::<prop::sample::Index>()) {
        let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 * 0.7, (i * i % 5) as f64]).collect();
        let s = FiniteMetricSpace::from_points(&pts).unwrap();
        let mut images = vec![Vec::new(); n];
        for (a, b) in edges {
            if a < n && b < n && a != b {
                images[a].push(b);
            }
        }
        let map = ExplicitMap::new(images).unwrap();
        let o = run_orbit(&s, &map, pick.index(n), None).unwrap();
        prop_assert!(membership_violations(&map, &o).is_empty());
        prop_assert_eq!(o.steps.len() + 1, o.points.len());
        prop_assert!((o.length - o.steps.iter().sum::<f64>()).abs() < 1e-12);
        prop_assert!(o.steps.iter().all(|&d| d > 0.0));
        match o.termination {
            Termination::EmptyS => prop_assert!(map.image(o.end()).is_empty()),
            Termination::InfiniteLengthFlag => prop_assert!(o.points[..o.points.len() - 1].contains(&o.end())),
            Termination::MaxIter => prop_assert!(o.steps.len() >= 10 * n),
        }
        // each step goes to the farthest image point
        for (w, &d) in o.points.windows(2).zip(&o.steps) {
            let far = map.image(w[0]).iter().map(|&y| s.dist(w[0], y)).fold(0.0, f64::max);
            prop_assert_eq!(d, far);
        }
    }
}

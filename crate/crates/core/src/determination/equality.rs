use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instance::DeterminationInstance;
use crate::error::{Error, Result};
use crate::linalg::direction_fan;
use crate::metric_space::{Coordinates, MetricSpace};
use crate::plr::Sampling;
use crate::subdifferential::SubdifferentialOracle;

/// Random directions added to the fixed fan at every point.
const EXTRA_DIRECTIONS: usize = 16;
const MAX_WITNESSES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityWitness {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    pub support_f: f64,
    pub support_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityReport {
    pub equal: bool,
    pub points: usize,
    pub directions_per_point: usize,
    /// Points where the support functions differ.
    pub mismatched_points: usize,
    /// Worst direction at the first mismatched points, in grid order.
    pub witnesses: Vec<EqualityWitness>,
}

fn support_tol(a: f64, b: f64) -> f64 {
    1e-9 * (1.0 + a.abs() + b.abs())
}

/// Compares `∂f` and `∂g` on a lattice sample of `B°(x̄; δ)` through their
/// support functions: two compact convex sets are equal iff `σ_A(d) = σ_B(d)`
/// for every direction, which is checked on a fan.
pub fn verify_subdifferential_equality(inst: &DeterminationInstance, sampling: &Sampling) -> Result<EqualityReport> {
    inst.validate()?;
    sampling.validate()?;
    let grid = sampling.open_ball(&inst.center, inst.delta)?;
    let dim = inst.dim();
    let per_point: Vec<Result<Option<EqualityWitness>>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.coords(i);
            let sf = inst.f.subdifferential_at(x).ok_or(Error::Coverage { point: i })?;
            let sg = inst.g.subdifferential_at(x).ok_or(Error::Coverage { point: i })?;
            let mut rng = sampling.rng_for(i);
            let mut worst: Option<(f64, EqualityWitness)> = None;
            for d in direction_fan(dim, EXTRA_DIRECTIONS, &mut rng) {
                let (a, b) = (sf.support(&d), sg.support(&d));
                let gap = (a - b).abs();
                if gap > support_tol(a, b) && worst.as_ref().is_none_or(|w| gap > w.0) {
                    let w = EqualityWitness { point: x.to_vec(), direction: d, support_f: a, support_g: b };
                    worst = Some((gap, w));
                }
            }
            Ok(worst.map(|w| w.1))
        })
        .collect();
    let mut witnesses = Vec::new();
    let mut mismatched = 0;
    for r in per_point {
        if let Some(w) = r? {
            mismatched += 1;
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(w);
            }
        }
    }
    let fan = direction_fan(dim, EXTRA_DIRECTIONS, &mut sampling.rng_for(0)).len();
    Ok(EqualityReport {
        equal: mismatched == 0,
        points: grid.len(),
        directions_per_point: fan,
        mismatched_points: mismatched,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::super::instance::{builtin_instance, Expected};
    use super::*;
    use crate::subdifferential::{Catalog, Expr};

    fn pair(f: Expr, g: Expr, center: Vec<f64>) -> DeterminationInstance {
        DeterminationInstance {
            id: "t".into(),
            f,
            g,
            center,
            c: 1.0,
            delta: 1.0,
            expected: Expected { equal_up_to_constant: false, a: None },
        }
    }

    #[test]
    fn constant_shift_is_invisible() {
        let f = Catalog::builtin().get("l1").unwrap().params.clone();
        let r = verify_subdifferential_equality(&pair(f.clone(), f.shifted(5.0), vec![0.0, 0.0]), &Sampling::default())
            .unwrap();
        assert!(r.equal);
        assert!(r.points > 200);
    }

    #[test]
    fn doubled_quadratic_differs_off_the_origin() {
        let f = Catalog::builtin().get("half_sq_norm").unwrap().params.clone();
        let g = Expr::scale(2.0, f.clone());
        let r = verify_subdifferential_equality(&pair(f, g, vec![0.0, 0.0]), &Sampling::default()).unwrap();
        assert!(!r.equal);
        // gradients x and 2x agree only at the origin
        assert_eq!(r.mismatched_points, r.points - 1);
        let w = &r.witnesses[0];
        assert!(crate::linalg::norm(&w.point) > 0.0);
        assert!((w.support_g - 2.0 * w.support_f).abs() < 1e-12);
    }

    #[test]
    fn negative_controls_have_witnesses() {
        for id in ["neg_scaled", "neg_perturbed_kink", "neg_shifted_arg"] {
            let r = verify_subdifferential_equality(&builtin_instance(id).unwrap(), &Sampling::default()).unwrap();
            assert!(!r.equal, "{id}");
            assert!(!r.witnesses.is_empty());
        }
        // |x| against |x| + x²: the intervals match only at 0
        let r = verify_subdifferential_equality(&builtin_instance("neg_perturbed_kink").unwrap(), &Sampling::default())
            .unwrap();
        assert!(r.witnesses.iter().all(|w| w.point[0] != 0.0));
    }
}

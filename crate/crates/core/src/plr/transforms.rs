use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certificate::{certify_plr, certify_plr_with, PlrCertificate, Status};
use super::sampling::Sampling;
use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, scale};
use crate::metric_space::{Coordinates, MetricSpace};
use crate::subdifferential::{slope_from_subdifferential, sum_oracle, CatalogEntry, Expr};

/// Re-certifies `αf` with the same `(c, δ)`.
///
/// A failed input certificate stays failed: the result is the conjunction of
/// the input status and the fresh check.
pub fn scale_plr(f: &Expr, cert: &PlrCertificate, alpha: f64, sampling: &Sampling) -> Result<PlrCertificate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::input(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let scaled = Expr::scale(alpha, f.clone());
    let mut out = certify_plr(&scaled, &cert.center, cert.c, cert.delta, sampling)?;
    if !cert.passed() {
        out.status = Status::Fail;
        out.note = Some("input certificate failed; failure propagated".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddConvexReport {
    /// Lipschitz bound of `h` on the ball.
    pub lipschitz: f64,
    /// `c(L + 1)`.
    pub coefficient: f64,
    pub certificate: PlrCertificate,
}

/// Certifies `f + h` at coefficient `c(L+1)` and the same radius, with
/// `∂(f+h) = ∂f + ∂h` from the sum rule.
pub fn add_convex_plr(
    f: &Expr,
    cert: &PlrCertificate,
    h: &CatalogEntry,
    sampling: &Sampling,
) -> Result<AddConvexReport> {
    h.validate()?;
    if !h.is_convex() {
        return Err(Error::input(format!("{} is not in the convex class", h.id)));
    }
    let lipschitz = h.params.lipschitz_bound(&cert.center, cert.delta);
    let coefficient = cert.c * (lipschitz + 1.0);
    let oracle = sum_oracle(f, h)?;
    let eval = |x: &[f64]| f.eval(x) + h.eval(x);
    let mut certificate = certify_plr_with(&eval, &oracle, &cert.center, coefficient, cert.delta, sampling)?;
    if !cert.passed() {
        certificate.status = Status::Fail;
        certificate.note = Some("input certificate failed; failure propagated".into());
    }
    Ok(AddConvexReport { lipschitz, coefficient, certificate })
}

/// `f₁(x) = f(x) − ⟨p, x − x̄⟩ + 4‖x − x̄‖`.
pub fn sharp_min_expr(f: &Expr, center: &[f64], p: &[f64]) -> Expr {
    Expr::sum(vec![
        f.clone(),
        Expr::Affine { slope: scale(p, -1.0), offset: dot(p, center) },
        Expr::NormDist { center: center.to_vec(), weight: 4.0 },
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpMinReport {
    pub f1: Expr,
    pub constants: Constants,
    pub p: Vec<f64>,
    pub points: usize,
    pub f1_center: f64,
    pub f1_sample_min: f64,
    /// `f₁(x̄) ≤ min` over the sampled `δ′`-ball.
    pub minimum_holds: bool,
    /// Smallest min-norm slope of `∂f₁` over the punctured sample.
    pub min_slope: f64,
    pub min_slope_at: Vec<f64>,
    /// `min_slope ≥ 1`.
    pub slope_bound_holds: bool,
    /// PLR certificate of `f₁` at `(c′, δ′)`.
    pub plr: PlrCertificate,
    pub passed: bool,
}

/// Builds `f₁` and checks that `x̄` is a sharp minimum of it on `B°(x̄; δ′)`.
pub fn sharp_min_transform(
    f: &Expr,
    center: &[f64],
    c: f64,
    delta: f64,
    p: &[f64],
    sampling: &Sampling,
) -> Result<SharpMinReport> {
    f.validate()?;
    if p.len() != center.len() || center.len() != f.dim() {
        return Err(Error::input("p, center and f must share one dimension"));
    }
    if !(norm(p) < 1.0) {
        return Err(Error::precondition(format!("‖p‖ = {} must be below 1", norm(p)), None));
    }
    let gap = f.subdifferential(center).distance(p)?;
    if gap > 1e-9 {
        return Err(Error::precondition(format!("p is not a subgradient at the center (distance {gap:e})"), None));
    }
    let base = certify_plr(f, center, c, delta, sampling)?;
    if !base.passed() {
        return Err(Error::precondition(
            format!("f is not certified PLR at c = {c}, delta = {delta}"),
            None,
        ));
    }
    let constants = Constants::new(c, delta);
    let f1 = sharp_min_expr(f, center, p);
    let grid = sampling.open_ball(center, constants.delta_prime)?;
    let f1_center = f1.eval(center);
    let per_point: Vec<(f64, Option<f64>)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.coords(i);
            let v = f1.eval(x);
            let s = if x == center {
                None
            } else {
                Some(slope_from_subdifferential(&f1, x).map(|s| s.to_f64()).unwrap_or(f64::INFINITY))
            };
            (v, s)
        })
        .collect();
    let f1_sample_min = per_point.iter().map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
    let (mut min_slope, mut at) = (f64::INFINITY, center.to_vec());
    for (i, (_, s)) in per_point.iter().enumerate() {
        if let Some(s) = s {
            if *s < min_slope {
                min_slope = *s;
                at = grid.coords(i).to_vec();
            }
        }
    }
    let plr = certify_plr(&f1, center, constants.c_prime, constants.delta_prime, sampling)?;
    let minimum_holds = f1_center <= f1_sample_min;
    let slope_bound_holds = min_slope >= 1.0;
    Ok(SharpMinReport {
        passed: minimum_holds && slope_bound_holds && plr.passed(),
        f1,
        constants,
        p: p.to_vec(),
        points: grid.len(),
        f1_center,
        f1_sample_min,
        minimum_holds,
        min_slope,
        min_slope_at: at,
        slope_bound_holds,
        plr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subdifferential::{Catalog, Kind};

    fn entry(id: &str) -> CatalogEntry {
        Catalog::builtin().get(id).unwrap().clone()
    }

    #[test]
    fn scaling_keeps_the_certificate() {
        let f = entry("neg_sq_norm").params;
        let s = Sampling::default();
        let cert = certify_plr(&f, &[0.0, 0.0], 1.0, 1.0, &s).unwrap();
        assert!(scale_plr(&f, &cert, 0.5, &s).unwrap().passed());
        assert!(scale_plr(&f, &cert, 0.999, &s).unwrap().passed());
        assert!(scale_plr(&f, &cert, 1.0, &s).is_err());
        assert!(scale_plr(&f, &cert, 0.0, &s).is_err());
        let broken = certify_plr(&f, &[0.0, 0.0], 0.1, 2.0, &s).unwrap();
        let scaled = scale_plr(&f, &broken, 0.5, &s).unwrap();
        assert!(!scaled.passed());
    }

    #[test]
    fn adding_convex_functions() {
        let f = entry("neg_sq_norm").params;
        let s = Sampling::default();
        let cert = certify_plr(&f, &[0.0, 0.0], 1.0, 1.0, &s).unwrap();

        let zero = CatalogEntry::new("zero", Kind::Smooth, Expr::zero(2)).unwrap();
        let r = add_convex_plr(&f, &cert, &zero, &s).unwrap();
        assert_eq!((r.lipschitz, r.coefficient), (0.0, 1.0));
        assert!(r.certificate.passed());

        let lin = CatalogEntry::new("e1", Kind::Smooth, Expr::Affine { slope: vec![1.0, 0.0], offset: 0.0 }).unwrap();
        let r = add_convex_plr(&f, &cert, &lin, &s).unwrap();
        assert_eq!(r.coefficient, 2.0);
        assert!(r.certificate.passed());

        // the sharp-minimum perturbation 4‖x‖ − ⟨p, x⟩ with ‖p‖ < 1
        let p = [0.3, -0.4];
        let h = CatalogEntry::new(
            "perturb",
            Kind::Convex,
            Expr::sum(vec![
                Expr::NormDist { center: vec![0.0, 0.0], weight: 4.0 },
                Expr::Affine { slope: vec![-p[0], -p[1]], offset: 0.0 },
            ]),
        )
        .unwrap();
        let r = add_convex_plr(&f, &cert, &h, &s).unwrap();
        assert!(r.lipschitz <= 5.0);
        assert!(r.coefficient <= 6.0);
        assert!(r.certificate.passed());

        let concave = entry("neg_sq_norm");
        assert!(add_convex_plr(&f, &cert, &concave, &s).is_err());
    }

    #[test]
    fn sharp_min_constants_and_slope() {
        let f = entry("neg_sq_norm").params;
        let r = sharp_min_transform(&f, &[0.0, 0.0], 1.0, 1.0, &[0.0, 0.0], &Sampling::default()).unwrap();
        assert_eq!(r.constants.delta_prime, 1.0 / 9.0);
        assert_eq!(r.constants.c_prime, 6.0);
        assert!(r.passed, "{r:?}");
        // min-norm slope of 4‖x‖ − ‖x‖² is 4 − 2‖x‖
        let at = norm(&r.min_slope_at);
        assert!((r.min_slope - (4.0 - 2.0 * at)).abs() < 1e-12);
    }

    #[test]
    fn sharp_min_on_convex_with_zero_subgradient() {
        let f = entry("abs_plus_sq").params;
        let r = sharp_min_transform(&f, &[0.0], 1.0, 1.0, &[0.0], &Sampling::default()).unwrap();
        assert!(r.passed);
        assert!(r.min_slope >= 4.0);
    }

    #[test]
    fn sharp_min_preconditions() {
        let f = entry("linear").params;
        let s = Sampling::default();
        // ‖p‖ = 3 ≥ 1
        assert!(matches!(
            sharp_min_transform(&f, &[0.0, 0.0], 1.0, 1.0, &[1.8, 2.4], &s),
            Err(Error::Precondition { .. })
        ));
        let g = entry("half_sq_norm").params;
        // 0.5 e1 is not the gradient at the origin
        assert!(matches!(
            sharp_min_transform(&g, &[0.0, 0.0], 1.0, 1.0, &[0.5, 0.0], &s),
            Err(Error::Precondition { .. })
        ));
    }
}

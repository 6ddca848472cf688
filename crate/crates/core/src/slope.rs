//! Local slopes `|∇f|(x)` and Lipschitz moduli `lip g`.
//!
//! On a finite space every point is isolated, so the exact local slope is
//! identically zero. The useful quantity is the fixed-resolution slope
//!
//! ```text
//! slope_ε(f, x) = max { [f(x) − f(y)]⁺ / d(x, y) : y ∈ B(x; ε) \ {x}, f(y) < ∞ }
//! ```
//!
//! which on grids approximates the limsup as `ε, h → 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::metric_space::{MetricSpace, ScalarField};

/// Slopes above this are reported as `+∞` with the `diverged` flag set.
pub const DEFAULT_SLOPE_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Exact,
    Scale(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    pub value: ExtReal,
    pub resolution: Resolution,
    /// Point achieving the max (lowest index on ties).
    pub witness: Option<usize>,
    #[serde(default)]
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipEstimate {
    pub value: f64,
    pub center: usize,
    pub radius: f64,
    pub points: usize,
    /// Fewer than two points in the region; `value` is 0 by convention.
    pub degenerate: bool,
}

fn check_dom<S: MetricSpace + ?Sized>(space: &S, f: &ScalarField, x: usize) -> Result<f64> {
    if f.len() != space.len() {
        return Err(Error::input("field length does not match the space"));
    }
    if x >= space.len() {
        return Err(Error::input(format!("unknown point {x}")));
    }
    f.finite_at(x)
}

/// Exact local slope on a finite space. Every point is isolated, so this is
/// 0 on `dom f`.
pub fn local_slope_finite<S: MetricSpace + ?Sized>(
    space: &S,
    f: &ScalarField,
    x: usize,
) -> Result<SlopeEstimate> {
    check_dom(space, f, x)?;
    // once ε is below the smallest positive distance the punctured ball is empty
    let eps = space.min_separation().map_or(0.0, |m| 0.5 * m);
    let punctured = space.closed_ball(x, eps).into_iter().filter(|&y| y != x).count();
    debug_assert_eq!(punctured, 0);
    Ok(SlopeEstimate {
        value: ExtReal::ZERO,
        resolution: Resolution::Exact,
        witness: None,
        diverged: false,
    })
}

/// Fixed-resolution slope with the default divergence cap.
pub fn discrete_slope<S: MetricSpace + ?Sized>(
    space: &S,
    f: &ScalarField,
    x: usize,
    eps: f64,
) -> Result<SlopeEstimate> {
    discrete_slope_capped(space, f, x, eps, DEFAULT_SLOPE_CAP)
}

pub fn discrete_slope_capped<S: MetricSpace + ?Sized>(
    space: &S,
    f: &ScalarField,
    x: usize,
    eps: f64,
    cap: f64,
) -> Result<SlopeEstimate> {
    if !(eps > 0.0) {
        return Err(Error::input(format!("slope resolution must be positive, got {eps}")));
    }
    let fx = check_dom(space, f, x)?;
    let mut best = 0.0;
    let mut witness = None;
    for y in space.closed_ball(x, eps) {
        if y == x {
            continue;
        }
        // points with f(y) = +inf contribute [f(x) - f(y)]^+ = 0
        let Some(fy) = f.value(y).finite() else { continue };
        let d = space.dist(x, y);
        let q = (fx - fy) / d;
        // equal quotients: the nearer point wins, then the lower index
        let nearer = witness.is_some_and(|w| q == best && d < space.dist(x, w));
        if q > best || nearer {
            best = q;
            witness = Some(y);
        }
    }
    let diverged = best > cap;
    Ok(SlopeEstimate {
        value: if diverged { ExtReal::PosInf } else { ExtReal::Finite(best) },
        resolution: Resolution::Scale(eps),
        witness,
        diverged,
    })
}

/// `slope_ε` at every point; `+∞` outside `dom f`.
pub fn discrete_slopes<S: MetricSpace + ?Sized>(space: &S, f: &ScalarField, eps: f64) -> Result<Vec<ExtReal>> {
    if f.len() != space.len() {
        return Err(Error::input("field length does not match the space"));
    }
    (0..space.len())
        .into_par_iter()
        .map(|x| {
            if f.is_finite_at(x) {
                discrete_slope(space, f, x, eps).map(|s| s.value)
            } else {
                Ok(ExtReal::PosInf)
            }
        })
        .collect()
}

/// Max pairwise difference quotient of `g` over the closed ball `B(center; radius)`.
pub fn lip_estimate<S: MetricSpace + ?Sized>(
    space: &S,
    g: &ScalarField,
    center: usize,
    radius: f64,
) -> Result<LipEstimate> {
    if g.len() != space.len() {
        return Err(Error::input("field length does not match the space"));
    }
    if center >= space.len() {
        return Err(Error::input(format!("unknown point {center}")));
    }
    let region = space.closed_ball(center, radius);
    let vals = region
        .iter()
        .map(|&i| g.finite_at(i))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0.0_f64;
    for a in 0..region.len() {
        for b in (a + 1)..region.len() {
            let q = (vals[a] - vals[b]).abs() / space.dist(region[a], region[b]);
            best = best.max(q);
        }
    }
    Ok(LipEstimate {
        value: best,
        center,
        radius,
        points: region.len(),
        degenerate: region.len() < 2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeLipReport {
    pub slope: f64,
    pub lip: f64,
    pub radius: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Checks `slope_ρ(f, x₀) ≤ lip g(B(x₀; ρ))` at a local minimum `x₀` of `f + g`.
///
/// The minimum is verified on the evaluated neighbourhood first; if some
/// `y` in the ball has `(f+g)(y) < (f+g)(x₀)` the call fails with `y` as
/// witness.
pub fn check_slope_lip_at_min<S: MetricSpace + ?Sized>(
    space: &S,
    f: &ScalarField,
    g: &ScalarField,
    x0: usize,
    radius: f64,
) -> Result<SlopeLipReport> {
    let fx = check_dom(space, f, x0)?;
    let gx = check_dom(space, g, x0)?;
    let sum0 = fx + gx;
    let tol = 1e-12 * (1.0 + sum0.abs());
    for y in space.closed_ball(x0, radius) {
        if let (Some(fy), Some(gy)) = (f.value(y).finite(), g.value(y).finite()) {
            if fy + gy < sum0 - tol {
                return Err(Error::precondition(
                    format!("point {x0} is not a local minimum of f + g on the ball of radius {radius}"),
                    Some(y),
                ));
            }
        }
    }
    let slope = discrete_slope(space, f, x0, radius)?.value.to_f64();
    let lip = lip_estimate(space, g, x0, radius)?.value;
    let slack = 1e-9 * (1.0 + lip);
    Ok(SlopeLipReport {
        slope,
        lip,
        radius,
        slack,
        holds: slope <= lip + slack,
    })
}

use serde::{Deserialize, Serialize};

use super::descent::{slope_determination_core, CoreReport, DEFAULT_DILATIONS};
use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm, scale};
use crate::metric_space::{sublevel_restrict, Coordinates, EuclideanGrid, MetricSpace, ScalarField};
use crate::plr::{analytic_slopes, Sampling};
use crate::subdifferential::Expr;

/// Shrink applied to the supremum of admissible `α` found by bisection.
const ALPHA_SHRINK: f64 = 0.9;
const BISECTION_STEPS: usize = 60;

/// Discretisation of the one-sided pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OneSidedConfig {
    /// Lattice spacing of the grid on `B°(x̄; δ′)`.
    pub h: f64,
    /// Slope resolution entering the tolerance; `4h` when absent.
    pub eps: Option<f64>,
    /// Overrides the default `ν = min{(δ′ − ‖x₀ − x̄‖)/2, 1/2}`.
    pub nu: Option<f64>,
    pub dilations: Vec<f64>,
    pub sampling: Sampling,
}

impl Default for OneSidedConfig {
    fn default() -> Self {
        OneSidedConfig {
            h: 1e-2,
            eps: None,
            nu: None,
            dilations: DEFAULT_DILATIONS.to_vec(),
            sampling: Sampling::default(),
        }
    }
}

impl OneSidedConfig {
    pub fn with_spacing(h: f64) -> Self {
        OneSidedConfig { h, ..Self::default() }
    }

    pub fn eps(&self) -> f64 {
        self.eps.unwrap_or(4.0 * self.h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::input(format!("spacing must be positive, got {}", self.h)));
        }
        if !(self.eps() > 0.0) {
            return Err(Error::input("eps must be positive"));
        }
        self.sampling.validate()
    }
}

/// `10·(ε + h)·(1 + L)`.
pub fn equality_tolerance(eps: f64, h: f64, lipschitz: f64) -> f64 {
    10.0 * (eps + h) * (1.0 + lipschitz)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneSidedReport {
    pub center: Vec<f64>,
    /// The grid point used as `x₀`.
    pub target: Vec<f64>,
    pub constants: Constants,
    pub h: f64,
    pub nu: f64,
    /// Supremum of admissible `α` located by bisection.
    pub alpha_sup: f64,
    pub alpha: f64,
    pub p: Vec<f64>,
    pub grid_points: usize,
    pub y_points: usize,
    /// `max ‖y − x̄‖` over `Y`.
    pub y_radius: f64,
    /// `ν + ‖x₀ − x̄‖`.
    pub y_bound: f64,
    pub y_bounded: bool,
    pub core: CoreReport,
    /// `f₁(x₀)`.
    pub f1_start: f64,
    /// Lower bound on `(f − g)(x₀) − (f − g)(x̄)` certified by the orbits:
    /// `−δ_min·f₁(x₀)/α`.
    pub certified_lower_bound: f64,
    /// `(f − g)(x₀) − (f − g)(x̄)` by direct evaluation.
    pub direct_margin: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Inputs to the choice of `α`, all relative to `f(x̄) = 0`.
struct AlphaProblem {
    slope: f64,
    ratio: f64,
    inf_lower: f64,
    at_start: f64,
    nu: f64,
}

impl AlphaProblem {
    /// The three conditions: `|∇(αf)|(x̄) < min{1, ν/δ′}`,
    /// `inf (αf)(δ′B) > −ν` and `(αf)(x₀) < ν`.
    fn admits(&self, alpha: f64) -> bool {
        alpha * self.slope < self.ratio.min(1.0) && alpha * self.inf_lower > -self.nu && alpha * self.at_start < self.nu
    }

    fn bisect(&self) -> Result<f64> {
        let (mut lo, mut hi) = (0.0, 1.0);
        if self.admits(hi) {
            return Ok(hi);
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if self.admits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo > 0.0 {
            Ok(lo)
        } else {
            Err(Error::Scale("no alpha in (0, 1) satisfies the three scaling conditions".into()))
        }
    }
}

/// `f₁ = αf − ⟨p, x − x̄⟩ + 4‖x − x̄‖ − αf(x̄)`, which vanishes at `x̄`.
fn transformed(f: &Expr, alpha: f64, p: &[f64], center: &[f64]) -> Expr {
    let fc = f.eval(center);
    Expr::sum(vec![
        Expr::scale(alpha, f.clone()),
        Expr::Affine { slope: scale(p, -1.0), offset: dot(p, center) - alpha * fc },
        Expr::NormDist { center: center.to_vec(), weight: 4.0 },
    ])
}

/// Runs the one-sided determination argument from `center` to `target`.
///
/// With `∂f ⊂ ∂g` near `center` and both functions PLR there with `(c, δ)`,
/// the argument gives `f(x₀) − g(x₀) ≥ f(x̄) − g(x̄)` on `B°(x̄; δ′)`. The
/// pipeline chooses `ν` and `α`, builds `f₁`, `g₁`, restricts to the sublevel
/// set `Y` of `f₁` at `x₀` on a lattice, and drives determination orbits from
/// `x₀` to `x̄` for each dilation. Direct evaluation of `f − g` is the oracle
/// the pipeline must agree with.
#[allow(clippy::too_many_arguments)]
pub fn run_one_sided(
    f: &Expr,
    g: &Expr,
    center: &[f64],
    c: f64,
    delta: f64,
    target: &[f64],
    cfg: &OneSidedConfig,
) -> Result<OneSidedReport> {
    cfg.validate()?;
    let dim = f.validate()?;
    if g.validate()? != dim || center.len() != dim || target.len() != dim {
        return Err(Error::input("f, g, center and target must share one dimension"));
    }
    if !(c > 0.0 && delta > 0.0) {
        return Err(Error::input("c and delta must be positive"));
    }
    let constants = Constants::new(c, delta);
    let dp = constants.delta_prime;
    let grid = EuclideanGrid::on_lattice(center.to_vec(), cfg.h, vec![0; dim], dp, true)?;
    let ci = grid.nearest(center).expect("center is a lattice point");
    let x0 = grid
        .nearest(target)
        .ok_or_else(|| Error::precondition(format!("target {target:?} is not inside B°(x̄; δ′)"), None))?;
    let start = grid.coords(x0).to_vec();
    let r0 = dist(&start, center);

    let nu = cfg.nu.unwrap_or(((dp - r0) / 2.0).min(0.5));
    if !(nu > 0.0 && nu < 1.0 && nu + r0 < dp) {
        return Err(Error::Scale(format!("nu = {nu} must lie in (0, 1) with nu + ‖x₀‖ < δ′")));
    }

    let fc = f.eval(center);
    let lipschitz = f.lipschitz_bound(center, dp);
    let sampled_min = (0..grid.len()).map(|i| f.eval(grid.coords(i)) - fc).fold(f64::INFINITY, f64::min);
    let problem = AlphaProblem {
        slope: norm(&f.subdifferential(center).min_norm_element()?),
        ratio: nu / dp,
        // lattice points are within h√dim of every point of the closed ball
        inf_lower: sampled_min - lipschitz * cfg.h * (dim as f64).sqrt(),
        at_start: f.eval(&start) - fc,
        nu,
    };
    let alpha_sup = problem.bisect()?;
    let alpha = ALPHA_SHRINK * alpha_sup;
    let p = scale(&f.subdifferential(center).min_norm_element()?, alpha);
    if !(norm(&p) < (nu / dp).min(1.0)) {
        return Err(Error::Scale(format!("‖p‖ = {} is not below min(1, ν/δ′)", norm(&p))));
    }

    let f1 = transformed(f, alpha, &p, center);
    let g1 = transformed(g, alpha, &p, center);
    let f1v = ScalarField::sample(&grid, |x| f1.eval(x).into())?;
    let g1v = ScalarField::sample(&grid, |x| g1.eval(x).into())?;
    let (y, f1y) = sublevel_restrict(&grid, &f1v, x0)?;
    let g1y = g1v.restrict(y.members());
    let yc = y
        .from_parent(ci)
        .ok_or_else(|| Error::precondition("x̄ is not in the sublevel set Y: f₁(x₀) < f₁(x̄)", Some(x0)))?;
    let y0 = y.from_parent(x0).expect("x₀ lies in its own sublevel set");
    let y_radius = (0..y.len()).map(|k| dist(y.coords(k), center)).fold(0.0, f64::max);
    let y_bound = nu + r0;

    let sf = analytic_slopes(&y, &f1)?;
    let sg = analytic_slopes(&y, &g1)?;
    let core = slope_determination_core(
        &y,
        &f1y,
        &g1y,
        &sf,
        &sg,
        constants.c_prime,
        yc,
        &[y0],
        &cfg.dilations,
        &cfg.sampling,
    )?;

    let f1_start = f1.eval(&start);
    let smallest = cfg.dilations.iter().copied().fold(f64::INFINITY, f64::min);
    let direct_margin = (f.eval(&start) - g.eval(&start)) - (fc - g.eval(center));
    let tolerance = equality_tolerance(cfg.eps(), cfg.h, lipschitz);
    let y_bounded = y_radius <= y_bound + 1e-12;
    Ok(OneSidedReport {
        center: center.to_vec(),
        target: start,
        constants,
        h: cfg.h,
        nu,
        alpha_sup,
        alpha,
        p,
        grid_points: grid.len(),
        y_points: y.len(),
        y_radius,
        y_bound,
        y_bounded,
        passed: core.passed && y_bounded && direct_margin >= -tolerance,
        core,
        f1_start,
        certified_lower_bound: -smallest * f1_start / alpha,
        direct_margin,
        tolerance,
    })
}

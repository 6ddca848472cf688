use serde::{Deserialize, Serialize};

use super::convex_set::ConvexSet;
use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm};

/// Relative tolerance for deciding which pieces of a max are active.
const ACTIVE_TOL: f64 = 1e-12;

/// Real-valued, locally Lipschitz functions on `ℝⁿ` with analytic
/// Clarke subdifferentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expr {
    /// `⟨slope, x⟩ + offset`.
    Affine { slope: Vec<f64>, offset: f64 },
    /// `½ Σ diagᵢ (xᵢ − centerᵢ)² + offset`.
    Quadratic {
        diag: Vec<f64>,
        center: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// `weight · ‖x − center‖`, `weight ≥ 0`.
    NormDist { center: Vec<f64>, weight: f64 },
    /// `weight · ‖x − center‖₁`, `weight ≥ 0`.
    L1 { center: Vec<f64>, weight: f64 },
    /// `maxᵢ ⟨slopesᵢ, x⟩ + offsetsᵢ`.
    MaxAffine { slopes: Vec<Vec<f64>>, offsets: Vec<f64> },
    /// `weight · ‖x − center‖³`.
    NormCubed { center: Vec<f64>, weight: f64 },
    /// `max(0, inner)` for a smooth inner function.
    PositivePart { inner: Box<Expr> },
    /// `factor · inner`.
    Scale { factor: f64, inner: Box<Expr> },
    Sum { terms: Vec<Expr> },
}

impl Expr {
    pub fn zero(dim: usize) -> Expr {
        Expr::Affine { slope: vec![0.0; dim], offset: 0.0 }
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        Expr::Sum { terms }
    }

    pub fn scale(factor: f64, inner: Expr) -> Expr {
        Expr::Scale { factor, inner: Box::new(inner) }
    }

    /// Adds a constant.
    pub fn shifted(self, c: f64) -> Expr {
        let dim = self.dim();
        Expr::sum(vec![self, Expr::Affine { slope: vec![0.0; dim], offset: c }])
    }

    /// Dimension, trusting the expression is valid.
    pub fn dim(&self) -> usize {
        match self {
            Expr::Affine { slope, .. } => slope.len(),
            Expr::Quadratic { diag, .. } => diag.len(),
            Expr::NormDist { center, .. } | Expr::L1 { center, .. } | Expr::NormCubed { center, .. } => center.len(),
            Expr::MaxAffine { slopes, .. } => slopes.first().map_or(0, Vec::len),
            Expr::PositivePart { inner } | Expr::Scale { inner, .. } => inner.dim(),
            Expr::Sum { terms } => terms.first().map_or(0, Expr::dim),
        }
    }

    /// Checks shapes and parameter ranges; returns the dimension.
    pub fn validate(&self) -> Result<usize> {
        let fin = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let dim = match self {
            Expr::Affine { slope, offset } => {
                if !fin(slope) || !offset.is_finite() {
                    return Err(Error::input("affine parameters must be finite"));
                }
                slope.len()
            }
            Expr::Quadratic { diag, center, offset } => {
                if diag.len() != center.len() {
                    return Err(Error::input("quadratic diag and center differ in length"));
                }
                if !fin(diag) || !fin(center) || !offset.is_finite() {
                    return Err(Error::input("quadratic parameters must be finite"));
                }
                diag.len()
            }
            Expr::NormDist { center, weight } | Expr::L1 { center, weight } => {
                if !(*weight >= 0.0 && weight.is_finite()) || !fin(center) {
                    return Err(Error::input("norm weight must be nonnegative and finite"));
                }
                center.len()
            }
            Expr::NormCubed { center, weight } => {
                if !weight.is_finite() || !fin(center) {
                    return Err(Error::input("cubic parameters must be finite"));
                }
                center.len()
            }
            Expr::MaxAffine { slopes, offsets } => {
                let first = slopes.first().ok_or_else(|| Error::input("max_affine needs at least one piece"))?;
                if slopes.len() != offsets.len()
                    || slopes.iter().any(|s| s.len() != first.len() || !fin(s))
                    || !fin(offsets)
                {
                    return Err(Error::input("max_affine pieces are malformed"));
                }
                first.len()
            }
            Expr::PositivePart { inner } => {
                let d = inner.validate()?;
                if !inner.is_smooth() {
                    return Err(Error::input("positive_part requires a smooth inner function"));
                }
                d
            }
            Expr::Scale { factor, inner } => {
                if !factor.is_finite() {
                    return Err(Error::input("scale factor must be finite"));
                }
                inner.validate()?
            }
            Expr::Sum { terms } => {
                let first = terms.first().ok_or_else(|| Error::input("sum needs at least one term"))?;
                let d = first.validate()?;
                for t in &terms[1..] {
                    if t.validate()? != d {
                        return Err(Error::input("sum terms differ in dimension"));
                    }
                }
                d
            }
        };
        if !(1..=4).contains(&dim) {
            return Err(Error::input(format!("dimension must be 1..=4, got {dim}")));
        }
        Ok(dim)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Affine { slope, offset } => dot(slope, x) + offset,
            Expr::Quadratic { diag, center, offset } => {
                0.5 * diag
                    .iter()
                    .zip(center)
                    .zip(x)
                    .map(|((d, c), xi)| d * (xi - c) * (xi - c))
                    .sum::<f64>()
                    + offset
            }
            Expr::NormDist { center, weight } => weight * linalg::dist(x, center),
            Expr::L1 { center, weight } => weight * x.iter().zip(center).map(|(a, b)| (a - b).abs()).sum::<f64>(),
            Expr::MaxAffine { slopes, offsets } => slopes
                .iter()
                .zip(offsets)
                .map(|(s, o)| dot(s, x) + o)
                .fold(f64::NEG_INFINITY, f64::max),
            Expr::NormCubed { center, weight } => weight * linalg::dist(x, center).powi(3),
            Expr::PositivePart { inner } => inner.eval(x).max(0.0),
            Expr::Scale { factor, inner } => factor * inner.eval(x),
            Expr::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
        }
    }

    /// Gradient where the expression is smooth everywhere.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        if !self.is_smooth() {
            return None;
        }
        match self.subdifferential(x) {
            ConvexSet::Point(p) => Some(p),
            set => Some(set.support_point(&vec![0.0; x.len()])),
        }
    }

    /// Clarke subdifferential at `x`. Coincides with the Fréchet
    /// subdifferential whenever [`Expr::is_f_regular`] holds.
    pub fn subdifferential(&self, x: &[f64]) -> ConvexSet {
        match self {
            Expr::Affine { slope, .. } => ConvexSet::Point(slope.clone()),
            Expr::Quadratic { diag, center, .. } => ConvexSet::Point(
                diag.iter().zip(center).zip(x).map(|((d, c), xi)| d * (xi - c)).collect(),
            ),
            Expr::NormDist { center, weight } => {
                let v = linalg::sub(x, center);
                let n = norm(&v);
                if n == 0.0 {
                    ConvexSet::Ball { center: vec![0.0; x.len()], radius: *weight }
                } else {
                    ConvexSet::Point(linalg::scale(&v, weight / n))
                }
            }
            Expr::L1 { center, weight } => {
                // product of per-coordinate intervals
                let mut verts = vec![Vec::with_capacity(x.len())];
                for (xi, ci) in x.iter().zip(center) {
                    let choices: &[f64] = if xi > ci {
                        &[1.0]
                    } else if xi < ci {
                        &[-1.0]
                    } else {
                        &[-1.0, 1.0]
                    };
                    verts = verts
                        .into_iter()
                        .flat_map(|v: Vec<f64>| {
                            choices.iter().map(move |s| {
                                let mut w = v.clone();
                                w.push(s * weight);
                                w
                            })
                        })
                        .collect();
                }
                if verts.len() == 1 {
                    ConvexSet::Point(verts.pop().unwrap())
                } else {
                    ConvexSet::Polytope(verts)
                }
            }
            Expr::MaxAffine { slopes, offsets } => {
                let vals: Vec<f64> = slopes.iter().zip(offsets).map(|(s, o)| dot(s, x) + o).collect();
                let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let tol = ACTIVE_TOL * (1.0 + top.abs());
                let mut active: Vec<Vec<f64>> = slopes
                    .iter()
                    .zip(&vals)
                    .filter(|(_, &v)| v >= top - tol)
                    .map(|(s, _)| s.clone())
                    .collect();
                if active.len() == 1 {
                    ConvexSet::Point(active.pop().unwrap())
                } else {
                    ConvexSet::Polytope(active)
                }
            }
            Expr::NormCubed { center, weight } => {
                let v = linalg::sub(x, center);
                ConvexSet::Point(linalg::scale(&v, 3.0 * weight * norm(&v)))
            }
            Expr::PositivePart { inner } => {
                let q = inner.eval(x);
                let grad = match inner.subdifferential(x) {
                    ConvexSet::Point(p) => p,
                    other => other.support_point(&vec![0.0; x.len()]),
                };
                if q > 0.0 {
                    ConvexSet::Point(grad)
                } else if q < 0.0 {
                    ConvexSet::Point(vec![0.0; x.len()])
                } else {
                    ConvexSet::Polytope(vec![vec![0.0; x.len()], grad])
                }
            }
            Expr::Scale { factor, inner } => inner.subdifferential(x).scaled(*factor),
            Expr::Sum { terms } => {
                let mut it = terms.iter().map(|t| t.subdifferential(x));
                let first = it.next().expect("validated sum is nonempty");
                it.fold(first, |acc, s| acc.plus(&s))
            }
        }
    }

    pub fn is_smooth(&self) -> bool {
        match self {
            Expr::Affine { .. } | Expr::Quadratic { .. } | Expr::NormCubed { .. } => true,
            Expr::NormDist { weight, .. } | Expr::L1 { weight, .. } => *weight == 0.0,
            Expr::MaxAffine { slopes, .. } => slopes.iter().all(|s| s == &slopes[0]),
            Expr::PositivePart { .. } => false,
            Expr::Scale { factor, inner } => *factor == 0.0 || inner.is_smooth(),
            Expr::Sum { terms } => terms.iter().all(Expr::is_smooth),
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            Expr::Affine { .. } | Expr::NormDist { .. } | Expr::L1 { .. } | Expr::MaxAffine { .. } => true,
            Expr::Quadratic { diag, .. } => diag.iter().all(|&d| d >= 0.0),
            Expr::NormCubed { weight, .. } => *weight >= 0.0,
            Expr::PositivePart { inner } => inner.is_convex(),
            Expr::Scale { factor, inner } => *factor == 0.0 || (*factor > 0.0 && inner.is_convex()),
            Expr::Sum { terms } => terms.iter().all(Expr::is_convex),
        }
    }

    /// Whether Fréchet and Clarke subdifferentials agree everywhere. Smooth,
    /// convex and max-of-smooth pieces qualify, as do nonnegative
    /// combinations of such; a negative multiple only if the inner part is
    /// smooth.
    pub fn is_f_regular(&self) -> bool {
        match self {
            Expr::Scale { factor, inner } => {
                if *factor >= 0.0 {
                    inner.is_f_regular()
                } else {
                    inner.is_smooth()
                }
            }
            Expr::Sum { terms } => terms.iter().all(Expr::is_f_regular),
            _ => true,
        }
    }

    /// Upper bound for the Lipschitz constant on `B(center; radius)`.
    pub fn lipschitz_bound(&self, center: &[f64], radius: f64) -> f64 {
        match self {
            Expr::Affine { slope, .. } => norm(slope),
            Expr::Quadratic { diag, center: c, .. } => {
                let far = linalg::sub(center, c);
                // ‖D(x − c)‖ ≤ ‖D(center − c)‖ + max|d| r
                let dc: Vec<f64> = diag.iter().zip(&far).map(|(d, v)| d * v).collect();
                norm(&dc) + max_abs(diag) * radius
            }
            Expr::NormDist { weight, .. } => *weight,
            Expr::L1 { center: c, weight } => weight * (c.len() as f64).sqrt(),
            Expr::MaxAffine { slopes, .. } => slopes.iter().map(|s| norm(s)).fold(0.0, f64::max),
            Expr::NormCubed { center: c, weight } => {
                let r = linalg::dist(center, c) + radius;
                3.0 * weight.abs() * r * r
            }
            Expr::PositivePart { inner } => inner.lipschitz_bound(center, radius),
            Expr::Scale { factor, inner } => factor.abs() * inner.lipschitz_bound(center, radius),
            Expr::Sum { terms } => terms.iter().map(|t| t.lipschitz_bound(center, radius)).sum(),
        }
    }

    /// Bound on the second-order variation of the smooth pieces on
    /// `B(center; radius)`. Kinks of the convex norm-like pieces contribute
    /// nothing: their slope is constant away from the kink.
    pub fn curvature_bound(&self, center: &[f64], radius: f64) -> f64 {
        match self {
            Expr::Affine { .. } | Expr::NormDist { .. } | Expr::L1 { .. } | Expr::MaxAffine { .. } => 0.0,
            Expr::Quadratic { diag, .. } => max_abs(diag),
            Expr::NormCubed { center: c, weight } => 6.0 * weight.abs() * (linalg::dist(center, c) + radius),
            Expr::PositivePart { inner } => inner.curvature_bound(center, radius),
            Expr::Scale { factor, inner } => factor.abs() * inner.curvature_bound(center, radius),
            Expr::Sum { terms } => terms.iter().map(|t| t.curvature_bound(center, radius)).sum(),
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

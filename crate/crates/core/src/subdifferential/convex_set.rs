use rand::Rng;
use serde::{Deserialize, Serialize};

use super::min_norm::min_norm_hull;
use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm};

/// A compact convex set in `ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexSet {
    Point(Vec<f64>),
    /// Convex hull of the listed vertices.
    Polytope(Vec<Vec<f64>>),
    Ball { center: Vec<f64>, radius: f64 },
    /// Minkowski sum.
    Sum(Box<ConvexSet>, Box<ConvexSet>),
}

/// `conv(vertices) + radius·B`, the form every `ConvexSet` reduces to.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub vertices: Vec<Vec<f64>>,
    pub radius: f64,
}

impl ConvexSet {
    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Point(p) => p.len(),
            ConvexSet::Polytope(v) => v.first().map_or(0, Vec::len),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Sum(a, _) => a.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexSet::Point(p) => finite(p),
            ConvexSet::Polytope(v) => {
                let first = v.first().ok_or(Error::EmptySubdifferential)?;
                if v.iter().any(|p| p.len() != first.len()) {
                    return Err(Error::input("polytope vertices differ in dimension"));
                }
                v.iter().try_for_each(|p| finite(p))
            }
            ConvexSet::Ball { center, radius } => {
                if !(*radius >= 0.0 && radius.is_finite()) {
                    return Err(Error::input(format!("ball radius must be nonnegative, got {radius}")));
                }
                finite(center)
            }
            ConvexSet::Sum(a, b) => {
                a.validate()?;
                b.validate()?;
                if a.dim() != b.dim() {
                    return Err(Error::input("Minkowski sum of sets with different dimensions"));
                }
                Ok(())
            }
        }
    }

    pub fn normalize(&self) -> Normalized {
        match self {
            ConvexSet::Point(p) => Normalized { vertices: vec![p.clone()], radius: 0.0 },
            ConvexSet::Polytope(v) => Normalized { vertices: dedup(v.clone()), radius: 0.0 },
            ConvexSet::Ball { center, radius } => Normalized {
                vertices: vec![center.clone()],
                radius: *radius,
            },
            ConvexSet::Sum(a, b) => {
                let (a, b) = (a.normalize(), b.normalize());
                let mut vertices = Vec::with_capacity(a.vertices.len() * b.vertices.len());
                for u in &a.vertices {
                    for v in &b.vertices {
                        vertices.push(linalg::add(u, v));
                    }
                }
                Normalized { vertices: dedup(vertices), radius: a.radius + b.radius }
            }
        }
    }

    /// `r·S`; negative `r` reflects the set.
    pub fn scaled(&self, r: f64) -> ConvexSet {
        match self {
            ConvexSet::Point(p) => ConvexSet::Point(linalg::scale(p, r)),
            ConvexSet::Polytope(v) => ConvexSet::Polytope(v.iter().map(|p| linalg::scale(p, r)).collect()),
            ConvexSet::Ball { center, radius } => ConvexSet::Ball {
                center: linalg::scale(center, r),
                radius: radius * r.abs(),
            },
            ConvexSet::Sum(a, b) => ConvexSet::Sum(Box::new(a.scaled(r)), Box::new(b.scaled(r))),
        }
    }

    pub fn translated(&self, v: &[f64]) -> ConvexSet {
        ConvexSet::Sum(Box::new(self.clone()), Box::new(ConvexSet::Point(v.to_vec())))
    }

    /// Minkowski sum, collapsing singletons where possible.
    pub fn plus(&self, other: &ConvexSet) -> ConvexSet {
        match (self, other) {
            (ConvexSet::Point(a), ConvexSet::Point(b)) => ConvexSet::Point(linalg::add(a, b)),
            _ => ConvexSet::Sum(Box::new(self.clone()), Box::new(other.clone())),
        }
    }

    pub fn is_singleton(&self) -> bool {
        let n = self.normalize();
        n.radius == 0.0 && n.vertices.len() == 1
    }

    /// `σ_S(d) = max_{p ∈ S} ⟨p, d⟩`.
    pub fn support(&self, d: &[f64]) -> f64 {
        let n = self.normalize();
        n.vertices.iter().map(|v| dot(v, d)).fold(f64::NEG_INFINITY, f64::max) + n.radius * norm(d)
    }

    /// A point of `S` attaining `σ_S(d)`.
    pub fn support_point(&self, d: &[f64]) -> Vec<f64> {
        let n = self.normalize();
        let mut best = 0;
        for (i, v) in n.vertices.iter().enumerate() {
            if dot(v, d) > dot(&n.vertices[best], d) {
                best = i;
            }
        }
        let nd = norm(d);
        if n.radius > 0.0 && nd > 0.0 {
            linalg::axpy(&n.vertices[best], n.radius / nd, d)
        } else {
            n.vertices[best].clone()
        }
    }

    /// Unique point of `S` nearest to the origin.
    pub fn min_norm_element(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.normalize();
        let q = min_norm_hull(&n.vertices)?;
        let nq = norm(&q);
        if nq <= n.radius {
            Ok(vec![0.0; q.len()])
        } else {
            Ok(linalg::scale(&q, 1.0 - n.radius / nq))
        }
    }

    /// Euclidean distance from `p` to `S`.
    pub fn distance(&self, p: &[f64]) -> Result<f64> {
        let n = self.normalize();
        let shifted: Vec<Vec<f64>> = n.vertices.iter().map(|v| linalg::sub(v, p)).collect();
        let q = min_norm_hull(&shifted)?;
        Ok((norm(&q) - n.radius).max(0.0))
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> Result<bool> {
        Ok(self.distance(p)? <= tol)
    }

    /// Subgradient test set: vertices (fanned out by the radius when the set
    /// is thick), the min-norm element and `extra` random exposed boundary
    /// points.
    pub fn test_points<R: Rng>(&self, extra: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        let n = self.normalize();
        let dim = self.dim();
        let mut out = Vec::new();
        if n.radius > 0.0 {
            let fan = linalg::direction_fan(dim, 0, rng);
            for v in &n.vertices {
                for u in &fan {
                    out.push(linalg::axpy(v, n.radius, u));
                }
            }
        } else {
            out.extend(n.vertices.iter().cloned());
        }
        out.push(self.min_norm_element()?);
        for _ in 0..extra {
            let u = linalg::random_unit(dim, rng);
            out.push(self.support_point(&u));
        }
        Ok(out)
    }
}

fn finite(p: &[f64]) -> Result<()> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::input("set coordinates must be finite"))
    }
}

fn dedup(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(v.len());
    for p in v.drain(..) {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

//! Multivalued maps on finite spaces, property (∗), LOEV orbits and the
//! determination map `S = S₁ ∩ S₂ ∩ S₃`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::metric_space::{MetricSpace, ScalarField};

/// A map `S : X ⇉ X` on the points of a finite space.
pub trait MultiMap: Sync {
    /// `S(x)` in ascending index order.
    fn image(&self, x: usize) -> Vec<usize>;
}

/// A map given by its images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitMap {
    images: Vec<Vec<usize>>,
}

impl ExplicitMap {
    pub fn new(mut images: Vec<Vec<usize>>) -> Result<Self> {
        let n = images.len();
        for img in &mut images {
            img.sort_unstable();
            img.dedup();
            if img.last().is_some_and(|&y| y >= n) {
                return Err(Error::input("map image refers to an unknown point"));
            }
        }
        Ok(ExplicitMap { images })
    }

    pub fn from_fn(n: usize, rule: impl Fn(usize) -> Vec<usize>) -> Result<Self> {
        Self::new((0..n).map(rule).collect())
    }

    pub fn empty(n: usize) -> Self {
        ExplicitMap { images: vec![Vec::new(); n] }
    }
}

impl MultiMap for ExplicitMap {
    fn image(&self, x: usize) -> Vec<usize> {
        self.images.get(x).cloned().unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarReport {
    pub passed: bool,
    /// First point with `x ∈ S(x)`.
    pub witness: Option<usize>,
    pub points: usize,
    pub note: String,
}

/// Checks irreflexivity `x ∉ S(x)` at every point.
///
/// The second clause of property (∗) concerns convergent orbits of finite
/// length; on a finite space every step is at least the smallest positive
/// distance, so such orbits are eventually constant and the clause is vacuous.
pub fn check_star_property<S: MetricSpace + ?Sized, M: MultiMap + ?Sized>(space: &S, map: &M) -> StarReport {
    let witness = (0..space.len())
        .into_par_iter()
        .find_first(|&x| map.image(x).binary_search(&x).is_ok());
    StarReport {
        passed: witness.is_none(),
        witness,
        points: space.len(),
        note: "finite space: infinite orbits have infinite length, so the limit clause is vacuous".into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    EmptyS,
    MaxIter,
    /// The orbit revisited a point; repeating the cycle gives infinite length.
    InfiniteLengthFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub points: Vec<usize>,
    pub steps: Vec<f64>,
    pub length: f64,
    pub termination: Termination,
}

impl Orbit {
    pub fn start(&self) -> usize {
        self.points[0]
    }

    pub fn end(&self) -> usize {
        *self.points.last().expect("orbit is nonempty")
    }
}

/// Iterates `x_{n+1} = argmax_{y ∈ S(x_n)} d(y, x_n)` (lowest index on ties)
/// until `S(x_n) = ∅`. The farthest point satisfies the selection rule
/// `d(x_{n+1}, x_n) > min{1, ν_n/2}` whenever `ν_n > 0`.
///
/// `max_iter` defaults to `10·|X|`.
pub fn run_orbit<S: MetricSpace + ?Sized, M: MultiMap + ?Sized>(
    space: &S,
    map: &M,
    x0: usize,
    max_iter: Option<usize>,
) -> Result<Orbit> {
    if x0 >= space.len() {
        return Err(Error::input(format!("unknown start point {x0}")));
    }
    let max_iter = max_iter.unwrap_or(10 * space.len());
    let mut points = vec![x0];
    let mut steps = Vec::new();
    let mut visited = vec![false; space.len()];
    visited[x0] = true;
    let mut cur = x0;
    let termination = loop {
        let image = map.image(cur);
        let Some(next) = image.iter().copied().reduce(|best, y| {
            if space.dist(y, cur) > space.dist(best, cur) {
                y
            } else {
                best
            }
        }) else {
            break Termination::EmptyS;
        };
        if steps.len() == max_iter {
            break Termination::MaxIter;
        }
        steps.push(space.dist(next, cur));
        points.push(next);
        if visited[next] {
            break Termination::InfiniteLengthFlag;
        }
        visited[next] = true;
        cur = next;
    };
    Ok(Orbit { length: steps.iter().sum(), points, steps, termination })
}

/// Steps `i` with `x_{i+1} ∉ S(x_i)`.
pub fn membership_violations<M: MultiMap + ?Sized>(map: &M, orbit: &Orbit) -> Vec<usize> {
    orbit
        .points
        .windows(2)
        .enumerate()
        .filter(|(_, w)| map.image(w[0]).binary_search(&w[1]).is_err())
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub length: f64,
    pub eps: f64,
    pub f_start: f64,
    pub f_end: f64,
    /// `f(x₀)/ε`.
    pub bound: f64,
    pub holds: bool,
    /// `ε·length ≤ f(x₀) − f(x_end)`.
    pub telescoping_holds: bool,
    /// Steps whose decrease is below `ε·d`, i.e. that leave `S₂`.
    pub insufficient_steps: Vec<usize>,
}

/// Checks `|orbit| ≤ f(x₀)/ε` for `f ≥ 0`, together with the per-step
/// decrease `f(x_{i+1}) < f(x_i) − ε·d(x_{i+1}, x_i)` behind it.
pub fn orbit_length_bound<S: MetricSpace + ?Sized>(
    space: &S,
    orbit: &Orbit,
    f: &ScalarField,
    eps: f64,
) -> Result<LengthReport> {
    if !(eps > 0.0) {
        return Err(Error::input(format!("eps must be positive, got {eps}")));
    }
    if f.len() != space.len() {
        return Err(Error::input("field length does not match the space"));
    }
    let values = orbit.points.iter().map(|&x| f.finite_at(x)).collect::<Result<Vec<_>>>()?;
    let insufficient_steps = orbit
        .steps
        .iter()
        .enumerate()
        .filter(|&(i, d)| !(values[i + 1] < values[i] - eps * d))
        .map(|(i, _)| i)
        .collect();
    let f_start = values[0];
    let f_end = *values.last().unwrap();
    let bound = f_start / eps;
    let slack = 1e-12 * (1.0 + f_start.abs());
    Ok(LengthReport {
        length: orbit.length,
        eps,
        f_start,
        f_end,
        bound,
        holds: orbit.length <= bound + slack / eps,
        telescoping_holds: eps * orbit.length <= f_start - f_end + slack,
        insufficient_steps,
    })
}

/// `S(x) = S₁(x) ∩ S₂(x) ∩ S₃(x)` with
/// `S₁: (f−g)(y) < (f−g)(x)`, `S₂: f(y) < f(x) − ε·d(y,x)` and
/// `S₃: |∇f|(y) < |∇f|(x) + 2c(2 + |∇f|(x))·d(y,x)`,
/// defined on `dom|∇f| \ {x̄}`.
pub struct DeterminationMap<'a, S: MetricSpace + ?Sized> {
    space: &'a S,
    f: &'a ScalarField,
    g: &'a ScalarField,
    slope_f: &'a [ExtReal],
    slope_g: &'a [ExtReal],
    eps: f64,
    c: f64,
    center: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComponentCounts {
    pub candidates: usize,
    pub fail_s1: usize,
    pub fail_s2: usize,
    pub fail_s3: usize,
    pub members: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn build_determination_map<'a, S: MetricSpace + ?Sized>(
    space: &'a S,
    f: &'a ScalarField,
    g: &'a ScalarField,
    slope_f: &'a [ExtReal],
    slope_g: &'a [ExtReal],
    eps: f64,
    c: f64,
    center: usize,
) -> Result<DeterminationMap<'a, S>> {
    let n = space.len();
    if f.len() != n || g.len() != n || slope_f.len() != n || slope_g.len() != n {
        return Err(Error::input("fields and slopes must match the space"));
    }
    if center >= n {
        return Err(Error::input(format!("unknown center {center}")));
    }
    if !(eps > 0.0 && c > 0.0) {
        return Err(Error::input("eps and c must be positive"));
    }
    if let Some(x) = (0..n).find(|&x| x != center && f.is_finite_at(x) && slope_f[x].finite().is_some_and(|s| !(s > eps))) {
        return Err(Error::precondition(
            format!("sharp-minimum gap violated: slope {} ≤ eps = {eps}", slope_f[x]),
            Some(x),
        ));
    }
    Ok(DeterminationMap { space, f, g, slope_f, slope_g, eps, c, center })
}

impl<S: MetricSpace + ?Sized> DeterminationMap<'_, S> {
    fn in_domain(&self, x: usize) -> Option<(f64, f64, f64)> {
        let fx = self.f.value(x).finite()?;
        let gx = self.g.value(x).finite()?;
        let sx = self.slope_f[x].finite()?;
        Some((fx, gx, sx))
    }

    /// Which components hold for the pair `(x, y)`.
    pub fn components(&self, x: usize, y: usize) -> Option<[bool; 3]> {
        if x == self.center || x == y {
            return None;
        }
        let (fx, gx, sx) = self.in_domain(x)?;
        let (fy, gy, sy) = self.in_domain(y)?;
        let d = self.space.dist(x, y);
        Some([
            fy - gy < fx - gx,
            fy < fx - self.eps * d,
            sy < sx + 2.0 * self.c * (2.0 + sx) * d,
        ])
    }

    pub fn diagnose(&self, x: usize) -> ComponentCounts {
        let mut out = ComponentCounts::default();
        for y in 0..self.space.len() {
            if let Some([a, b, s]) = self.components(x, y) {
                out.candidates += 1;
                out.fail_s1 += !a as usize;
                out.fail_s2 += !b as usize;
                out.fail_s3 += !s as usize;
                out.members += (a && b && s) as usize;
            }
        }
        out
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn center(&self) -> usize {
        self.center
    }

    /// The supplied slope of `g` at `x`, kept for reporting.
    pub fn slope_g(&self, x: usize) -> ExtReal {
        self.slope_g[x]
    }
}

impl<S: MetricSpace + ?Sized> MultiMap for DeterminationMap<'_, S> {
    fn image(&self, x: usize) -> Vec<usize> {
        (0..self.space.len())
            .filter(|&y| self.components(x, y).is_some_and(|c| c.iter().all(|&b| b)))
            .collect()
    }
}

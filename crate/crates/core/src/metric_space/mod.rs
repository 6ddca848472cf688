//! The two ambient worlds: explicit finite metric spaces and Euclidean
//! lattice grids clipped to a ball, plus the ball and sublevel geometry the
//! rest of the crate queries.
//!
//! Points are addressed by their index `0..len()`. All types are immutable
//! after construction.

mod field;
mod finite;
mod grid;
mod io;
mod subspace;

pub use field::ScalarField;
pub use finite::FiniteMetricSpace;
pub use grid::EuclideanGrid;
pub use io::{GridSpec, Space, SpaceFile};
pub use subspace::Subspace;

use crate::error::{Error, Result};
use crate::extended::ExtReal;

/// A finite metric space whose points are indexed `0..len()`.
pub trait MetricSpace: Sync {
    fn len(&self) -> usize;

    fn dist(&self, i: usize, j: usize) -> f64;

    /// Human-readable point name used in reports.
    fn label(&self, i: usize) -> String {
        i.to_string()
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Closed ball `{y : d(y, x) ≤ r}` in increasing index order.
    fn closed_ball(&self, x: usize, r: f64) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.dist(x, y) <= r).collect()
    }

    /// Open ball `{y : d(y, x) < r}` in increasing index order.
    fn open_ball(&self, x: usize, r: f64) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.dist(x, y) < r).collect()
    }

    /// Smallest positive distance between two points, `None` for singletons.
    fn min_separation(&self) -> Option<f64> {
        let n = self.len();
        let mut best: Option<f64> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.dist(i, j);
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
        best
    }
}

/// Points carrying Euclidean coordinates.
pub trait Coordinates: MetricSpace {
    fn dim(&self) -> usize;
    fn coords(&self, i: usize) -> &[f64];
}

fn check_point<S: MetricSpace + ?Sized>(space: &S, x: usize) -> Result<()> {
    if x >= space.len() {
        return Err(Error::input(format!(
            "unknown point {x} (space has {} points)",
            space.len()
        )));
    }
    Ok(())
}

/// Closed ball around `x`; `open = true` excludes points at distance exactly `r`.
pub fn ball<S: MetricSpace + ?Sized>(space: &S, x: usize, r: f64, open: bool) -> Result<Vec<usize>> {
    check_point(space, x)?;
    if !(r >= 0.0) {
        return Err(Error::input(format!("ball radius must be >= 0, got {r}")));
    }
    Ok(if open {
        space.open_ball(x, r)
    } else {
        space.closed_ball(x, r)
    })
}

/// Restricts `f` to its sublevel set `Y = {x : f(x) ≤ f(x₀)}`.
///
/// Returns the induced subspace together with `f` restricted to it. Local
/// slopes are unchanged on `Y`: every point that can witness a positive
/// slope at `x ∈ Y` has `f(y) ≤ f(x)` and so lies in `Y` too.
pub fn sublevel_restrict<'a, S: MetricSpace>(
    space: &'a S,
    f: &ScalarField,
    x0: usize,
) -> Result<(Subspace<'a, S>, ScalarField)> {
    check_point(space, x0)?;
    if f.len() != space.len() {
        return Err(Error::input("field length does not match the space"));
    }
    let level = match f.value(x0) {
        ExtReal::Finite(v) => v,
        ExtReal::PosInf => return Err(Error::Domain { point: x0 }),
    };
    let members: Vec<usize> = (0..space.len())
        .filter(|&i| matches!(f.value(i), ExtReal::Finite(v) if v <= level))
        .collect();
    let restricted = f.restrict(&members);
    Ok((Subspace::new(space, members)?, restricted))
}

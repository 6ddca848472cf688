//! JSON space files.
//!
//! A finite space lists `points` and a row-major `dist` matrix (flat or
//! nested); a grid space gives `grid: {dim, center, radius, h}`. Either form
//! may carry named `fields` of per-point values (numbers or `"inf"`).
//! Unknown keys are rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Coordinates, EuclideanGrid, FiniteMetricSpace, MetricSpace, ScalarField};
use crate::error::{Error, Result};
use crate::extended::ExtReal;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub h: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub open: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum DistMatrix {
    Nested(Vec<Vec<f64>>),
    RowMajor(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<DistMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fields: BTreeMap<String, Vec<ExtReal>>,
}

/// A space loaded from a file.
#[derive(Debug, Clone)]
pub enum Space {
    Finite(FiniteMetricSpace),
    Grid(EuclideanGrid),
}

impl SpaceFile {
    pub fn parse(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn build(&self) -> Result<Space> {
        match (&self.points, &self.dist, &self.grid) {
            (Some(points), Some(dist), None) => {
                let n = points.len();
                let rows = match dist {
                    DistMatrix::Nested(rows) => rows.clone(),
                    DistMatrix::RowMajor(flat) => {
                        if flat.len() != n * n {
                            return Err(Error::input(format!(
                                "row-major dist needs {} entries, got {}",
                                n * n,
                                flat.len()
                            )));
                        }
                        flat.chunks(n.max(1)).map(|c| c.to_vec()).collect()
                    }
                };
                Ok(Space::Finite(FiniteMetricSpace::new(points.clone(), rows)?))
            }
            (None, None, Some(g)) => {
                if g.center.len() != g.dim {
                    return Err(Error::input("grid center length must equal dim"));
                }
                let grid = if g.open {
                    EuclideanGrid::open(g.dim, g.center.clone(), g.radius, g.h)?
                } else {
                    EuclideanGrid::new(g.dim, g.center.clone(), g.radius, g.h)?
                };
                Ok(Space::Grid(grid))
            }
            _ => Err(Error::input(
                "space file needs either {points, dist} or {grid}, not both",
            )),
        }
    }

    /// Named field, checked against the space size.
    pub fn field(&self, name: &str, space: &Space) -> Result<ScalarField> {
        let values = self
            .fields
            .get(name)
            .ok_or_else(|| Error::input(format!("no field named {name:?} in the space file")))?;
        if values.len() != space.len() {
            return Err(Error::input(format!(
                "field {name:?} has {} values, space has {} points",
                values.len(),
                space.len()
            )));
        }
        ScalarField::new(values.clone())
    }
}

impl Space {
    /// Resolves a point argument: an id for finite spaces, comma-separated
    /// coordinates for grids (snapped to the nearest lattice point).
    pub fn resolve_point(&self, arg: &str) -> Result<usize> {
        match self {
            Space::Finite(s) => s.index_of(arg),
            Space::Grid(g) => {
                let coords = arg
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::input(format!("bad coordinates {arg:?}: {e}")))?;
                if coords.len() != g.dim() {
                    return Err(Error::input(format!("expected {} coordinates", g.dim())));
                }
                g.locate(&coords)
            }
        }
    }

    pub fn as_grid(&self) -> Option<&EuclideanGrid> {
        match self {
            Space::Grid(g) => Some(g),
            Space::Finite(_) => None,
        }
    }
}

impl MetricSpace for Space {
    fn len(&self) -> usize {
        match self {
            Space::Finite(s) => s.len(),
            Space::Grid(g) => g.len(),
        }
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        match self {
            Space::Finite(s) => s.dist(i, j),
            Space::Grid(g) => g.dist(i, j),
        }
    }

    fn label(&self, i: usize) -> String {
        match self {
            Space::Finite(s) => s.label(i),
            Space::Grid(g) => g.label(i),
        }
    }

    fn closed_ball(&self, x: usize, r: f64) -> Vec<usize> {
        match self {
            Space::Finite(s) => s.closed_ball(x, r),
            Space::Grid(g) => g.closed_ball(x, r),
        }
    }

    fn open_ball(&self, x: usize, r: f64) -> Vec<usize> {
        match self {
            Space::Finite(s) => s.open_ball(x, r),
            Space::Grid(g) => g.open_ball(x, r),
        }
    }

    fn min_separation(&self) -> Option<f64> {
        match self {
            Space::Finite(s) => s.min_separation(),
            Space::Grid(g) => g.min_separation(),
        }
    }
}

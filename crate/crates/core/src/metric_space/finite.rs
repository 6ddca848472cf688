use std::collections::HashMap;

use super::MetricSpace;
use crate::error::{Error, Result};
use crate::linalg;

/// Relative slack for the symmetry and triangle checks.
const METRIC_TOL: f64 = 1e-12;

/// An explicit finite metric space: point ids plus a full distance matrix.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    ids: Vec<String>,
    dist: Vec<f64>,
    n: usize,
}

impl FiniteMetricSpace {
    /// Validates the matrix: zero diagonal, symmetry, positivity off the
    /// diagonal and the triangle inequality (all triples).
    pub fn new(ids: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::input("a metric space needs at least one point"));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::input(format!("distance matrix must be {n}x{n}")));
        }
        let mut seen = HashMap::new();
        for (i, id) in ids.iter().enumerate() {
            if let Some(j) = seen.insert(id.clone(), i) {
                return Err(Error::input(format!("duplicate point id {id:?} at {j} and {i}")));
            }
        }
        let flat: Vec<f64> = dist.into_iter().flatten().collect();
        let space = FiniteMetricSpace { ids, dist: flat, n };
        space.validate()?;
        Ok(space)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        let scale = self.dist.iter().fold(0.0_f64, |m, &d| m.max(d.abs())).max(1.0);
        let tol = METRIC_TOL * scale;
        for i in 0..n {
            for j in 0..n {
                let d = self.dist(i, j);
                if !d.is_finite() {
                    return Err(Error::input(format!("d[{i}][{j}] is not finite")));
                }
                if i == j && d != 0.0 {
                    return Err(Error::input(format!("d[{i}][{i}] = {d}, expected 0")));
                }
                if i != j && d <= 0.0 {
                    return Err(Error::input(format!("d[{i}][{j}] = {d} must be positive")));
                }
                if (d - self.dist(j, i)).abs() > tol {
                    return Err(Error::input(format!("asymmetric distances at ({i}, {j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let dij = self.dist(i, j);
                for k in 0..n {
                    if self.dist(i, k) > dij + self.dist(j, k) + tol {
                        return Err(Error::input(format!(
                            "triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn default_ids(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    /// Points `0, 1, …, n−1` on a line with `d(i, j) = |i − j|`.
    pub fn path(n: usize) -> Self {
        let dist = (0..n)
            .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        Self::new(Self::default_ids(n), dist).expect("path metric is valid")
    }

    /// Every pair of distinct points at distance `d`.
    pub fn uniform(n: usize, d: f64) -> Self {
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { d }).collect())
            .collect();
        Self::new(Self::default_ids(n), dist).expect("uniform metric is valid")
    }

    /// Euclidean distances between the given coordinate vectors.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dist = points
            .iter()
            .map(|p| points.iter().map(|q| linalg::dist(p, q)).collect())
            .collect();
        Self::new(Self::default_ids(points.len()), dist)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.ids
            .iter()
            .position(|p| p == id)
            .ok_or_else(|| Error::input(format!("unknown point id {id:?}")))
    }
}

impl MetricSpace for FiniteMetricSpace {
    fn len(&self) -> usize {
        self.n
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    fn label(&self, i: usize) -> String {
        self.ids[i].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_planted_triangle_violation() {
        let d = vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
            vec![3.0, 1.0, 0.0],
        ];
        let err = FiniteMetricSpace::new(FiniteMetricSpace::default_ids(3), d).unwrap_err();
        assert!(err.to_string().contains("triangle"));
    }

    #[test]
    fn rejects_asymmetry_zero_offdiag_and_bad_shape() {
        let ids = FiniteMetricSpace::default_ids(2);
        assert!(FiniteMetricSpace::new(ids.clone(), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(FiniteMetricSpace::new(ids.clone(), vec![vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(FiniteMetricSpace::new(ids, vec![vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn rejects_duplicate_ids() {
        let ids = vec!["a".to_string(), "a".to_string()];
        assert!(FiniteMetricSpace::new(ids, vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn path_and_points_agree() {
        let p = FiniteMetricSpace::path(4);
        let q = FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(p.dist(i, j), q.dist(i, j));
            }
        }
        assert_eq!(p.min_separation(), Some(1.0));
        assert_eq!(p.index_of("2").unwrap(), 2);
    }
}

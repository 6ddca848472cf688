use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_space::EuclideanGrid;

/// How certificate sweeps choose points, pairs and subgradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    /// Lattice spacing; derived from `target_points` when absent.
    pub h: Option<f64>,
    pub target_points: usize,
    /// Enumerate all pairs up to this many points.
    pub exhaustive_limit: usize,
    /// Random partners per point above the limit.
    pub pairs_per_point: usize,
    /// Random boundary subgradients per point, on top of vertices and the min-norm element.
    pub p_extra: usize,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            h: None,
            target_points: 300,
            exhaustive_limit: 2000,
            pairs_per_point: 256,
            p_extra: 8,
            seed: 0,
        }
    }
}

fn unit_ball_volume(dim: usize) -> f64 {
    use std::f64::consts::PI;
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => PI * PI / 2.0,
    }
}

impl Sampling {
    pub fn with_spacing(h: f64) -> Self {
        Sampling { h: Some(h), ..Sampling::default() }
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Spacing giving roughly `target_points` lattice points in a ball of `radius`.
    pub fn spacing(&self, dim: usize, radius: f64) -> f64 {
        let h = self.h.unwrap_or_else(|| {
            let cells = unit_ball_volume(dim) / self.target_points.max(1) as f64;
            radius * cells.powf(1.0 / dim as f64)
        });
        h.min(radius)
    }

    /// Lattice sample of the open ball `B°(center; radius)`.
    pub fn open_ball(&self, center: &[f64], radius: f64) -> Result<EuclideanGrid> {
        if !(radius > 0.0) {
            return Err(Error::input(format!("ball radius must be positive, got {radius}")));
        }
        EuclideanGrid::open(center.len(), center.to_vec(), radius, self.spacing(center.len(), radius))
    }

    /// Deterministic generator for the work item `i`.
    pub fn rng_for(&self, i: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    /// Partners `y` of the sample point `i` among `n` points.
    pub fn partners(&self, n: usize, i: usize) -> Vec<usize> {
        if n <= self.exhaustive_limit {
            return (0..n).filter(|&j| j != i).collect();
        }
        let k = self.pairs_per_point.min(n - 1);
        let mut rng = self.rng_for(i.wrapping_add(1 << 40));
        let mut out: Vec<usize> = sample(&mut rng, n - 1, k)
            .into_iter()
            .map(|j| if j >= i { j + 1 } else { j })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::input(format!("spacing must be positive, got {h}")));
            }
        }
        if self.target_points == 0 || self.pairs_per_point == 0 {
            return Err(Error::input("sampling counts must be positive"));
        }
        Ok(())
    }
}

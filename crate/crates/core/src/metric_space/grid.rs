use super::{Coordinates, MetricSpace};
use crate::error::{Error, Result};

/// Relative slack applied to `(r/h)²` when deciding lattice membership.
const LATTICE_TOL: f64 = 1e-12;

/// Cap on the dense lattice lookup table.
const MAX_LOOKUP: usize = 64_000_000;

/// An axis-aligned lattice `anchor + h·ℤ^dim` intersected with a Euclidean
/// ball (closed by default, open on request).
///
/// Points outside the ball are dropped rather than clamped, so every
/// distance is exactly `h·√(integer)`.
#[derive(Debug, Clone)]
pub struct EuclideanGrid {
    dim: usize,
    anchor: Vec<f64>,
    center_key: Vec<i64>,
    radius: f64,
    h: f64,
    open: bool,
    coords: Vec<f64>,
    keys: Vec<i64>,
    extent: i64,
    lookup: Vec<u32>,
}

fn in_ball(sq: i64, ratio_sq: f64, open: bool) -> bool {
    let sq = sq as f64;
    if open {
        sq < ratio_sq * (1.0 - LATTICE_TOL)
    } else {
        sq <= ratio_sq * (1.0 + LATTICE_TOL)
    }
}

impl EuclideanGrid {
    /// Closed-ball grid centred on `center`.
    pub fn new(dim: usize, center: Vec<f64>, radius: f64, h: f64) -> Result<Self> {
        Self::on_lattice(center, h, vec![0; dim], radius, false)
    }

    /// Open-ball grid `B°(center; radius)` centred on `center`.
    pub fn open(dim: usize, center: Vec<f64>, radius: f64, h: f64) -> Result<Self> {
        Self::on_lattice(center, h, vec![0; dim], radius, true)
    }

    /// Grid on the lattice `anchor + h·ℤ^dim`, centred at the lattice point
    /// `anchor + h·center_key`. Grids sharing an anchor and spacing have
    /// bit-identical coordinates at shared lattice points.
    pub fn on_lattice(
        anchor: Vec<f64>,
        h: f64,
        center_key: Vec<i64>,
        radius: f64,
        open: bool,
    ) -> Result<Self> {
        let dim = anchor.len();
        if !(1..=4).contains(&dim) {
            return Err(Error::input(format!("grid dimension must be 1..=4, got {dim}")));
        }
        if center_key.len() != dim {
            return Err(Error::input("center key has the wrong dimension"));
        }
        if anchor.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("grid anchor must be finite"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::input(format!("grid radius must be positive, got {radius}")));
        }
        if !(h > 0.0 && h <= radius) {
            return Err(Error::input(format!("grid spacing must satisfy 0 < h <= radius, got h = {h}")));
        }
        let ratio = radius / h;
        let ratio_sq = ratio * ratio;
        let extent = (ratio * (1.0 + LATTICE_TOL)).floor() as i64;
        let side = (2 * extent + 1) as usize;
        let table = side
            .checked_pow(dim as u32)
            .filter(|&t| t <= MAX_LOOKUP)
            .ok_or_else(|| Error::input("grid too fine for this radius (lookup table cap)"))?;

        let mut lookup = vec![u32::MAX; table];
        let mut coords = Vec::new();
        let mut keys = Vec::new();
        let mut local = vec![-extent; dim];
        let mut n = 0usize;
        loop {
            let sq: i64 = local.iter().map(|k| k * k).sum();
            if in_ball(sq, ratio_sq, open) {
                let mut slot = 0usize;
                for &k in &local {
                    slot = slot * side + (k + extent) as usize;
                }
                lookup[slot] = n as u32;
                for d in 0..dim {
                    let key = center_key[d] + local[d];
                    keys.push(key);
                    coords.push(anchor[d] + h * key as f64);
                }
                n += 1;
            }
            // odometer over [-extent, extent]^dim, last axis fastest
            let mut axis = dim;
            loop {
                if axis == 0 {
                    return Ok(EuclideanGrid {
                        dim,
                        anchor,
                        center_key,
                        radius,
                        h,
                        open,
                        coords,
                        keys,
                        extent,
                        lookup,
                    });
                }
                axis -= 1;
                if local[axis] < extent {
                    local[axis] += 1;
                    break;
                }
                local[axis] = -extent;
            }
        }
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn center(&self) -> Vec<f64> {
        self.anchor
            .iter()
            .zip(&self.center_key)
            .map(|(a, &k)| a + self.h * k as f64)
            .collect()
    }

    /// Lattice key of point `i`, relative to the anchor.
    pub fn key(&self, i: usize) -> &[i64] {
        &self.keys[i * self.dim..(i + 1) * self.dim]
    }

    /// Index of the point with the given lattice key, if it is in the grid.
    pub fn index_of_key(&self, key: &[i64]) -> Option<usize> {
        let side = 2 * self.extent + 1;
        let mut slot = 0i64;
        for (k, c) in key.iter().zip(&self.center_key) {
            let local = k - c;
            if local.abs() > self.extent {
                return None;
            }
            slot = slot * side + local + self.extent;
        }
        match self.lookup[slot as usize] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }

    /// Grid point nearest to `x` (lattice rounding), if it lies in the grid.
    pub fn nearest(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim {
            return None;
        }
        let key: Vec<i64> = x
            .iter()
            .zip(&self.anchor)
            .map(|(v, a)| ((v - a) / self.h).round() as i64)
            .collect();
        self.index_of_key(&key)
    }

    /// Grid point within `h/2` of `x` in every coordinate, or an input error.
    pub fn locate(&self, x: &[f64]) -> Result<usize> {
        let i = self
            .nearest(x)
            .ok_or_else(|| Error::input(format!("point {x:?} is not inside the grid")))?;
        Ok(i)
    }

    fn offsets(&self, r: f64, open: bool) -> Vec<Vec<i64>> {
        let ratio = r / self.h;
        let ratio_sq = ratio * ratio;
        let m = (ratio * (1.0 + LATTICE_TOL)).floor() as i64;
        let mut out = Vec::new();
        let mut cur = vec![-m; self.dim];
        loop {
            let sq: i64 = cur.iter().map(|k| k * k).sum();
            if in_ball(sq, ratio_sq, open) {
                out.push(cur.clone());
            }
            let mut axis = self.dim;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if cur[axis] < m {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = -m;
            }
        }
    }

    fn lattice_ball(&self, x: usize, r: f64, open: bool) -> Vec<usize> {
        let base = self.key(x).to_vec();
        let mut out: Vec<usize> = self
            .offsets(r, open)
            .into_iter()
            .filter_map(|off| {
                let key: Vec<i64> = base.iter().zip(&off).map(|(a, b)| a + b).collect();
                self.index_of_key(&key)
            })
            .collect();
        out.sort_unstable();
        out
    }
}

impl MetricSpace for EuclideanGrid {
    fn len(&self) -> usize {
        self.keys.len() / self.dim
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        let sq: i64 = self
            .key(i)
            .iter()
            .zip(self.key(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        self.h * (sq as f64).sqrt()
    }

    fn label(&self, i: usize) -> String {
        let c = self.coords(i);
        let parts: Vec<String> = c.iter().map(|v| format!("{v}")).collect();
        format!("({})", parts.join(","))
    }

    fn closed_ball(&self, x: usize, r: f64) -> Vec<usize> {
        self.lattice_ball(x, r, false)
    }

    fn open_ball(&self, x: usize, r: f64) -> Vec<usize> {
        self.lattice_ball(x, r, true)
    }

    fn min_separation(&self) -> Option<f64> {
        (self.len() > 1).then_some(self.h)
    }
}

impl Coordinates for EuclideanGrid {
    fn dim(&self) -> usize {
        self.dim
    }

    fn coords(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn all_points_inside_closed_ball() {
        let g = EuclideanGrid::new(2, vec![0.3, -0.2], 1.0, 0.1).unwrap();
        for i in 0..g.len() {
            assert!(linalg::dist(g.coords(i), &[0.3, -0.2]) <= 1.0 + 1e-12);
        }
        // boundary lattice points are kept in the closed grid, dropped in the open one
        let o = EuclideanGrid::open(2, vec![0.3, -0.2], 1.0, 0.1).unwrap();
        // (±10,0), (0,±10), (±6,±8), (±8,±6)
        assert_eq!(g.len() - o.len(), 12);
    }

    #[test]
    fn dimension_one_layout() {
        let g = EuclideanGrid::new(1, vec![0.0], 1.0, 0.5).unwrap();
        let xs: Vec<f64> = (0..g.len()).map(|i| g.coords(i)[0]).collect();
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.dist(0, 4), 2.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(EuclideanGrid::new(0, vec![], 1.0, 0.1).is_err());
        assert!(EuclideanGrid::new(5, vec![0.0; 5], 1.0, 0.1).is_err());
        assert!(EuclideanGrid::new(1, vec![0.0], 1.0, 0.0).is_err());
        assert!(EuclideanGrid::new(1, vec![0.0], 1.0, 2.0).is_err());
        assert!(EuclideanGrid::new(1, vec![0.0], -1.0, 0.1).is_err());
    }

    #[test]
    fn lattice_sharing_gives_identical_coordinates() {
        let big = EuclideanGrid::on_lattice(vec![0.1, 0.2], 0.01, vec![0, 0], 0.5, true).unwrap();
        let small = EuclideanGrid::on_lattice(vec![0.1, 0.2], 0.01, vec![3, -4], 0.1, true).unwrap();
        for i in 0..small.len() {
            let j = big.index_of_key(small.key(i)).unwrap();
            assert_eq!(big.coords(j), small.coords(i));
        }
    }

    #[test]
    fn lattice_ball_matches_brute_force() {
        let g = EuclideanGrid::new(2, vec![0.0, 0.0], 0.5, 0.05).unwrap();
        for x in [0, 17, g.len() / 2, g.len() - 1] {
            for r in [0.0, 0.05, 0.07, 0.2] {
                let brute: Vec<usize> = (0..g.len()).filter(|&y| g.dist(x, y) <= r * (1.0 + 1e-12)).collect();
                assert_eq!(g.closed_ball(x, r), brute);
            }
        }
    }
}

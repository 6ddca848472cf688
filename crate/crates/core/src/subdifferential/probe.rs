use serde::{Deserialize, Serialize};

use super::catalog::CatalogEntry;
use super::SubdifferentialOracle;
use crate::error::{Error, Result};
use crate::linalg::{self, norm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionProbe {
    pub direction: Vec<f64>,
    /// Sampled `max (f(y + t h) − f(y)) / t`.
    pub estimate: f64,
    /// `σ_{∂f(x)}(h)`, the oracle's value of `f°(x; h)`.
    pub support: f64,
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub entry: String,
    pub point: Vec<f64>,
    pub t_min: f64,
    pub slack: f64,
    pub directions: Vec<DirectionProbe>,
    pub passed: bool,
}

/// Estimates the Clarke derivative `f°(x; h) = limsup (f(y + t h) − f(y)) / t`
/// by sampling base points `y` near `x` and steps `t ∈ {t_min, 2t_min, 4t_min}`,
/// and checks that the oracle's support function dominates every estimate
/// up to a first-order slack.
pub fn clarke_slope_probe(
    entry: &CatalogEntry,
    x: &[f64],
    directions: &[Vec<f64>],
    t_min: f64,
) -> Result<ProbeReport> {
    if !entry.lipschitz_flag {
        return Err(Error::Unsupported(format!(
            "entry {} is not locally Lipschitz; the reduced Clarke formula does not apply",
            entry.id
        )));
    }
    if x.len() != entry.dim() {
        return Err(Error::input("probe point has the wrong dimension"));
    }
    if !(t_min > 0.0) {
        return Err(Error::input("t_min must be positive"));
    }
    let set = entry
        .subdifferential_at(x)
        .ok_or_else(|| Error::input("empty subdifferential at the probe point"))?;
    let dim = x.len();
    let steps = [t_min, 2.0 * t_min, 4.0 * t_min];
    // base points: x itself and x ± k·t_min along each axis and along h
    let reach = 4.0 * t_min;
    let curvature = entry.params.curvature_bound(x, 2.0 * reach);
    let slack = 1e-9 + 20.0 * reach * (1.0 + curvature);
    let mut out = Vec::with_capacity(directions.len());
    for h in directions {
        if h.len() != dim {
            return Err(Error::input("probe direction has the wrong dimension"));
        }
        let mut offsets = vec![vec![0.0; dim]];
        for k in [1.0, 2.0, 4.0] {
            for s in [-1.0, 1.0] {
                offsets.push(linalg::scale(h, s * k * t_min));
                for i in 0..dim {
                    let mut e = vec![0.0; dim];
                    e[i] = s * k * t_min;
                    offsets.push(e);
                }
            }
        }
        let mut estimate = f64::NEG_INFINITY;
        for off in &offsets {
            let y = linalg::add(x, off);
            let fy = entry.eval(&y);
            for &t in &steps {
                let q = (entry.eval(&linalg::axpy(&y, t, h)) - fy) / t;
                estimate = estimate.max(q);
            }
        }
        let support = set.support(h);
        out.push(DirectionProbe {
            direction: h.clone(),
            estimate,
            support,
            dominated: support >= estimate - slack * (1.0 + norm(h)),
        });
    }
    Ok(ProbeReport {
        entry: entry.id.clone(),
        point: x.to_vec(),
        t_min,
        slack,
        passed: out.iter().all(|d| d.dominated),
        directions: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subdifferential::{Catalog, Kind};
    use crate::subdifferential::expr::Expr;

    #[test]
    fn linear_is_exact() {
        let cat = Catalog::builtin();
        let lin = cat.get("linear").unwrap();
        let r = clarke_slope_probe(lin, &[0.3, 0.1], &[vec![1.0, 0.0], vec![0.6, -0.8]], 1e-6).unwrap();
        assert!(r.passed);
        assert!((r.directions[0].estimate - 1.8).abs() < 1e-6);
        assert!((r.directions[1].estimate - (1.8 * 0.6 - 2.4 * 0.8)).abs() < 1e-6);
    }

    #[test]
    fn abs_and_neg_abs_at_zero() {
        let cat = Catalog::builtin();
        let r = clarke_slope_probe(cat.get("abs").unwrap(), &[0.0], &[vec![1.0]], 1e-6).unwrap();
        assert!((r.directions[0].estimate - 1.0).abs() < 1e-9);
        assert!(r.passed);
        let r = clarke_slope_probe(cat.get("neg_abs").unwrap(), &[0.0], &[vec![1.0]], 1e-6).unwrap();
        assert!((r.directions[0].estimate - 1.0).abs() < 1e-9);
        assert_eq!(r.directions[0].support, 1.0);
        assert!(r.passed);
    }

    #[test]
    fn non_lipschitz_is_unsupported() {
        let mut e = CatalogEntry::new("lin", Kind::Smooth, Expr::zero(1)).unwrap();
        e.lipschitz_flag = false;
        assert!(matches!(clarke_slope_probe(&e, &[0.0], &[vec![1.0]], 1e-6), Err(Error::Unsupported(_))));
    }

    #[test]
    fn whole_catalog_is_dominated() {
        let cat = Catalog::builtin();
        for e in &cat.entries {
            let dim = e.dim();
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
            let fan = linalg::direction_fan(dim, 4, &mut rng);
            for x in [vec![0.0; dim], vec![0.37; dim], vec![1.0; dim]] {
                let r = clarke_slope_probe(e, &x, &fan, 1e-7).unwrap();
                assert!(r.passed, "{} at {x:?}: {:?}", e.id, r.directions);
            }
        }
    }
}

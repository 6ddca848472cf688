//! Nearest point to the origin in the convex hull of finitely many points.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Vertex count up to which the exact active-set enumeration is used.
pub const EXACT_LIMIT: usize = 8;
/// Stopping tolerance of Wolfe's iteration.
pub const WOLFE_TOL: f64 = 1e-9;
const WOLFE_MAX_ITER: usize = 2000;

/// Min-norm point of `conv(points)`, choosing the method by size.
pub fn min_norm_hull(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    check(points)?;
    if points.len() <= EXACT_LIMIT {
        min_norm_exact(points)
    } else {
        min_norm_wolfe(points)
    }
}

fn check(points: &[Vec<f64>]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptySubdifferential)?;
    let dim = first.len();
    if points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return Err(Error::input("vertices must be finite and share one dimension"));
    }
    Ok(dim)
}

fn combine(points: &[Vec<f64>], subset: &[usize], weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; points[0].len()];
    for (&i, &w) in subset.iter().zip(weights) {
        for (o, v) in out.iter_mut().zip(&points[i]) {
            *o += w * v;
        }
    }
    out
}

/// Minimizer of `‖Σ λᵢ pᵢ‖` over the affine hull of `subset`
/// (`Σ λᵢ = 1`, signs free). `None` when the subset is affinely dependent.
fn affine_min(points: &[Vec<f64>], subset: &[usize]) -> Option<Vec<f64>> {
    let k = subset.len();
    if k == 1 {
        return Some(vec![1.0]);
    }
    let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
    let mut rhs = DVector::<f64>::zeros(k + 1);
    for a in 0..k {
        for b in 0..k {
            m[(a, b)] = dot(&points[subset[a]], &points[subset[b]]);
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
    }
    rhs[k] = 1.0;
    // affine dependence shows up as a (near) singular Gram block; reject it
    // via the conditioning of the edge vectors rather than trusting LU pivots
    let base = &points[subset[0]];
    let dim = base.len();
    if k - 1 > dim {
        return None;
    }
    let edges = DMatrix::from_fn(dim, k - 1, |r, c| points[subset[c + 1]][r] - base[r]);
    let sv = edges.singular_values();
    let smax = sv.max();
    if !(smax > 0.0) || sv.min() <= 1e-10 * smax {
        return None;
    }
    let sol = m.lu().solve(&rhs)?;
    let lambda: Vec<f64> = sol.iter().take(k).copied().collect();
    lambda.iter().all(|v| v.is_finite()).then_some(lambda)
}

/// Exhaustive active-set enumeration: the min-norm point lies in the
/// relative interior of a face spanned by at most `dim + 1` affinely
/// independent vertices, where it equals that face's affine minimizer.
pub fn min_norm_exact(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let dim = check(points)?;
    let m = points.len();
    if m > 16 {
        return Err(Error::input("exact enumeration is limited to 16 vertices"));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1u32 << m) {
        let size = mask.count_ones() as usize;
        if size > dim + 1 {
            continue;
        }
        let subset: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let Some(lambda) = affine_min(points, &subset) else { continue };
        if lambda.iter().any(|&l| l < -1e-12) {
            continue;
        }
        let q = combine(points, &subset, &lambda);
        let n = norm(&q);
        if best.as_ref().is_none_or(|(b, _)| n < *b) {
            best = Some((n, q));
        }
    }
    best.map(|(_, q)| q)
        .ok_or_else(|| Error::Numerical("active-set enumeration found no feasible face".into()))
}

/// Wolfe's min-norm-point iteration.
pub fn min_norm_wolfe(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    check(points)?;
    let scale = points.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(1e-300);
    let start = (0..points.len())
        .min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b])))
        .expect("nonempty");
    let mut active = vec![start];
    let mut weights = vec![1.0];
    let mut x = points[start].clone();
    for _ in 0..WOLFE_MAX_ITER {
        let xx = dot(&x, &x);
        let j = (0..points.len())
            .min_by(|&a, &b| dot(&x, &points[a]).total_cmp(&dot(&x, &points[b])))
            .expect("nonempty");
        if xx - dot(&x, &points[j]) <= WOLFE_TOL * scale || active.contains(&j) {
            return Ok(x);
        }
        active.push(j);
        weights.push(0.0);
        loop {
            let Some(alpha) = affine_min(points, &active) else {
                // the new vertex is affinely dependent on the active face
                active.pop();
                weights.pop();
                return Ok(x);
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                weights = alpha;
                x = combine(points, &active, &weights);
                break;
            }
            let theta = weights
                .iter()
                .zip(&alpha)
                .filter(|(_, &a)| a <= 1e-14)
                .map(|(&w, &a)| w / (w - a))
                .fold(1.0, f64::min);
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w += theta * (a - *w);
            }
            let mut k = 0;
            while k < active.len() {
                if weights[k] <= 1e-14 {
                    active.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            x = combine(points, &active, &weights);
        }
    }
    Err(Error::Numerical("Wolfe iteration did not converge".into()))
}

//! Ekeland points on finite spaces and the slope-perturbed minimization
//! built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::metric_space::{MetricSpace, ScalarField};
use crate::slope::{discrete_slope, lip_estimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EkelandResult {
    pub start: usize,
    pub x_lambda: usize,
    pub lambda: f64,
    /// `f(x₀) − f(x_λ)`.
    pub decrease: f64,
    /// `f(x₀) − f(x_λ) − λ·d(x_λ, x₀)`, nonnegative when the first inequality holds.
    pub descent_margin: f64,
    /// `min_{x ≠ x_λ} f(x) + λ·d(x_λ, x) − f(x_λ)`; `None` if no other point is in `dom f`.
    pub strict_margin: Option<f64>,
    pub strict_min_verified: bool,
    pub iterations: usize,
}

/// Outcome of checking both Ekeland inequalities by brute force.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EkelandCheck {
    pub descent_holds: bool,
    /// Points `x ≠ x_λ` with `f(x) + λ·d(x_λ, x) ≤ f(x_λ)`.
    pub strict_violations: Vec<usize>,
}

impl EkelandCheck {
    pub fn passed(&self) -> bool {
        self.descent_holds && self.strict_violations.is_empty()
    }
}

fn validate<S: MetricSpace + ?Sized>(space: &S, f: &ScalarField, x0: usize, lambda: f64) -> Result<f64> {
    if f.len() != space.len() {
        return Err(Error::input("field length does not match the space"));
    }
    if x0 >= space.len() {
        return Err(Error::input(format!("unknown point {x0}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::input(format!("lambda must be positive, got {lambda}")));
    }
    f.finite_at(x0)
}

/// Brute-force check of `λ·d(x_λ,x₀) ≤ f(x₀) − f(x_λ)` and
/// `f(x) + λ·d(x_λ,x) > f(x_λ)` for every `x ≠ x_λ`.
pub fn verify_ekeland<S: MetricSpace + ?Sized>(
    space: &S,
    f: &ScalarField,
    x0: usize,
    lambda: f64,
    x_lambda: usize,
) -> Result<EkelandCheck> {
    let f0 = validate(space, f, x0, lambda)?;
    let fl = f.finite_at(x_lambda)?;
    let strict_violations = (0..space.len())
        .filter(|&x| x != x_lambda)
        .filter(|&x| match f.value(x) {
            ExtReal::Finite(fx) => !(lambda * space.dist(x_lambda, x) > fl - fx),
            ExtReal::PosInf => false,
        })
        .collect();
    Ok(EkelandCheck {
        descent_holds: lambda * space.dist(x_lambda, x0) <= f0 - fl,
        strict_violations,
    })
}

/// Finds `x_λ` with `λ·d(x_λ,x₀) ≤ f(x₀) − f(x_λ)` and `x_λ` a strict
/// minimizer of `f + λ·d(x_λ, ·)`.
///
/// From the current point `c` the iteration moves to the minimizer of `f`
/// (lowest index on ties) over `{x ≠ c : λ·d(x,c) ≤ f(c) − f(x)}` and stops
/// once that set is empty. By the triangle inequality the first move already
/// lands on a valid point; further moves only absorb rounding.
pub fn ekeland_point<S: MetricSpace + ?Sized>(
    space: &S,
    f: &ScalarField,
    x0: usize,
    lambda: f64,
) -> Result<EkelandResult> {
    let f0 = validate(space, f, x0, lambda)?;
    let mut cur = x0;
    let mut fc = f0;
    let mut iterations = 0;
    loop {
        let mut next: Option<(usize, f64)> = None;
        for x in 0..space.len() {
            if x == cur {
                continue;
            }
            let Some(fx) = f.value(x).finite() else { continue };
            if lambda * space.dist(x, cur) <= fc - fx && next.is_none_or(|(_, best)| fx < best) {
                next = Some((x, fx));
            }
        }
        match next {
            // every move lowers f by at least λ times a positive distance, so this terminates
            Some((x, fx)) => {
                cur = x;
                fc = fx;
                iterations += 1;
            }
            None => break,
        }
    }
    let strict_margin = (0..space.len())
        .filter(|&x| x != cur)
        .filter_map(|x| f.value(x).finite().map(|fx| fx + lambda * space.dist(cur, x) - fc))
        .reduce(f64::min);
    let check = verify_ekeland(space, f, x0, lambda, cur)?;
    Ok(EkelandResult {
        start: x0,
        x_lambda: cur,
        lambda,
        decrease: f0 - fc,
        descent_margin: f0 - fc - lambda * space.dist(cur, x0),
        strict_margin,
        strict_min_verified: check.strict_violations.is_empty(),
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedMinReport {
    pub x_eps: usize,
    pub eps: f64,
    /// The `ε`-minimizer of `f + g` the Ekeland step started from.
    pub start: usize,
    pub value: f64,
    pub infimum: f64,
    /// `(f+g)(x_ε) ≤ inf(f+g) + ε`.
    pub near_minimal: bool,
    /// Resolution at which the slope comparison was made; `None` means exact
    /// finite-space slopes (identically zero).
    pub resolution: Option<f64>,
    pub slope: f64,
    pub lip: f64,
    /// `slope ≤ lip + ε`.
    pub slope_bound_holds: bool,
    pub ekeland: EkelandResult,
}

/// Returns `x_ε` with `(f+g)(x_ε) ≤ inf(f+g) + ε` and
/// `slope(f, x_ε) ≤ lip g(x_ε) + ε`.
///
/// `g` must be finite everywhere. Ekeland's principle is applied to `f + g`
/// with `λ = ε` from the lowest-index `ε`-minimizer. With `resolution = Some(ρ)`
/// the slope and Lipschitz modulus are taken over the ball of radius `ρ`
/// around `x_ε`; the bound then holds exactly because `x_ε` strictly
/// minimizes `f + g + ε·d(x_ε, ·)`.
pub fn slope_perturbed_min<S: MetricSpace + ?Sized>(
    space: &S,
    f: &ScalarField,
    g: &ScalarField,
    eps: f64,
    resolution: Option<f64>,
) -> Result<(usize, PerturbedMinReport)> {
    if g.len() != space.len() || f.len() != space.len() {
        return Err(Error::input("field length does not match the space"));
    }
    if let Some(i) = (0..g.len()).find(|&i| !g.is_finite_at(i)) {
        return Err(Error::input(format!("perturbation g must be real-valued; g is +inf at point {i}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::input(format!("eps must be positive, got {eps}")));
    }
    let h = f.sum(g)?;
    let (_, infimum) = h.argmin();
    let start = h
        .domain()
        .find(|&i| h.value(i).to_f64() <= infimum + eps)
        .expect("the minimizer is an eps-minimizer");
    let ekeland = ekeland_point(space, &h, start, eps)?;
    let x = ekeland.x_lambda;
    let value = h.value(x).to_f64();
    let (slope, lip) = match resolution {
        Some(rho) => (
            discrete_slope(space, f, x, rho)?.value.to_f64(),
            lip_estimate(space, g, x, rho)?.value,
        ),
        None => (0.0, 0.0),
    };
    let report = PerturbedMinReport {
        x_eps: x,
        eps,
        start,
        value,
        infimum,
        near_minimal: value <= infimum + eps,
        resolution,
        slope,
        lip,
        slope_bound_holds: slope <= lip + eps,
        ekeland,
    };
    Ok((x, report))
}

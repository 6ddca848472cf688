//! Analytic subdifferential oracles, min-norm elements and the sum rule.

pub mod catalog;
pub mod convex_set;
pub mod expr;
pub mod min_norm;
pub mod probe;

pub use catalog::{Catalog, CatalogEntry, Kind};
pub use convex_set::{ConvexSet, Normalized};
pub use expr::Expr;
pub use probe::{clarke_slope_probe, ProbeReport};

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::linalg::norm;

/// Point-to-set rule `x ↦ ∂f(x)`; `None` is the empty set.
pub trait SubdifferentialOracle: Sync {
    fn dim(&self) -> usize;
    fn subdifferential_at(&self, x: &[f64]) -> Option<ConvexSet>;
    fn provenance(&self) -> String;
}

impl SubdifferentialOracle for Expr {
    fn dim(&self) -> usize {
        Expr::dim(self)
    }

    fn subdifferential_at(&self, x: &[f64]) -> Option<ConvexSet> {
        Some(self.subdifferential(x))
    }

    fn provenance(&self) -> String {
        "expression".into()
    }
}

/// Pointwise Minkowski sum `∂f(x) + ∂h(x)`.
pub struct SumOracle<'a> {
    f: &'a dyn SubdifferentialOracle,
    h: &'a CatalogEntry,
}

impl SubdifferentialOracle for SumOracle<'_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn subdifferential_at(&self, x: &[f64]) -> Option<ConvexSet> {
        let a = self.f.subdifferential_at(x)?;
        let b = self.h.subdifferential_at(x)?;
        Some(a.plus(&b))
    }

    fn provenance(&self) -> String {
        format!("{} + {}", self.f.provenance(), self.h.id)
    }
}

/// Sum rule oracle; `h` must be locally Lipschitz and F-regular.
pub fn sum_oracle<'a>(f: &'a dyn SubdifferentialOracle, h: &'a CatalogEntry) -> Result<SumOracle<'a>> {
    if !(h.lipschitz_flag && h.f_regular_flag) {
        return Err(Error::input(format!(
            "sum rule needs a locally Lipschitz, F-regular summand; {} is not",
            h.id
        )));
    }
    if f.dim() != h.dim() {
        return Err(Error::input(format!("dimension mismatch: {} vs {}", f.dim(), h.dim())));
    }
    Ok(SumOracle { f, h })
}

/// `min{‖p‖ : p ∈ ∂f(x)}`, `+∞` when `∂f(x)` is empty.
pub fn slope_from_subdifferential(oracle: &dyn SubdifferentialOracle, x: &[f64]) -> Result<ExtReal> {
    match oracle.subdifferential_at(x) {
        None => Ok(ExtReal::PosInf),
        Some(set) => match set.min_norm_element() {
            Ok(p) => Ok(ExtReal::Finite(norm(&p))),
            Err(Error::EmptySubdifferential) => Ok(ExtReal::PosInf),
            Err(e) => Err(e),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Empty;
    impl SubdifferentialOracle for Empty {
        fn dim(&self) -> usize {
            1
        }
        fn subdifferential_at(&self, _: &[f64]) -> Option<ConvexSet> {
            None
        }
        fn provenance(&self) -> String {
            "empty".into()
        }
    }

    #[test]
    fn slope_examples() {
        let cat = Catalog::builtin();
        let s = slope_from_subdifferential(cat.get("half_sq_norm").unwrap(), &[1.0, 2.0]).unwrap();
        assert!((s.to_f64() - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(slope_from_subdifferential(cat.get("l1").unwrap(), &[0.0, 0.0]).unwrap(), ExtReal::ZERO);
        assert_eq!(slope_from_subdifferential(cat.get("hinge").unwrap(), &[1.0]).unwrap(), ExtReal::ZERO);
        assert_eq!(slope_from_subdifferential(&Empty, &[0.0]).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn sum_rule_examples() {
        let abs = CatalogEntry::new("abs", Kind::Convex, Expr::NormDist { center: vec![0.0], weight: 1.0 }).unwrap();
        let id = CatalogEntry::new("x", Kind::Smooth, Expr::Affine { slope: vec![1.0], offset: 0.0 }).unwrap();
        let zero = CatalogEntry::new("zero", Kind::Smooth, Expr::zero(1)).unwrap();
        // [-1, 1] + 1 = [0, 2]
        let s = sum_oracle(&abs, &id).unwrap().subdifferential_at(&[0.0]).unwrap();
        assert_eq!((s.support(&[1.0]), -s.support(&[-1.0])), (2.0, 0.0));
        // adding zero changes nothing
        let z = sum_oracle(&abs, &zero).unwrap().subdifferential_at(&[0.0]).unwrap();
        assert_eq!(z.support(&[1.0]), 1.0);
        assert_eq!(z.support(&[-1.0]), 1.0);
        // smooth + smooth is the gradient sum
        let two = sum_oracle(&id, &id).unwrap().subdifferential_at(&[0.3]).unwrap();
        assert_eq!(two, ConvexSet::Point(vec![2.0]));

        let neg = CatalogEntry::new("neg", Kind::Composite, Expr::scale(-1.0, abs.params.clone())).unwrap();
        assert!(sum_oracle(&abs, &neg).is_err());
        let wide = CatalogEntry::new("w", Kind::Smooth, Expr::zero(2)).unwrap();
        assert!(sum_oracle(&abs, &wide).is_err());
    }
}

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::{ConvexSet, SubdifferentialOracle};
use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::metric_space::{Coordinates, ScalarField};

const BUILTIN: &str = include_str!("../../data/catalog.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Smooth,
    Convex,
    Composite,
    Sum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub id: String,
    pub kind: Kind,
    pub params: Expr,
    pub lipschitz_flag: bool,
    pub f_regular_flag: bool,
}

impl CatalogEntry {
    pub fn new(id: impl Into<String>, kind: Kind, params: Expr) -> Result<Self> {
        let entry = CatalogEntry {
            id: id.into(),
            kind,
            f_regular_flag: params.is_f_regular(),
            lipschitz_flag: true,
            params,
        };
        entry.validate()?;
        Ok(entry)
    }

    /// Checks the expression and that the declared flags are backed by it.
    pub fn validate(&self) -> Result<usize> {
        let dim = self.params.validate()?;
        let bad = |what: &str| Err(Error::input(format!("catalog entry {}: {what}", self.id)));
        if self.f_regular_flag && !self.params.is_f_regular() {
            return bad("flagged F-regular but the expression is not");
        }
        match self.kind {
            Kind::Smooth if !self.params.is_smooth() => bad("kind smooth but the expression has kinks"),
            Kind::Convex if !self.params.is_convex() => bad("kind convex but the expression is not convex"),
            _ => Ok(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn is_convex(&self) -> bool {
        self.params.is_convex()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.params.eval(x)
    }

    /// Samples the entry on a coordinate space.
    pub fn field<S: Coordinates>(&self, space: &S) -> Result<ScalarField> {
        if space.dim() != self.dim() {
            return Err(Error::input(format!(
                "entry {} has dimension {} but the space has {}",
                self.id,
                self.dim(),
                space.dim()
            )));
        }
        ScalarField::sample(space, |x| ExtReal::Finite(self.eval(x)))
    }
}

impl SubdifferentialOracle for CatalogEntry {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn subdifferential_at(&self, x: &[f64]) -> Option<ConvexSet> {
        Some(self.params.subdifferential(x))
    }

    fn provenance(&self) -> String {
        self.id.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn parse(text: &str) -> Result<Self> {
        let catalog: Catalog = serde_json::from_str(text).map_err(|e| Error::input(format!("catalog: {e}")))?;
        for (i, e) in catalog.entries.iter().enumerate() {
            e.validate()?;
            if catalog.entries[..i].iter().any(|o| o.id == e.id) {
                return Err(Error::input(format!("duplicate catalog id {}", e.id)));
            }
        }
        Ok(catalog)
    }

    /// The catalog shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("shipped catalog is valid")
    }

    pub fn get(&self, id: &str) -> Result<&CatalogEntry> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::input(format!("unknown catalog entry {id}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtin_parses_and_flags_match() {
        let cat = Catalog::builtin();
        assert!(cat.entries.len() >= 12);
        assert!(!cat.get("neg_abs").unwrap().f_regular_flag);
        assert!(cat.get("composite_ring").unwrap().is_convex());
        assert!(!cat.get("concave_cap").unwrap().is_convex());
        assert!(cat.get("nope").is_err());
    }

    #[test]
    fn false_flags_are_rejected() {
        let text = r#"[{"id":"x","kind":"convex","params":{"type":"quadratic","diag":[-1],"center":[0]},
            "lipschitz_flag":true,"f_regular_flag":true}]"#;
        assert!(Catalog::parse(text).is_err());
        let unknown = r#"[{"id":"x","kind":"smooth","params":{"type":"affine","slope":[1],"offset":0},
            "lipschitz_flag":true,"f_regular_flag":true,"extra":1}]"#;
        assert!(Catalog::parse(unknown).is_err());
    }

    #[test]
    fn convex_entries_satisfy_the_subgradient_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for e in Catalog::builtin().entries.iter().filter(|e| e.is_convex()) {
            let dim = e.dim();
            let origin = vec![0.0; dim];
            for k in 0..1000 {
                // every few pairs, put x on a lattice of kinks so set-valued cases are exercised
                let mut x = linalg::random_in_ball(&origin, 1.5, &mut rng);
                if k % 4 == 0 {
                    x.iter_mut().for_each(|v| *v = (*v * 2.0).round() / 2.0);
                }
                let y = linalg::random_in_ball(&origin, 1.5, &mut rng);
                let set = e.subdifferential_at(&x).unwrap();
                let mut ps = set.test_points(2, &mut rng).unwrap();
                ps.push(set.support_point(&linalg::sub(&y, &x)));
                for p in ps {
                    let rhs = e.eval(&x) + linalg::dot(&p, &linalg::sub(&y, &x));
                    assert!(e.eval(&y) >= rhs - 1e-9, "{} at {x:?} -> {y:?}", e.id);
                }
            }
        }
    }
}

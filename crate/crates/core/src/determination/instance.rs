use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subdifferential::{Catalog, Expr};

/// A function given inline or by catalog id, optionally scaled and shifted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Catalog(CatalogRef),
    Inline(Expr),
}

/// `scale · entry + shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogRef {
    pub catalog: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
}

impl FieldSpec {
    pub fn resolve(&self, catalog: &Catalog) -> Result<Expr> {
        let expr = match self {
            FieldSpec::Inline(e) => e.clone(),
            FieldSpec::Catalog(r) => {
                let mut e = catalog.get(&r.catalog)?.params.clone();
                if let Some(s) = r.scale {
                    e = Expr::scale(s, e);
                }
                if let Some(k) = r.shift {
                    e = e.shifted(k);
                }
                e
            }
        };
        expr.validate()?;
        Ok(expr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub equal_up_to_constant: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
}

/// Instance file as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub f: FieldSpec,
    pub g: FieldSpec,
    pub center: Vec<f64>,
    pub c: f64,
    pub delta: f64,
    pub expected: Expected,
}

/// A pair `f, g` with a base point `x̄` and PLR constants `(c, δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterminationInstance {
    pub id: String,
    pub f: Expr,
    pub g: Expr,
    pub center: Vec<f64>,
    pub c: f64,
    pub delta: f64,
    pub expected: Expected,
}

impl DeterminationInstance {
    pub fn parse(text: &str, catalog: &Catalog) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::input(format!("instance: {e}")))?;
        Self::from_file(&file, catalog)
    }

    pub fn from_file(file: &InstanceFile, catalog: &Catalog) -> Result<Self> {
        let inst = DeterminationInstance {
            id: file.id.clone(),
            f: file.f.resolve(catalog)?,
            g: file.g.resolve(catalog)?,
            center: file.center.clone(),
            c: file.c,
            delta: file.delta,
            expected: file.expected.clone(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let df = self.f.validate()?;
        let dg = self.g.validate()?;
        if df != dg || df != self.center.len() {
            return Err(Error::input(format!(
                "{}: f, g and the center must share one dimension",
                self.id
            )));
        }
        if self.center.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("center must be finite"));
        }
        if !(self.c > 0.0 && self.c.is_finite() && self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::input("c and delta must be positive and finite"));
        }
        if self.expected.equal_up_to_constant && self.expected.a.is_none() {
            return Err(Error::input("a positive instance must state its constant a"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `f(x̄) − g(x̄)`.
    pub fn offset(&self) -> f64 {
        self.f.eval(&self.center) - self.g.eval(&self.center)
    }

    /// The same instance with `f` and `g` exchanged and the constant negated.
    pub fn swapped(&self) -> Self {
        DeterminationInstance {
            id: format!("{}_swapped", self.id),
            f: self.g.clone(),
            g: self.f.clone(),
            center: self.center.clone(),
            c: self.c,
            delta: self.delta,
            expected: Expected {
                equal_up_to_constant: self.expected.equal_up_to_constant,
                a: self.expected.a.map(|a| -a),
            },
        }
    }
}

const BUILTIN: [(&str, &str); 9] = [
    ("concave_a0", include_str!("../../data/instances/concave_a0.json")),
    ("saddle_a1", include_str!("../../data/instances/saddle_a1.json")),
    ("shift_2p5", include_str!("../../data/instances/shift_2p5.json")),
    ("kink_m3", include_str!("../../data/instances/kink_m3.json")),
    ("composite_a1", include_str!("../../data/instances/composite_a1.json")),
    ("quad_m3", include_str!("../../data/instances/quad_m3.json")),
    ("neg_scaled", include_str!("../../data/instances/neg_scaled.json")),
    ("neg_perturbed_kink", include_str!("../../data/instances/neg_perturbed_kink.json")),
    ("neg_shifted_arg", include_str!("../../data/instances/neg_shifted_arg.json")),
];

/// Ids of the shipped instances whose pieces are all smooth.
pub const SMOOTH_POSITIVE: [&str; 3] = ["concave_a0", "saddle_a1", "quad_m3"];

/// The shipped instances, positive pairs first.
pub fn builtin_instances() -> Vec<DeterminationInstance> {
    let catalog = Catalog::builtin();
    BUILTIN
        .iter()
        .map(|(_, text)| DeterminationInstance::parse(text, &catalog).expect("shipped instance is valid"))
        .collect()
}

pub fn builtin_instance(id: &str) -> Result<DeterminationInstance> {
    let (_, text) = BUILTIN
        .iter()
        .find(|(name, _)| *name == id)
        .ok_or_else(|| Error::input(format!("unknown instance {id}")))?;
    DeterminationInstance::parse(text, &Catalog::builtin())
}

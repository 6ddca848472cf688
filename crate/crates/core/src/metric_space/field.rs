use super::Coordinates;
use crate::error::{Error, Result};
use crate::extended::ExtReal;

/// Extended-real values indexed by the points of a space.
///
/// Always proper: at least one value is finite. Lower semicontinuity is
/// automatic on finite spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<ExtReal>,
}

impl ScalarField {
    pub fn new(values: Vec<ExtReal>) -> Result<Self> {
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::Improper);
        }
        Ok(ScalarField { values })
    }

    pub fn from_finite(values: Vec<f64>) -> Result<Self> {
        let values = values
            .into_iter()
            .map(|v| ExtReal::from_f64(v).ok_or_else(|| Error::input("field value is NaN or -inf")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    /// Samples `rule` at every point of a coordinate space.
    pub fn sample<S, F>(space: &S, rule: F) -> Result<Self>
    where
        S: Coordinates + ?Sized,
        F: Fn(&[f64]) -> ExtReal,
    {
        Self::new((0..space.len()).map(|i| rule(space.coords(i))).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> ExtReal {
        self.values[i]
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    /// Finite value at `i`, or a domain error.
    pub fn finite_at(&self, i: usize) -> Result<f64> {
        self.values[i].finite().ok_or(Error::Domain { point: i })
    }

    pub fn is_finite_at(&self, i: usize) -> bool {
        self.values[i].is_finite()
    }

    /// Indices of `dom f`.
    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, _)| i)
    }

    pub fn restrict(&self, members: &[usize]) -> ScalarField {
        ScalarField {
            values: members.iter().map(|&m| self.values[m]).collect(),
        }
    }

    /// `r·f` for `r ≥ 0`.
    pub fn scaled(&self, r: f64) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|v| v.scale(r)).collect(),
        }
    }

    /// `f + c`.
    pub fn shifted(&self, c: f64) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|v| v.add_f64(c)).collect(),
        }
    }

    /// Pointwise sum; improper results are an error.
    pub fn sum(&self, other: &ScalarField) -> Result<ScalarField> {
        if self.len() != other.len() {
            return Err(Error::input("field lengths differ"));
        }
        ScalarField::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.add(*b))
                .collect(),
        )
    }

    /// Minimum over the domain with the lowest index achieving it.
    pub fn argmin(&self) -> (usize, f64) {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in self.values.iter().enumerate() {
            if let ExtReal::Finite(v) = *v {
                if best.is_none_or(|(_, b)| v < b) {
                    best = Some((i, v));
                }
            }
        }
        best.expect("proper field has a finite value")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn improper_field_is_rejected() {
        assert_eq!(ScalarField::new(vec![ExtReal::PosInf]).unwrap_err(), Error::Improper);
        assert!(ScalarField::from_finite(vec![f64::NAN]).is_err());
    }

    #[test]
    fn argmin_breaks_ties_by_index() {
        let f = ScalarField::from_finite(vec![2.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!(f.argmin(), (1, 1.0));
    }

    #[test]
    fn arithmetic_keeps_infinity() {
        let f = ScalarField::new(vec![ExtReal::Finite(1.0), ExtReal::PosInf]).unwrap();
        let g = f.scaled(2.0).shifted(1.0);
        assert_eq!(g.values(), &[ExtReal::Finite(3.0), ExtReal::PosInf]);
        assert_eq!(f.domain().collect::<Vec<_>>(), vec![0]);
    }
}

//! Extended reals `ℝ ∪ {+∞}` with an explicit infinity tag.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A value in `ℝ ∪ {+∞}`.
///
/// `+∞` is a dedicated variant; it is never represented by a large float,
/// so no arithmetic silently runs on infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Wraps a float; `+inf` maps to [`ExtReal::PosInf`]. NaN and `-inf` are rejected.
    pub fn from_f64(v: f64) -> Option<Self> {
        if v.is_nan() || v == f64::NEG_INFINITY {
            None
        } else if v == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else {
            Some(ExtReal::Finite(v))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// The finite value, or a panic naming the caller's invariant.
    pub fn expect_finite(self, what: &str) -> f64 {
        self.finite()
            .unwrap_or_else(|| panic!("{what}: expected a finite value"))
    }

    /// Float view with `+inf` for the infinite tag. For reporting only.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn scale(self, r: f64) -> Self {
        debug_assert!(r >= 0.0);
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(r * v),
            ExtReal::PosInf if r == 0.0 => ExtReal::ZERO,
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }

    pub fn add(self, other: ExtReal) -> Self {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }

    pub fn add_f64(self, b: f64) -> Self {
        match self {
            ExtReal::Finite(a) => ExtReal::Finite(a + b),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v).expect("ExtReal::from: NaN or -inf")
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

// JSON encoding: finite values are numbers, +inf is the string "inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a finite number or the string \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                if v.is_finite() {
                    Ok(ExtReal::Finite(v))
                } else {
                    Err(E::custom("non-finite number"))
                }
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" => Ok(ExtReal::PosInf),
                    other => Err(E::custom(format!("expected \"inf\", got {other:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinity_last() {
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInf);
        assert!(ExtReal::Finite(-1.0) < ExtReal::Finite(0.0));
        assert_eq!(ExtReal::PosInf.partial_cmp(&ExtReal::PosInf), Some(Ordering::Equal));
    }

    #[test]
    fn arithmetic_absorbs_infinity() {
        assert_eq!(ExtReal::Finite(1.0).add(ExtReal::PosInf), ExtReal::PosInf);
        assert_eq!(ExtReal::PosInf.scale(0.0), ExtReal::ZERO);
        assert_eq!(ExtReal::Finite(2.0).scale(3.0), ExtReal::Finite(6.0));
    }

    #[test]
    fn json_roundtrip() {
        let v = vec![ExtReal::Finite(0.5), ExtReal::PosInf];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[0.5,\"inf\"]");
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<ExtReal>("\"-inf\"").is_err());
    }
}

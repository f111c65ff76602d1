//! Nonnegative extended reals: a finite value or `+∞`.
//!
//! Distances between symbols may be infinite. Arithmetic follows the usual
//! conventions: `∞ + a = ∞` and `e^{-∞} = 0`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

pub use ExtReal::{Finite, Infinity};

impl ExtReal {
    pub const ZERO: ExtReal = Finite(0.0);

    /// Converts a float; `+inf` maps to [`Infinity`]. NaN is rejected.
    pub fn from_f64(v: f64) -> Option<ExtReal> {
        if v.is_nan() {
            None
        } else if v == f64::INFINITY {
            Some(Infinity)
        } else {
            Some(Finite(v))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Infinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Finite(v) => Some(v),
            Infinity => None,
        }
    }

    /// Lossy conversion to `f64`, with `+inf` for [`Infinity`].
    pub fn to_f64(self) -> f64 {
        match self {
            Finite(v) => v,
            Infinity => f64::INFINITY,
        }
    }

    /// `e^{-self}`, which is exactly 0 for an infinite value.
    pub fn exp_neg(self) -> f64 {
        match self {
            Finite(v) => (-v).exp(),
            Infinity => 0.0,
        }
    }

    /// `e^{-self/rho}` for `rho > 0`, or the `rho = ∞` limit when `rho` is `None`.
    ///
    /// In the limit every finite value maps to 1 and `∞` maps to 0.
    pub fn exp_neg_scaled(self, rho: Option<f64>) -> f64 {
        match (self, rho) {
            (Infinity, _) => 0.0,
            (Finite(_), None) => 1.0,
            (Finite(v), Some(r)) => (-v / r).exp(),
        }
    }

    /// Inverse of [`ExtReal::exp_neg`]: `-ln g`, with `g = 0` mapping to `∞`.
    pub fn neg_ln(g: f64) -> ExtReal {
        if g <= 0.0 {
            Infinity
        } else {
            Finite(-g.ln())
        }
    }

    pub fn scale(self, c: f64) -> ExtReal {
        match self {
            Finite(v) => Finite(v * c),
            Infinity => Infinity,
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn total_cmp(&self, other: &ExtReal) -> Ordering {
        match (self, other) {
            (Finite(a), Finite(b)) => a.total_cmp(b),
            (Finite(_), Infinity) => Ordering::Less,
            (Infinity, Finite(_)) => Ordering::Greater,
            (Infinity, Infinity) => Ordering::Equal,
        }
    }
}

impl Default for ExtReal {
    fn default() -> Self {
        ExtReal::ZERO
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v).expect("NaN is not an extended real")
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            _ => Some(self.total_cmp(other)),
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (Finite(a), Finite(b)) => Finite(a + b),
            _ => Infinity,
        }
    }
}

impl Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::ZERO, |acc, v| acc + v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finite(v) => write!(f, "{v}"),
            Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Finite(v) => s.serialize_f64(*v),
            Infinity => s.serialize_str("inf"),
        }
    }
}

struct ExtRealVisitor;

impl Visitor<'_> for ExtRealVisitor {
    type Value = ExtReal;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or the string \"inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
        ExtReal::from_f64(v).ok_or_else(|| E::custom("NaN"))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
        Ok(Finite(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
        Ok(Finite(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
        match v {
            "inf" | "Infinity" | "+inf" => Ok(Infinity),
            other => other
                .parse::<f64>()
                .ok()
                .and_then(ExtReal::from_f64)
                .ok_or_else(|| E::custom(format!("not an extended real: {other:?}"))),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<ExtReal, D::Error> {
        d.deserialize_any(ExtRealVisitor)
    }
}

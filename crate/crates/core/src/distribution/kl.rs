use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use super::joint::JointTable;
use super::mechanism::Mechanism;
use super::space::sorted_set;
use crate::error::{input, Error, Result};

/// A nonnegative real or `+inf`, in nats.
///
/// Divergences land here: `+inf` is an ordinary outcome (support mismatch),
/// not an error. Serialized as a JSON number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct ExtendedNonNegative(f64);

impl ExtendedNonNegative {
    pub const ZERO: Self = ExtendedNonNegative(0.0);
    pub const INFINITY: Self = ExtendedNonNegative(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return input(format!("{value} is not a nonnegative extended real"));
        }
        Ok(ExtendedNonNegative(value))
    }

    /// Clamps round-off negatives to zero.
    pub(crate) fn clamped(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        ExtendedNonNegative(value.max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn scale(self, factor: f64) -> Self {
        debug_assert!(factor >= 0.0);
        if self.is_infinite() {
            self
        } else {
            ExtendedNonNegative(self.0 * factor)
        }
    }
}

impl Add for ExtendedNonNegative {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        ExtendedNonNegative(self.0 + rhs.0)
    }
}

impl Sum for ExtendedNonNegative {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a ExtendedNonNegative> for ExtendedNonNegative {
    fn sum<I: Iterator<Item = &'a Self>>(iter: I) -> Self {
        iter.copied().sum()
    }
}

impl fmt::Display for ExtendedNonNegative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

impl Serialize for ExtendedNonNegative {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedNonNegative {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtendedNonNegative;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a nonnegative number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                ExtendedNonNegative::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                Ok(ExtendedNonNegative(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                ExtendedNonNegative::new(v as f64).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                match v {
                    "inf" | "+inf" | "infinity" => Ok(ExtendedNonNegative::INFINITY),
                    _ => Err(E::custom(format!("unexpected string {v:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// `KL(p || q)` in nats. Infinite iff `p` puts mass where `q` has none.
pub fn kl(p: &JointTable, q: &JointTable) -> Result<ExtendedNonNegative> {
    p.check_same_space(q)?;
    Ok(kl_slices(p.probabilities(), q.probabilities()))
}

pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> ExtendedNonNegative {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return ExtendedNonNegative::INFINITY;
            }
            total += a * (a / b).ln();
        }
    }
    ExtendedNonNegative::clamped(total)
}

/// `E_{outer(pa)} [ KL(left(child | pa) || right(child | pa)) ]`.
///
/// Parent rows of zero outer mass contribute nothing. A row that is
/// undefined under `left` but carries outer mass is a domain error; one that
/// is undefined under `right` makes the term infinite.
pub fn expected_conditional_kl(
    outer: &JointTable,
    left: &JointTable,
    right: &JointTable,
    child: usize,
    parent_set: &[usize],
) -> Result<ExtendedNonNegative> {
    outer.check_same_space(left)?;
    outer.check_same_space(right)?;
    let parents = sorted_set(parent_set);
    if parents.contains(&child) {
        return input(format!("child {child} appears in its own parent set"));
    }
    let left_c = left.conditional(child, &parents)?;
    let right_c = right.conditional(child, &parents)?;
    let weights = outer.marginal_vec(&parents);
    weighted_row_kl(&weights, &left_c, &right_c)
}

/// Same quantity with `outer == left` and the right-hand conditional given
/// directly as a mechanism (its own parent set is used).
pub fn expected_conditional_kl_to_mechanism(
    outer: &JointTable,
    right: &Mechanism,
) -> Result<ExtendedNonNegative> {
    let child = right.child();
    outer.space().check_var(child)?;
    for &p in right.parents() {
        outer.space().check_var(p)?;
    }
    if right.child_card() != outer.space().cardinality(child)
        || right
            .parents()
            .iter()
            .zip(right.parent_cards())
            .any(|(&p, &c)| outer.space().cardinality(p) != c)
    {
        return input(format!("mechanism of {child} does not match the table's space"));
    }
    let left_c = outer.conditional(child, right.parents())?;
    let weights = outer.marginal_vec(right.parents());
    weighted_row_kl(&weights, &left_c, right)
}

fn weighted_row_kl(weights: &[f64], left: &Mechanism, right: &Mechanism) -> Result<ExtendedNonNegative> {
    let mut total = 0.0;
    for (r, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        if !left.is_row_defined(r) {
            return Err(Error::Domain(format!(
                "conditional of {} undefined at parent row {:?} with positive weight",
                left.child(),
                left.row_assignment(r)
            )));
        }
        if !right.is_row_defined(r) {
            return Ok(ExtendedNonNegative::INFINITY);
        }
        let row = kl_slices(left.row(r), right.row(r));
        if row.is_infinite() {
            return Ok(row);
        }
        total += w * row.value();
    }
    Ok(ExtendedNonNegative::clamped(total))
}

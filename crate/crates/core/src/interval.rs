//! Exact midpoint-radius enclosures for truncated infinite series.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use crate::arith::{format_rational, Rational};

/// A real number known to lie in `[center - radius, center + radius]`.
/// `radius == 0` means the value is exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedValue {
    center: Rational,
    radius: Rational,
}

impl BoundedValue {
    pub fn new(center: Rational, radius: Rational) -> Self {
        assert!(!radius.is_negative(), "radius must be nonnegative");
        Self { center, radius }
    }

    pub fn exact(center: Rational) -> Self {
        Self {
            center,
            radius: Rational::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::exact(Rational::zero())
    }

    pub fn center(&self) -> &Rational {
        &self.center
    }

    pub fn radius(&self) -> &Rational {
        &self.radius
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    pub fn lower(&self) -> Rational {
        &self.center - &self.radius
    }

    pub fn upper(&self) -> Rational {
        &self.center + &self.radius
    }

    /// Upper bound on the absolute value of anything in the enclosure.
    pub fn abs_upper(&self) -> Rational {
        self.center.abs() + &self.radius
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lower() <= *x && *x <= self.upper()
    }

    pub fn intersects(&self, other: &BoundedValue) -> bool {
        (&self.center - &other.center).abs() <= &self.radius + &other.radius
    }

    pub fn widen(&self, extra: &Rational) -> Self {
        assert!(!extra.is_negative());
        Self::new(self.center.clone(), &self.radius + extra)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(&self.center * k, &self.radius * k.abs())
    }

    pub fn mul(&self, other: &BoundedValue) -> Self {
        let radius = self.center.abs() * &other.radius
            + other.center.abs() * &self.radius
            + &self.radius * &other.radius;
        Self::new(&self.center * &other.center, radius)
    }
}

impl Add for &BoundedValue {
    type Output = BoundedValue;
    fn add(self, rhs: &BoundedValue) -> BoundedValue {
        BoundedValue::new(&self.center + &rhs.center, &self.radius + &rhs.radius)
    }
}

impl Sub for &BoundedValue {
    type Output = BoundedValue;
    fn sub(self, rhs: &BoundedValue) -> BoundedValue {
        BoundedValue::new(&self.center - &rhs.center, &self.radius + &rhs.radius)
    }
}

impl Neg for &BoundedValue {
    type Output = BoundedValue;
    fn neg(self) -> BoundedValue {
        BoundedValue::new(-&self.center, self.radius.clone())
    }
}

impl std::iter::Sum for BoundedValue {
    fn sum<I: Iterator<Item = BoundedValue>>(iter: I) -> Self {
        iter.fold(BoundedValue::zero(), |acc, x| &acc + &x)
    }
}

impl fmt::Display for BoundedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ± {}",
            format_rational(&self.center),
            format_rational(&self.radius)
        )
    }
}

impl Serialize for BoundedValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BoundedValue", 2)?;
        st.serialize_field("center", &format_rational(&self.center))?;
        st.serialize_field("radius", &format_rational(&self.radius))?;
        st.end()
    }
}

use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::dd::DoubleDouble;
use super::rational::{format_rational, Rational};

/// Field operations shared by the exact and the high-precision number types,
/// so tableau algorithms can run in either.
pub trait Scalar: Clone + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    fn into_coefficient(self) -> Coefficient;
    fn from_coefficient(c: &Coefficient) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(v.into()))
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn into_coefficient(self) -> Coefficient {
        Coefficient::Exact(self)
    }
    fn from_coefficient(c: &Coefficient) -> Self {
        c.to_rational()
    }
}

impl Scalar for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble::ZERO
    }
    fn one() -> Self {
        DoubleDouble::ONE
    }
    fn from_rational(r: &Rational) -> Self {
        DoubleDouble::from_rational(r)
    }
    fn add(&self, other: &Self) -> Self {
        *self + *other
    }
    fn sub(&self, other: &Self) -> Self {
        *self - *other
    }
    fn mul(&self, other: &Self) -> Self {
        *self * *other
    }
    fn div(&self, other: &Self) -> Self {
        *self / *other
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn is_zero(&self) -> bool {
        DoubleDouble::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    fn into_coefficient(self) -> Coefficient {
        Coefficient::Approx(self)
    }
    fn from_coefficient(c: &Coefficient) -> Self {
        c.to_dd()
    }
}

/// A tableau entry: exact rational, or a double-double approximation of a
/// number that has no (convenient) rational form.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Exact(Rational),
    Approx(DoubleDouble),
}

impl Coefficient {
    pub fn is_exact(&self) -> bool {
        matches!(self, Coefficient::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Coefficient::Exact(r) => Some(r),
            Coefficient::Approx(_) => None,
        }
    }

    /// Exact rational value of the stored number (for `Approx`, the dyadic
    /// rational `hi + lo`).
    pub fn to_rational(&self) -> Rational {
        match self {
            Coefficient::Exact(r) => r.clone(),
            Coefficient::Approx(d) => d.to_rational().expect("finite coefficient"),
        }
    }

    pub fn to_dd(&self) -> DoubleDouble {
        match self {
            Coefficient::Exact(r) => DoubleDouble::from_rational(r),
            Coefficient::Approx(d) => *d,
        }
    }

    pub fn abs_f64(&self) -> f64 {
        Scalar::to_f64(self).abs()
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Coefficient::Exact(r) => r.is_negative(),
            Coefficient::Approx(d) => d.to_f64() < 0.0,
        }
    }

    fn binary(
        &self,
        other: &Self,
        exact: impl Fn(&Rational, &Rational) -> Rational,
        approx: impl Fn(DoubleDouble, DoubleDouble) -> DoubleDouble,
    ) -> Self {
        match (self, other) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => Coefficient::Exact(exact(a, b)),
            _ => Coefficient::Approx(approx(self.to_dd(), other.to_dd())),
        }
    }
}

impl From<Rational> for Coefficient {
    fn from(r: Rational) -> Self {
        Coefficient::Exact(r)
    }
}

impl From<DoubleDouble> for Coefficient {
    fn from(d: DoubleDouble) -> Self {
        Coefficient::Approx(d)
    }
}

impl Scalar for Coefficient {
    fn zero() -> Self {
        Coefficient::Exact(Zero::zero())
    }
    fn one() -> Self {
        Coefficient::Exact(One::one())
    }
    fn from_rational(r: &Rational) -> Self {
        Coefficient::Exact(r.clone())
    }
    fn add(&self, other: &Self) -> Self {
        self.binary(other, |a, b| a + b, |a, b| a + b)
    }
    fn sub(&self, other: &Self) -> Self {
        self.binary(other, |a, b| a - b, |a, b| a - b)
    }
    fn mul(&self, other: &Self) -> Self {
        self.binary(other, |a, b| a * b, |a, b| a * b)
    }
    fn div(&self, other: &Self) -> Self {
        self.binary(other, |a, b| a / b, |a, b| a / b)
    }
    fn neg(&self) -> Self {
        match self {
            Coefficient::Exact(r) => Coefficient::Exact(-r),
            Coefficient::Approx(d) => Coefficient::Approx(-*d),
        }
    }
    fn is_zero(&self) -> bool {
        match self {
            Coefficient::Exact(r) => Zero::is_zero(r),
            Coefficient::Approx(d) => d.is_zero(),
        }
    }
    fn to_f64(&self) -> f64 {
        match self {
            Coefficient::Exact(r) => Scalar::to_f64(r),
            Coefficient::Approx(d) => d.to_f64(),
        }
    }
    fn into_coefficient(self) -> Coefficient {
        self
    }
    fn from_coefficient(c: &Coefficient) -> Self {
        c.clone()
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Exact(r) => f.write_str(&format_rational(r)),
            Coefficient::Approx(d) => write!(f, "{d}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rational;

    #[test]
    fn mixed_arithmetic_degrades_to_approx() {
        let a = Coefficient::Exact(rational(1, 3));
        let b = Coefficient::Approx(DoubleDouble::from_f64(0.5));
        assert!(a.add(&a).is_exact());
        let mixed = a.add(&b);
        assert!(!mixed.is_exact());
        assert!((Scalar::to_f64(&mixed) - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn exact_ops_stay_reduced() {
        let a = Coefficient::Exact(rational(2, 4));
        let b = Coefficient::Exact(rational(1, 6));
        assert_eq!(a.mul(&b), Coefficient::Exact(rational(1, 12)));
        assert_eq!(a.div(&b).to_rational(), rational(3, 1));
    }
}

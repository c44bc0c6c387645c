//! Double-double floating point: an unevaluated sum `hi + lo` of two `f64`
//! values with `|lo| <= ulp(hi) / 2`, giving a 106-bit significand.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{ToPrimitive, Zero};

use super::rational::{format_scientific, Rational};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn from_parts(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    /// Nearest double-double to an exact rational.
    pub fn from_rational(r: &Rational) -> Self {
        let hi = r.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() || hi == 0.0 {
            return Self::from_f64(hi);
        }
        let rest = r - Rational::from_float(hi).expect("finite");
        let lo = rest.to_f64().unwrap_or(0.0);
        Self::from_parts(hi, lo)
    }

    /// The exact rational value `hi + lo`.
    pub fn to_rational(&self) -> Option<Rational> {
        Some(Rational::from_float(self.hi)? + Rational::from_float(self.lo)?)
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn to_f64(&self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(&self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -*self
        } else {
            *self
        }
    }

    pub fn square(&self) -> Self {
        *self * *self
    }

    /// Sine by direct Taylor summation; intended for `|x| <= 2`, where the
    /// alternating series has no harmful cancellation.
    pub fn sin(&self) -> Self {
        let x = *self;
        let x2 = x.square();
        let mut term = x;
        let mut sum = x;
        let mut k = 1.0;
        while term.abs().hi > 1e-36 * sum.abs().hi.max(1e-300) {
            term = -(term * x2) / Self::from_f64((k + 1.0) * (k + 2.0));
            sum = sum + term;
            k += 2.0;
            if k > 200.0 {
                break;
            }
        }
        sum
    }

    /// Decimal representation with `digits` significant digits.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        match self.to_rational() {
            Some(r) => format_scientific(&r, digits),
            None => format!("{}", self.to_f64()),
        }
    }
}

impl std::ops::Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::from_parts(s, e + f)
    }
}

impl std::ops::Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl std::ops::Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        Self::from_parts(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl std::ops::Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Self::from_f64(q1);
        }
        let r = self - b * Self::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Self::from_f64(q2);
        let q3 = r.hi / b.hi;
        Self::from_parts(q1, q2) + Self::from_f64(q3)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string(32))
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        DoubleDouble::is_zero(self)
    }
}

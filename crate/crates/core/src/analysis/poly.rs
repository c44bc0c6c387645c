//! Integer polynomials with exact sign evaluation and real-root isolation.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact::Rational;

/// Polynomial with integer coefficients, lowest degree first, no trailing
/// zeros (the zero polynomial is empty).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    c: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut c: Vec<BigInt>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Self { c }
    }

    /// Positive multiple of a rational polynomial, scaled by the lcm of the
    /// denominators.
    pub fn from_rationals(r: &[Rational]) -> Self {
        let lcm = r.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        Self::new(
            r.iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect(),
        )
        .primitive()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn leading_sign(&self) -> Sign {
        self.c.last().map_or(Sign::NoSign, BigInt::sign)
    }

    /// Divides by the content (gcd of coefficients), keeping the sign.
    pub fn primitive(self) -> Self {
        let g = self
            .c
            .iter()
            .fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if g.is_zero() || g.is_one() {
            return self;
        }
        Self::new(self.c.into_iter().map(|x| x / &g).collect())
    }

    /// Splits off the largest power of `x` dividing the polynomial:
    /// returns `(m, p / x^m)`.
    pub fn strip_low_zeros(&self) -> (usize, IntPoly) {
        let m = self.c.iter().take_while(|x| x.is_zero()).count();
        (m, IntPoly::new(self.c[m..].to_vec()))
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * BigInt::from(i))
                .collect(),
        )
    }

    /// Sign of `p(r)`, computed exactly.
    pub fn sign_at(&self, r: &Rational) -> Sign {
        // den^n p(num/den) = sum a_i num^i den^(n-i), by Horner.
        let (num, den) = (r.numer(), r.denom());
        let mut acc = BigInt::zero();
        let mut den_pow = BigInt::one();
        for a in self.c.iter().rev() {
            acc = acc * num + a * &den_pow;
            den_pow *= den;
        }
        acc.sign()
    }

    pub fn eval(&self, r: &Rational) -> Rational {
        self.c.iter().rev().fold(Rational::zero(), |acc, a| {
            acc * r + Rational::from_integer(a.clone())
        })
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.c
            .iter()
            .rev()
            .fold(0.0, |acc, a| acc * x + a.to_f64().unwrap_or(f64::NAN))
    }

    /// `p(x + a)` for an integer `a`.
    fn taylor_shift(&self, a: &BigInt) -> IntPoly {
        let mut c = self.c.clone();
        let n = c.len();
        if a.is_zero() || n < 2 {
            return IntPoly::new(c);
        }
        for i in 0..n - 1 {
            for j in (i..n - 1).rev() {
                let t = &c[j + 1] * a;
                c[j] += t;
            }
        }
        IntPoly::new(c)
    }

    /// Positive multiple of `p(lo + w x)`, made primitive.
    pub fn compose_affine(&self, lo: &Rational, w: &Rational) -> IntPoly {
        let d = lo.denom().lcm(w.denom());
        let a = lo.numer() * (&d / lo.denom());
        let wn = w.numer() * (&d / w.denom());
        // s(y) = d^n p(y/d)
        let mut d_pow = BigInt::one();
        let mut s = vec![BigInt::zero(); self.c.len()];
        for i in (0..self.c.len()).rev() {
            s[i] = &self.c[i] * &d_pow;
            if i > 0 {
                d_pow *= &d;
            }
        }
        let shifted = IntPoly::new(s).taylor_shift(&a);
        let mut w_pow = BigInt::one();
        let scaled = shifted
            .c
            .iter()
            .map(|x| {
                let v = x * &w_pow;
                w_pow *= &wn;
                v
            })
            .collect();
        IntPoly::new(scaled).primitive()
    }

    /// Sign variations of the coefficient sequence (zeros skipped).
    pub fn sign_variations(&self) -> usize {
        let mut last = Sign::NoSign;
        let mut count = 0;
        for s in self.c.iter().map(BigInt::sign) {
            if s == Sign::NoSign {
                continue;
            }
            if last != Sign::NoSign && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Descartes bound on the number of roots in `(0, 1)`: sign variations
    /// of `(x+1)^n p(1/(x+1))`.
    fn roots_in_unit_bound(&self) -> usize {
        let mut rev = self.c.clone();
        rev.reverse();
        IntPoly::new(rev)
            .taylor_shift(&BigInt::one())
            .sign_variations()
    }

    /// A power of two strictly greater than every positive root.
    pub fn positive_root_bound(&self) -> Rational {
        use num_traits::ToPrimitive;
        let n = self.degree();
        let lead = self.c[n].abs();
        // Cauchy: 1 + max |a_i / a_n|.
        let max_ratio = self.c[..n]
            .iter()
            .map(|a| Rational::new(a.abs(), lead.clone()))
            .max()
            .unwrap_or_else(Rational::zero);
        let bound = max_ratio + Rational::one();
        let mut b = Rational::one();
        while b <= bound {
            b *= Rational::from_integer(BigInt::from(2));
        }
        debug_assert!(b.to_f64().is_some());
        b
    }

    /// Polynomial remainder over the rationals, scaled to be integral
    /// (pseudo-remainder).
    fn pseudo_rem(&self, other: &IntPoly) -> IntPoly {
        let mut r = self.c.clone();
        let m = other.degree();
        let lead = other.c[m].clone();
        while r.len() > m && !r.is_empty() {
            let k = r.len() - 1;
            let top = r[k].clone();
            for x in r.iter_mut() {
                *x *= &lead;
            }
            for (j, b) in other.c.iter().enumerate() {
                let t = &top * b;
                r[k - m + j] -= t;
            }
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        IntPoly::new(r)
    }

    /// Exact division, for divisors known to divide `self` (by Gauss's
    /// lemma the quotient is integral when `other` is primitive).
    fn exact_div(&self, other: &IntPoly) -> IntPoly {
        let m = other.degree();
        let lead = &other.c[m];
        let mut r = self.c.clone();
        let n = self.degree();
        let mut q = vec![BigInt::zero(); n - m + 1];
        for k in (m..=n).rev() {
            let (t, rem) = r[k].div_rem(lead);
            debug_assert!(rem.is_zero(), "inexact polynomial division");
            for (j, b) in other.c.iter().enumerate() {
                r[k - m + j] -= &t * b;
            }
            q[k - m] = t;
        }
        IntPoly::new(q)
    }

    /// Greatest common divisor by primitive remainder sequences.
    fn gcd_exact(&self, other: &IntPoly) -> IntPoly {
        let (mut a, mut b) = if self.degree() >= other.degree() {
            (self.clone().primitive(), other.clone().primitive())
        } else {
            (other.clone().primitive(), self.clone().primitive())
        };
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive();
            a = b;
            b = r;
        }
        if a.leading_sign() == Sign::Minus {
            a = IntPoly::new(a.c.into_iter().map(|x| -x).collect());
        }
        a
    }

    /// Square-free part. A modular gcd with `p'` decides the common case
    /// cheaply; only when it is nontrivial is the exact gcd computed.
    pub fn square_free(&self) -> IntPoly {
        if self.degree() < 2 {
            return self.clone();
        }
        let d = self.derivative();
        if modular::coprime(self, &d) {
            return self.clone();
        }
        let g = self.gcd_exact(&d);
        if g.degree() == 0 {
            self.clone()
        } else {
            self.exact_div(&g).primitive()
        }
    }
}

mod modular {
    //! Arithmetic modulo the Mersenne prime 2^61 - 1.

    use num_bigint::BigInt;
    use num_traits::ToPrimitive;

    use super::IntPoly;

    const P: u64 = (1 << 61) - 1;

    fn reduce(x: &BigInt) -> u64 {
        let m = x.mod_floor_p();
        m.to_u64().expect("reduced value fits")
    }

    trait ModFloor {
        fn mod_floor_p(&self) -> BigInt;
    }

    impl ModFloor for BigInt {
        fn mod_floor_p(&self) -> BigInt {
            use num_integer::Integer;
            self.mod_floor(&BigInt::from(P))
        }
    }

    fn mul(a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % P as u128) as u64
    }

    fn sub(a: u64, b: u64) -> u64 {
        (a + P - b) % P
    }

    fn pow(mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    }

    fn inv(a: u64) -> u64 {
        pow(a, P - 2)
    }

    fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    /// True when `a` and `b` are certainly coprime over the rationals:
    /// their images mod p keep full degree and have a constant gcd.
    pub fn coprime(a: &IntPoly, b: &IntPoly) -> bool {
        let mut x: Vec<u64> = a.coeffs().iter().map(reduce).collect();
        let mut y: Vec<u64> = b.coeffs().iter().map(reduce).collect();
        trim(&mut x);
        trim(&mut y);
        if x.len() != a.coeffs().len() || y.len() != b.coeffs().len() {
            return false;
        }
        while !y.is_empty() {
            // x mod y
            let ly = y.len();
            let inv_lead = inv(y[ly - 1]);
            while x.len() >= ly {
                let k = x.len() - 1;
                let f = mul(x[k], inv_lead);
                for j in 0..ly {
                    let idx = k + 1 - ly + j;
                    x[idx] = sub(x[idx], mul(f, y[j]));
                }
                trim(&mut x);
                if x.is_empty() {
                    break;
                }
            }
            std::mem::swap(&mut x, &mut y);
        }
        x.len() == 1
    }
}

/// An interval `(lo, hi)` with rational, non-root endpoints containing
/// exactly one root of a square-free polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct RootBracket {
    pub lo: Rational,
    pub hi: Rational,
}

/// Fractions of an interval tried as split points, in order, until one is
/// not a root: 1/2, 3/8, 5/8, 7/16, 9/16, ...
fn split_fractions() -> impl Iterator<Item = Rational> {
    let rest = (3..60u32).flat_map(|k| {
        let den = 1i64 << k;
        let half = den / 2;
        [
            crate::exact::rational(half - 1, den),
            crate::exact::rational(half + 1, den),
        ]
    });
    std::iter::once(crate::exact::rational(1, 2)).chain(rest)
}

/// Isolates the positive roots of a square-free polynomial with no root at
/// 0, yielding brackets in increasing order. Roots are produced lazily:
/// the search descends into the left half of an interval first.
pub struct PositiveRoots<'a> {
    poly: &'a IntPoly,
    stack: Vec<(Rational, Rational)>,
}

impl<'a> PositiveRoots<'a> {
    pub fn new(poly: &'a IntPoly) -> Self {
        assert!(!poly.is_zero(), "zero polynomial has no isolated roots");
        assert!(
            poly.sign_at(&Rational::zero()) != Sign::NoSign,
            "0 must not be a root"
        );
        let stack = if poly.degree() == 0 {
            Vec::new()
        } else {
            vec![(Rational::zero(), poly.positive_root_bound())]
        };
        Self { poly, stack }
    }
}

impl Iterator for PositiveRoots<'_> {
    type Item = RootBracket;

    fn next(&mut self) -> Option<RootBracket> {
        while let Some((lo, hi)) = self.stack.pop() {
            let w = &hi - &lo;
            let local = self.poly.compose_affine(&lo, &w);
            match local.roots_in_unit_bound() {
                0 => continue,
                1 => return Some(RootBracket { lo, hi }),
                _ => {
                    let mid = split_fractions()
                        .map(|f| &lo + &w * f)
                        .find(|m| self.poly.sign_at(m) != Sign::NoSign)
                        .expect("a non-root split point exists");
                    // Right half first so the left half is popped next.
                    self.stack.push((mid.clone(), hi));
                    self.stack.push((lo, mid));
                }
            }
        }
        None
    }
}

/// Bisects a bracket of a sign change of `p` (from `<= 0` on the left to
/// `> 0` on the right) until it is narrower than `width`. `p(lo) <= 0` and
/// `p(hi) > 0` are preserved.
pub fn refine_exit(p: &IntPoly, mut lo: Rational, mut hi: Rational, width: &Rational) -> (Rational, Rational) {
    let two = Rational::from_integer(BigInt::from(2));
    while &(&hi - &lo) > width {
        let mid = (&lo + &hi) / &two;
        if p.sign_at(&mid) == Sign::Plus {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Where a polynomial first becomes positive on `x > 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Exit {
    /// Positive immediately to the right of 0. `witness` is a point with
    /// `p > 0`.
    Immediate { witness: Rational },
    /// `p <= 0` on `[0, lo]`, `p(hi) > 0`, and the first positive point lies
    /// in `(lo, hi]`.
    At { lo: Rational, hi: Rational },
    /// `p <= 0` for all `x >= 0`.
    Never,
}

/// Locates `inf { x > 0 : p(x) > 0 }`, assuming `p(0) <= 0`, and refines it
/// to `width`.
pub fn first_positive(p: &IntPoly, width: &Rational) -> Exit {
    if p.is_zero() {
        return Exit::Never;
    }
    let (_, h) = p.strip_low_zeros();
    let sf = h.square_free();
    let at_zero = h.sign_at(&Rational::zero());
    if at_zero == Sign::Plus {
        // p = x^m h with h(0) > 0, so p > 0 on some (0, eps).
        let two = Rational::from_integer(BigInt::from(2));
        let mut w = Rational::one();
        while p.sign_at(&w) != Sign::Plus {
            w /= &two;
        }
        return Exit::Immediate { witness: w };
    }
    let roots = PositiveRoots::new(&sf);
    for b in roots {
        // `b.hi` is not a root and lies before the next root, so it carries
        // the sign of the gap after this root.
        if h.sign_at(&b.hi) == Sign::Plus {
            let (lo, hi) = refine_exit(&h, b.lo, b.hi, width);
            return Exit::At { lo, hi };
        }
    }
    Exit::Never
}

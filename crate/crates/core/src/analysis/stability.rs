//! Stability polynomial and certified real/imaginary axis intervals.

use num_bigint::{BigInt, Sign};

use super::poly::{first_positive, Exit, IntPoly};
use crate::exact::{rational, Coefficient, Rational, Scalar, Tableau};

/// `R(z) = sum_k r_k z^k`, the amplification factor on `y' = lambda y`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityPolynomial {
    coeffs: Vec<Coefficient>,
}

/// `r_0 = 1`, `r_k = b . A^(k-1) . 1`, with trailing zeros removed.
pub fn stability_polynomial(t: &Tableau) -> StabilityPolynomial {
    let s = t.stages();
    let mut coeffs = vec![Coefficient::one()];
    let mut v = vec![Coefficient::one(); s];
    for _ in 0..s {
        let r = t
            .b()
            .iter()
            .zip(&v)
            .filter(|(b, _)| !b.is_zero())
            .fold(Coefficient::zero(), |acc, (b, x)| acc.add(&b.mul(x)));
        coeffs.push(r);
        v = (0..s)
            .map(|i| {
                t.a_row(i)
                    .iter()
                    .zip(&v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(Coefficient::zero(), |acc, (a, x)| acc.add(&a.mul(x)))
            })
            .collect();
        if v.iter().all(Coefficient::is_zero) {
            break;
        }
    }
    StabilityPolynomial::new(coeffs)
}

impl StabilityPolynomial {
    pub fn new(mut coeffs: Vec<Coefficient>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Coefficient::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Degree-`p` Taylor polynomial of `exp`.
    pub fn taylor(p: usize) -> Self {
        let mut coeffs = Vec::with_capacity(p + 1);
        let mut f = Rational::one();
        for k in 0..=p {
            if k > 0 {
                f /= Rational::from_integer(BigInt::from(k));
            }
            coeffs.push(Coefficient::Exact(f.clone()));
        }
        Self::new(coeffs)
    }

    pub fn coefficients(&self) -> &[Coefficient] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(Coefficient::is_exact)
    }

    pub fn to_rationals(&self) -> Vec<Rational> {
        self.coeffs.iter().map(Coefficient::to_rational).collect()
    }

    /// Replaces `r_0..r_p` by `1/k!`. For an inexact tableau verified to
    /// order `p` these coefficients equal `1/k!` up to rounding, and the
    /// rounding noise would otherwise decide the sign of `|R|^2 - 1` near 0.
    pub fn with_taylor_prefix(&self, p: usize) -> Self {
        let taylor = Self::taylor(p);
        let mut coeffs = self.coeffs.clone();
        for (k, c) in taylor.coeffs.into_iter().enumerate() {
            if k < coeffs.len() {
                coeffs[k] = c;
            } else {
                coeffs.push(c);
            }
        }
        Self::new(coeffs)
    }

    pub fn eval_f64(&self, z: (f64, f64)) -> (f64, f64) {
        self.coeffs.iter().rev().fold((0.0, 0.0), |(re, im), c| {
            let c = c.to_f64();
            (re * z.0 - im * z.1 + c, re * z.1 + im * z.0)
        })
    }

    /// `R(-x) - 1`, `-R(-x) - 1` as integer polynomials.
    fn real_axis_parts(&self) -> (IntPoly, IntPoly) {
        let r = self.to_rationals();
        let alt: Vec<Rational> = r
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { c.clone() } else { -c.clone() })
            .collect();
        let mut above = alt.clone();
        above[0] -= Rational::one();
        let mut below: Vec<Rational> = alt.into_iter().map(|c| -c).collect();
        below[0] -= Rational::one();
        (IntPoly::from_rationals(&above), IntPoly::from_rationals(&below))
    }

    /// `|R(iy)|^2 - 1` as a polynomial in `u = y^2`.
    fn imag_axis_excess(&self) -> IntPoly {
        let r = self.to_rationals();
        let sign = |j: usize| if j % 2 == 0 { Rational::one() } else { -Rational::one() };
        let even: Vec<Rational> = r.iter().step_by(2).enumerate().map(|(j, c)| c * sign(j)).collect();
        let odd: Vec<Rational> = r
            .iter()
            .skip(1)
            .step_by(2)
            .enumerate()
            .map(|(j, c)| c * sign(j))
            .collect();
        let mut e = square(&even);
        let o2 = square(&odd);
        if e.len() < o2.len() + 1 {
            e.resize(o2.len() + 1, Rational::zero());
        }
        for (j, c) in o2.into_iter().enumerate() {
            e[j + 1] += c;
        }
        e[0] -= Rational::one();
        IntPoly::from_rationals(&e)
    }
}

fn square(p: &[Rational]) -> Vec<Rational> {
    if p.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); 2 * p.len() - 1];
    for (i, a) in p.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in p.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// An axis interval `[0, I]` of the stability region, with a certificate:
/// the defining inequality holds at `inner` and fails at `outer`, both
/// checked in exact arithmetic. `outer` is `None` when the whole half-axis
/// is stable.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisInterval {
    pub value: f64,
    pub inner: Rational,
    pub outer: Option<Rational>,
}

impl AxisInterval {
    pub fn width(&self) -> f64 {
        self.outer
            .as_ref()
            .map_or(f64::INFINITY, |o| Scalar::to_f64(&(o - &self.inner)))
    }

    fn unbounded() -> Self {
        Self {
            value: f64::INFINITY,
            inner: Rational::zero(),
            outer: None,
        }
    }

    fn from_bracket(inner: Rational, outer: Rational) -> Self {
        let value = if inner.is_zero() {
            0.0
        } else {
            Scalar::to_f64(&((&inner + &outer) / rational(2, 1)))
        };
        Self {
            value,
            inner,
            outer: Some(outer),
        }
    }
}

/// Bracket width for both axes; far below what two printed decimals need.
fn bracket_width() -> Rational {
    Rational::new(BigInt::from(1), BigInt::from(1) << 34)
}

/// Largest `x` with `|R(-t)| <= 1` for all `t` in `[0, x]`.
pub fn real_interval(r: &StabilityPolynomial) -> AxisInterval {
    let (above, below) = r.real_axis_parts();
    let w = bracket_width();
    let exits = [first_positive(&above, &w), first_positive(&below, &w)];
    if let Some(witness) = exits.iter().find_map(|e| match e {
        Exit::Immediate { witness } => Some(witness.clone()),
        _ => None,
    }) {
        return AxisInterval::from_bracket(Rational::zero(), witness);
    }
    let brackets: Vec<(Rational, Rational)> = exits
        .into_iter()
        .filter_map(|e| match e {
            Exit::At { lo, hi } => Some((lo, hi)),
            _ => None,
        })
        .collect();
    let Some(inner) = brackets.iter().map(|b| b.0.clone()).min() else {
        return AxisInterval::unbounded();
    };
    let outer = brackets.into_iter().map(|b| b.1).min().expect("nonempty");
    AxisInterval::from_bracket(inner, outer)
}

/// `floor(sqrt(x) * 2^bits) / 2^bits`, so the result squared is at most `x`.
fn sqrt_below(x: &Rational, bits: u32) -> Rational {
    let scale = BigInt::from(1) << (2 * bits);
    let n = (x.numer() * scale) / x.denom();
    Rational::new(n.sqrt(), BigInt::from(1) << bits)
}

/// Largest `y` with `|R(it)| <= 1` for all `t` in `[0, y]`.
pub fn imag_interval(r: &StabilityPolynomial) -> AxisInterval {
    let e = r.imag_axis_excess();
    let positive_at = |y: &Rational| e.sign_at(&(y * y)) == Sign::Plus;
    match first_positive(&e, &bracket_width()) {
        Exit::Never => AxisInterval::unbounded(),
        Exit::Immediate { .. } => {
            let mut y = Rational::one();
            while !positive_at(&y) {
                y /= rational(2, 1);
            }
            AxisInterval::from_bracket(Rational::zero(), y)
        }
        Exit::At { lo, hi } => {
            let inner = sqrt_below(&lo, 64);
            let mut bits = 64;
            let outer = loop {
                let y = sqrt_below(&hi, bits);
                if positive_at(&y) {
                    break y;
                }
                bits += 16;
                assert!(bits <= 4096, "no certified outer point");
            };
            AxisInterval::from_bracket(inner, outer)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    /// The polynomial the intervals were computed from.
    pub polynomial: StabilityPolynomial,
    pub real: AxisInterval,
    pub imag: AxisInterval,
}

/// Both axis intervals of `t`. Inexact tableaus get their Taylor prefix
/// restored first (see [`StabilityPolynomial::with_taylor_prefix`]).
pub fn stability_report(t: &Tableau) -> StabilityReport {
    let mut polynomial = stability_polynomial(t);
    if !polynomial.is_exact() {
        polynomial = polynomial.with_taylor_prefix(t.order() as usize);
    }
    StabilityReport {
        real: real_interval(&polynomial),
        imag: imag_interval(&polynomial),
        polynomial,
    }
}

/// Exact check of an interval's certificate on the real axis.
pub fn certify_real(r: &StabilityPolynomial, iv: &AxisInterval) -> bool {
    let q = r.to_rationals();
    let g = |x: &Rational| {
        let v = q
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * (-x.clone()) + c);
        &v * &v - Rational::one()
    };
    let inner_ok = g(&iv.inner) <= Rational::zero();
    let outer_ok = iv.outer.as_ref().is_none_or(|o| g(o) > Rational::zero());
    inner_ok && outer_ok
}

/// Exact check of an interval's certificate on the imaginary axis.
pub fn certify_imag(r: &StabilityPolynomial, iv: &AxisInterval) -> bool {
    let q = r.to_rationals();
    let excess = |y: &Rational| {
        // R(iy) = re + i im, accumulated by Horner in Gaussian rationals.
        let (mut re, mut im) = (Rational::zero(), Rational::zero());
        for c in q.iter().rev() {
            let nre = -(&im * y) + c;
            let nim = &re * y;
            re = nre;
            im = nim;
        }
        &re * &re + &im * &im - Rational::one()
    };
    let inner_ok = excess(&iv.inner) <= Rational::zero();
    let outer_ok = iv.outer.as_ref().is_none_or(|o| excess(o) > Rational::zero());
    inner_ok && outer_ok
}

/// Floating-point diagnostic: `max |R(iy)| - 1` over `samples` points of
/// `[0, y_max]`. Exact analysis ignores excursions this small; this
/// reports them.
pub fn modulus_excess(r: &StabilityPolynomial, y_max: f64, samples: usize) -> f64 {
    let n = samples.max(2);
    (0..n)
        .map(|k| {
            let y = y_max * k as f64 / (n - 1) as f64;
            let (re, im) = r.eval_f64((0.0, y));
            re.hypot(im) - 1.0
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

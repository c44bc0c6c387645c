//! Arbitrary-precision rationals and their text forms.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Exact rational number. Always stored in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// A coefficient literal as it appears in text: either an exact `num/den`
/// rational or a decimal literal that denotes an approximation.
#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Exact(Rational),
    Decimal(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LiteralError {
    #[error("empty literal")]
    Empty,
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("malformed number `{0}`")]
    Malformed(String),
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn integer(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn parse_int(text: &str, whole: &str) -> Result<BigInt, LiteralError> {
    let digits = text.strip_prefix(['+', '-']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(LiteralError::Malformed(whole.to_string()));
    }
    text.parse::<BigInt>()
        .map_err(|_| LiteralError::Malformed(whole.to_string()))
}

/// Parses `num/den`, a plain integer, or a decimal literal such as
/// `-1.25e-3`. Decimal literals are converted exactly to a rational but are
/// tagged as approximate.
pub fn parse_literal(text: &str) -> Result<Literal, LiteralError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(LiteralError::Empty);
    }
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_int(num, text)?;
        let den = parse_int(den, text)?;
        if den.is_zero() {
            return Err(LiteralError::ZeroDenominator(text.to_string()));
        }
        return Ok(Literal::Exact(Rational::new(num, den)));
    }
    if !text.contains(['.', 'e', 'E']) {
        return Ok(Literal::Exact(Rational::from_integer(parse_int(text, text)?)));
    }
    parse_decimal(text).map(Literal::Decimal)
}

fn parse_decimal(text: &str) -> Result<Rational, LiteralError> {
    let bad = || LiteralError::Malformed(text.to_string());
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let power = Rational::from_integer(num_traits::pow(ten, scale.unsigned_abs() as usize));
    if scale >= 0 {
        value *= power;
    } else {
        value /= power;
    }
    Ok(if negative { -value } else { value })
}

/// `num/den`, or just `num` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Scientific notation with `digits` significant digits, rounded half away
/// from zero.
pub fn format_scientific(r: &Rational, digits: usize) -> String {
    assert!(digits >= 1);
    if r.is_zero() {
        return format!("{:.*}e0", digits - 1, 0.0);
    }
    let negative = r.is_negative();
    let magnitude = r.abs();
    let ten = BigInt::from(10);
    // Initial guess from digit counts, then correct.
    let mut exp = magnitude.numer().to_string().len() as i64
        - magnitude.denom().to_string().len() as i64;
    let scaled_for = |e: i64| -> BigInt {
        let shift = digits as i64 - 1 - e;
        let p = num_traits::pow(ten.clone(), shift.unsigned_abs() as usize);
        let (n, d) = if shift >= 0 {
            (magnitude.numer() * &p, magnitude.denom().clone())
        } else {
            (magnitude.numer().clone(), magnitude.denom() * &p)
        };
        let (q, rem) = n.div_rem(&d);
        if rem * 2 >= d {
            q + 1
        } else {
            q
        }
    };
    let lower = num_traits::pow(ten.clone(), digits - 1);
    let upper = num_traits::pow(ten.clone(), digits);
    let mut scaled = scaled_for(exp);
    for _ in 0..4 {
        if scaled >= upper {
            exp += 1;
        } else if scaled < lower {
            exp -= 1;
        } else {
            break;
        }
        scaled = scaled_for(exp);
    }
    let s = scaled.to_string();
    let (lead, rest) = s.split_at(1);
    let sign = if negative { "-" } else { "" };
    if rest.is_empty() {
        format!("{sign}{lead}e{exp}")
    } else {
        format!("{sign}{lead}.{rest}e{exp}")
    }
}

pub fn sign(r: &Rational) -> Sign {
    r.numer().sign()
}

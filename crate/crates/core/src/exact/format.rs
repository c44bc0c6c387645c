//! Text form of a tableau.
//!
//! ```text
//! RKPAIR midpoint s=2 p=2 phat=1
//! c: 0 1/2
//! A[2]: 1/2
//! b: 0 1
//! bhat: 1 0
//! ```
//!
//! Row `A[i]` (1-based) lists the `i-1` entries left of the diagonal; a
//! trailing diagonal entry is accepted if it is zero. Entries are `num/den`,
//! integers, or decimal literals; decimals mark the coefficient as inexact.
//! `#` starts a comment.

use std::collections::BTreeMap;

use super::dd::DoubleDouble;
use super::rational::{format_rational, format_scientific, parse_literal, Literal, LiteralError};
use super::scalar::{Coefficient, Scalar};
use super::tableau::{Tableau, TableauError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, field `{field}`: {source}")]
    Entry {
        line: usize,
        field: String,
        source: LiteralError,
    },
    #[error("line {line}, field `{field}`: {source}")]
    Tableau {
        line: usize,
        field: String,
        source: TableauError,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

struct Header {
    line: usize,
    label: String,
    s: usize,
    p: u32,
    p_hat: u32,
}

fn parse_header(line: usize, text: &str) -> Result<Header, FormatError> {
    let mut words = text.split_whitespace();
    if words.next() != Some("RKPAIR") {
        return Err(syntax(line, "expected `RKPAIR <label> s=<int> p=<int> phat=<int>`"));
    }
    let label = words
        .next()
        .ok_or_else(|| syntax(line, "missing label"))?
        .to_string();
    let mut fields = BTreeMap::new();
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected key=value, found `{w}`")))?;
        let v: u32 = v
            .parse()
            .map_err(|_| syntax(line, format!("`{k}` must be a nonnegative integer")))?;
        if fields.insert(k.to_string(), v).is_some() {
            return Err(syntax(line, format!("duplicate `{k}`")));
        }
    }
    let mut take = |k: &str| {
        fields
            .remove(k)
            .ok_or_else(|| syntax(line, format!("missing `{k}=`")))
    };
    let s = take("s")? as usize;
    let p = take("p")?;
    let p_hat = take("phat")?;
    if let Some(k) = fields.keys().next() {
        return Err(syntax(line, format!("unknown header field `{k}`")));
    }
    if s == 0 {
        return Err(syntax(line, "s must be positive"));
    }
    Ok(Header {
        line,
        label,
        s,
        p,
        p_hat,
    })
}

fn parse_entries(line: usize, field: &str, text: &str) -> Result<Vec<Coefficient>, FormatError> {
    text.split_whitespace()
        .map(|tok| match parse_literal(tok) {
            Ok(Literal::Exact(r)) => Ok(Coefficient::Exact(r)),
            Ok(Literal::Decimal(r)) => Ok(Coefficient::Approx(DoubleDouble::from_rational(&r))),
            Err(source) => Err(FormatError::Entry {
                line,
                field: field.to_string(),
                source,
            }),
        })
        .collect()
}

type Rows = BTreeMap<String, (usize, Vec<Coefficient>)>;

/// Parses one tableau.
pub fn parse_tableau(text: &str) -> Result<Tableau, FormatError> {
    let mut header: Option<Header> = None;
    let mut rows = Rows::new();
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some(h) = &header else {
            header = Some(parse_header(line, content)?);
            continue;
        };
        let (key, rest) = content
            .split_once(':')
            .ok_or_else(|| syntax(line, "expected `<field>: <entries>`"))?;
        let key = key.trim().to_string();
        let valid = match key.as_str() {
            "c" | "b" | "bhat" => true,
            _ => parse_row_index(&key).is_some_and(|i| (2..=h.s).contains(&i)),
        };
        if !valid {
            return Err(syntax(line, format!("unexpected field `{key}`")));
        }
        let entries = parse_entries(line, &key, rest)?;
        if rows.insert(key.clone(), (line, entries)).is_some() {
            return Err(syntax(line, format!("duplicate field `{key}`")));
        }
    }
    let h = header.ok_or_else(|| syntax(last_line.max(1), "missing RKPAIR header"))?;
    let take = |rows: &mut Rows, key: &str, expected: usize| {
        let (line, v) = rows
            .remove(key)
            .ok_or_else(|| syntax(last_line, format!("missing field `{key}`")))?;
        if v.len() != expected {
            return Err(syntax(
                line,
                format!("`{key}` has {} entries, expected {expected}", v.len()),
            ));
        }
        Ok((line, v))
    };
    let (c_line, c) = take(&mut rows, "c", h.s)?;
    let mut a = vec![Vec::new()];
    for i in 2..=h.s {
        let key = format!("A[{i}]");
        let with_diagonal = rows.get(&key).is_some_and(|(_, v)| v.len() == i);
        let (line, mut row) = take(&mut rows, &key, if with_diagonal { i } else { i - 1 })?;
        if row.len() == i {
            if !row[i - 1].is_zero() {
                return Err(FormatError::Tableau {
                    line,
                    field: key,
                    source: TableauError::NotExplicit { row: i, col: i },
                });
            }
            row.pop();
        }
        a.push(row);
    }
    let (_, b) = take(&mut rows, "b", h.s)?;
    let (_, b_hat) = take(&mut rows, "bhat", h.s)?;
    Tableau::with_abscissae(h.label, c, a, b, b_hat, h.p, h.p_hat).map_err(|source| {
        let (line, field) = match &source {
            TableauError::RowSum { .. } => (c_line, "c".to_string()),
            _ => (h.line, "RKPAIR".to_string()),
        };
        FormatError::Tableau {
            line,
            field,
            source,
        }
    })
}

fn parse_row_index(key: &str) -> Option<usize> {
    key.strip_prefix("A[")?.strip_suffix(']')?.parse().ok()
}

/// Shortest decimal (at least 34 significant digits) that parses back to the
/// same double-double.
fn format_approx(d: &DoubleDouble) -> String {
    if d.is_zero() {
        return "0.0".to_string();
    }
    let exact = d.to_rational().expect("finite coefficient");
    for digits in 34..=160 {
        let text = format_scientific(&exact, digits);
        if let Ok(Literal::Decimal(r)) = parse_literal(&text) {
            if DoubleDouble::from_rational(&r) == *d {
                return text;
            }
        }
    }
    format_scientific(&exact, 800)
}

fn format_coefficient(c: &Coefficient) -> String {
    match c {
        Coefficient::Exact(r) => format_rational(r),
        Coefficient::Approx(d) => format_approx(d),
    }
}

fn join(v: &[Coefficient]) -> String {
    v.iter().map(format_coefficient).collect::<Vec<_>>().join(" ")
}

/// Text form; whitespace in the label is replaced by `_`.
pub fn serialize_tableau(t: &Tableau) -> String {
    let label: String = t
        .label()
        .chars()
        .map(|ch| if ch.is_whitespace() { '_' } else { ch })
        .collect();
    let mut out = format!(
        "RKPAIR {} s={} p={} phat={}\n",
        if label.is_empty() { "unnamed" } else { &label },
        t.stages(),
        t.order(),
        t.embedded_order()
    );
    out.push_str(&format!("c: {}\n", join(t.c())));
    for i in 1..t.stages() {
        out.push_str(&format!("A[{}]: {}\n", i + 1, join(t.a_row(i))));
    }
    out.push_str(&format!("b: {}\n", join(t.b())));
    out.push_str(&format!("bhat: {}\n", join(t.b_hat())));
    out
}

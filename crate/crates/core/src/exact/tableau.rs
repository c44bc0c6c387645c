use super::scalar::{Coefficient, Scalar};

/// Relative tolerance used when checking row sums of inexact tableaus.
const ROW_SUM_TOLERANCE: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TableauError {
    #[error("a tableau needs at least one stage")]
    Empty,
    #[error("row {row} of A has {found} entries below the diagonal, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("A[{row}][{col}] is nonzero on or above the diagonal")]
    NotExplicit { row: usize, col: usize },
    #[error("{name} has {found} entries, expected {expected}")]
    WeightLength {
        name: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("declared orders p={p}, phat={p_hat} must satisfy p > phat >= 1")]
    Orders { p: u32, p_hat: u32 },
    #[error("c[{row}] differs from the row sum of A")]
    RowSum { row: usize },
}

/// Which weight vector of a pair an operation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Weights {
    Principal,
    Embedded,
}

/// Butcher coefficients of an explicit embedded pair.
///
/// `A` is stored by rows, keeping only the strictly-lower part: row `i`
/// (0-based) has exactly `i` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Tableau {
    label: String,
    a: Vec<Vec<Coefficient>>,
    b: Vec<Coefficient>,
    b_hat: Vec<Coefficient>,
    c: Vec<Coefficient>,
    order: u32,
    embedded_order: u32,
}

/// The same coefficients converted to one concrete scalar type.
#[derive(Clone, Debug)]
pub struct ScalarTableau<T> {
    pub a: Vec<Vec<T>>,
    pub b: Vec<T>,
    pub b_hat: Vec<T>,
    pub c: Vec<T>,
}

impl<T: Scalar> ScalarTableau<T> {
    pub fn weights(&self, which: Weights) -> &[T] {
        match which {
            Weights::Principal => &self.b,
            Weights::Embedded => &self.b_hat,
        }
    }

    /// `A v` for a vector indexed by stage.
    pub fn apply_a(&self, v: &[T]) -> Vec<T> {
        self.a
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(T::zero(), |acc, (a, x)| acc.add(&a.mul(x)))
            })
            .collect()
    }
}

fn row_sums(a: &[Vec<Coefficient>]) -> Vec<Coefficient> {
    a.iter()
        .map(|row| row.iter().fold(Coefficient::zero(), |acc, x| acc.add(x)))
        .collect()
}

impl Tableau {
    /// Builds a tableau from the strictly-lower rows of `A`; `c` is taken as
    /// the row sums.
    pub fn new(
        label: impl Into<String>,
        a: Vec<Vec<Coefficient>>,
        b: Vec<Coefficient>,
        b_hat: Vec<Coefficient>,
        order: u32,
        embedded_order: u32,
    ) -> Result<Self, TableauError> {
        let s = a.len();
        if s == 0 {
            return Err(TableauError::Empty);
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != i {
                return Err(TableauError::RowLength {
                    row: i + 1,
                    expected: i,
                    found: row.len(),
                });
            }
        }
        for (name, w) in [("b", &b), ("bhat", &b_hat)] {
            if w.len() != s {
                return Err(TableauError::WeightLength {
                    name,
                    expected: s,
                    found: w.len(),
                });
            }
        }
        // A method used as its own estimator (b == bhat) may declare phat == p.
        let orders_ok = order >= 1
            && embedded_order >= 1
            && (embedded_order < order || (embedded_order == order && b == b_hat));
        if !orders_ok {
            return Err(TableauError::Orders {
                p: order,
                p_hat: embedded_order,
            });
        }
        let c = row_sums(&a);
        Ok(Self {
            label: label.into(),
            a,
            b,
            b_hat,
            c,
            order,
            embedded_order,
        })
    }

    /// Builds from a full `s x s` matrix, rejecting nonzeros on or above the
    /// diagonal.
    pub fn from_square(
        label: impl Into<String>,
        a: Vec<Vec<Coefficient>>,
        b: Vec<Coefficient>,
        b_hat: Vec<Coefficient>,
        order: u32,
        embedded_order: u32,
    ) -> Result<Self, TableauError> {
        let s = a.len();
        let mut rows = Vec::with_capacity(s);
        for (i, mut row) in a.into_iter().enumerate() {
            if row.len() != s {
                return Err(TableauError::RowLength {
                    row: i + 1,
                    expected: s,
                    found: row.len(),
                });
            }
            if let Some(j) = (i..s).find(|&j| !row[j].is_zero()) {
                return Err(TableauError::NotExplicit { row: i + 1, col: j + 1 });
            }
            row.truncate(i);
            rows.push(row);
        }
        Self::new(label, rows, b, b_hat, order, embedded_order)
    }

    /// Like [`Tableau::new`] but also checks a user-supplied `c` against the
    /// row sums (exactly for exact entries, to a relative 1e-13 otherwise).
    pub fn with_abscissae(
        label: impl Into<String>,
        c: Vec<Coefficient>,
        a: Vec<Vec<Coefficient>>,
        b: Vec<Coefficient>,
        b_hat: Vec<Coefficient>,
        order: u32,
        embedded_order: u32,
    ) -> Result<Self, TableauError> {
        let mut t = Self::new(label, a, b, b_hat, order, embedded_order)?;
        if c.len() != t.stages() {
            return Err(TableauError::WeightLength {
                name: "c",
                expected: t.stages(),
                found: c.len(),
            });
        }
        for (i, (given, sum)) in c.iter().zip(&t.c).enumerate() {
            let ok = if given.is_exact() && sum.is_exact() {
                given == sum
            } else {
                let scale = t.a[i].iter().map(Coefficient::abs_f64).sum::<f64>().max(1.0);
                given.sub(sum).abs_f64() <= ROW_SUM_TOLERANCE * scale
            };
            if !ok {
                return Err(TableauError::RowSum { row: i + 1 });
            }
        }
        t.c = c;
        Ok(t)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn embedded_order(&self) -> u32 {
        self.embedded_order
    }

    /// Strictly-lower entries of row `i` (0-based), `A[i][0..i]`.
    pub fn a_row(&self, i: usize) -> &[Coefficient] {
        &self.a[i]
    }

    pub fn a(&self, i: usize, j: usize) -> Coefficient {
        if j < i {
            self.a[i][j].clone()
        } else {
            Coefficient::zero()
        }
    }

    pub fn b(&self) -> &[Coefficient] {
        &self.b
    }

    pub fn b_hat(&self) -> &[Coefficient] {
        &self.b_hat
    }

    pub fn c(&self) -> &[Coefficient] {
        &self.c
    }

    pub fn weights(&self, which: Weights) -> &[Coefficient] {
        match which {
            Weights::Principal => &self.b,
            Weights::Embedded => &self.b_hat,
        }
    }

    pub fn declared_order(&self, which: Weights) -> u32 {
        match which {
            Weights::Principal => self.order,
            Weights::Embedded => self.embedded_order,
        }
    }

    /// True iff every coefficient is an exact rational.
    pub fn is_exact(&self) -> bool {
        self.a.iter().flatten().all(Coefficient::is_exact)
            && self.b.iter().all(Coefficient::is_exact)
            && self.b_hat.iter().all(Coefficient::is_exact)
            && self.c.iter().all(Coefficient::is_exact)
    }

    pub fn to_scalars<T: Scalar>(&self) -> ScalarTableau<T> {
        let conv = |v: &[Coefficient]| v.iter().map(T::from_coefficient).collect::<Vec<_>>();
        ScalarTableau {
            a: self.a.iter().map(|row| conv(row)).collect(),
            b: conv(&self.b),
            b_hat: conv(&self.b_hat),
            c: conv(&self.c),
        }
    }

    /// Replaces the weight vectors, keeping `A`. Used to analyse a single
    /// weight vector as a method in its own right.
    pub fn with_weights(&self, b: Vec<Coefficient>, b_hat: Vec<Coefficient>) -> Self {
        assert_eq!(b.len(), self.stages());
        assert_eq!(b_hat.len(), self.stages());
        Self {
            b,
            b_hat,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rational;

    fn q(n: i64, d: i64) -> Coefficient {
        Coefficient::Exact(rational(n, d))
    }

    #[test]
    fn row_sums_define_c() {
        let t = Tableau::new(
            "midpoint",
            vec![vec![], vec![q(1, 2)]],
            vec![q(0, 1), q(1, 1)],
            vec![q(1, 1), q(0, 1)],
            2,
            1,
        )
        .unwrap();
        assert_eq!(t.c(), &[q(0, 1), q(1, 2)]);
        assert!(t.is_exact());
    }

    #[test]
    fn rejects_implicit_entries() {
        let err = Tableau::from_square(
            "bad",
            vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]],
            vec![q(1, 2), q(1, 2)],
            vec![q(1, 1), q(0, 1)],
            2,
            1,
        )
        .unwrap_err();
        assert_eq!(err, TableauError::NotExplicit { row: 1, col: 2 });
    }

    #[test]
    fn rejects_inconsistent_c() {
        let err = Tableau::with_abscissae(
            "bad",
            vec![q(0, 1), q(1, 3)],
            vec![vec![], vec![q(1, 2)]],
            vec![q(0, 1), q(1, 1)],
            vec![q(1, 1), q(0, 1)],
            2,
            1,
        )
        .unwrap_err();
        assert_eq!(err, TableauError::RowSum { row: 2 });
    }

    #[test]
    fn order_invariant() {
        let make = |p, ph, bh: Vec<Coefficient>| {
            Tableau::new("e", vec![vec![]], vec![q(1, 1)], bh, p, ph)
        };
        assert!(make(1, 1, vec![q(1, 1)]).is_ok());
        assert!(make(1, 1, vec![q(1, 2)]).is_err());
        assert!(make(2, 3, vec![q(1, 1)]).is_err());
        assert!(make(0, 0, vec![q(1, 1)]).is_err());
    }
}

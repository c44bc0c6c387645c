//! Elementary weights and order-condition residuals.

use super::dd::DoubleDouble;
use super::rational::Rational;
use super::scalar::{Coefficient, Scalar};
use super::tableau::{ScalarTableau, Tableau, Weights};
use super::trees::{enumerate_trees, trees_of_order, RootedTree, TreeError, MAX_TREE_ORDER};

/// Default relative tolerance for tableaus with non-rational entries.
pub const DEFAULT_TOLERANCE: f64 = 1e-13;

/// How a residual is normalised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResidualConvention {
    /// `b . Phi(t) - 1/gamma(t)`.
    #[default]
    Plain,
    /// The plain residual divided by `sigma(t)`, i.e. the coefficient of the
    /// elementary differential in the local error expansion.
    SigmaWeighted,
}

#[derive(Clone, Debug)]
pub struct Residual {
    pub tree: &'static RootedTree,
    pub value: Coefficient,
    /// Magnitude the residual is judged against: `max(1/gamma, sum |b_i Phi_i|)`.
    pub scale: f64,
}

impl Residual {
    /// Zero test: exact for exact residuals, relative to `scale` otherwise.
    pub fn vanishes(&self, tolerance: f64) -> bool {
        match &self.value {
            Coefficient::Exact(r) => num_traits::Zero::is_zero(r),
            Coefficient::Approx(d) => d.to_f64().abs() <= tolerance * self.scale,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifiedOrder {
    Exact(u32),
    /// Every condition up to the largest supported tree order holds.
    AtLeast(u32),
}

impl VerifiedOrder {
    /// The order as a number; `AtLeast(q)` reports `q`.
    pub fn value(self) -> u32 {
        match self {
            VerifiedOrder::Exact(q) | VerifiedOrder::AtLeast(q) => q,
        }
    }
}

impl std::fmt::Display for VerifiedOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerifiedOrder::Exact(q) => write!(f, "{q}"),
            VerifiedOrder::AtLeast(q) => write!(f, ">= {q}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrderReport {
    pub order: VerifiedOrder,
    /// The first nonvanishing residual, at order `order + 1`.
    pub failure: Option<Residual>,
}

/// Elementary weights of one tableau, grown order by order on demand.
struct WeightTable<T> {
    tab: ScalarTableau<T>,
    /// `Phi(t)` for every tree id computed so far.
    phi: Vec<Vec<T>>,
    /// `A Phi(t)`, needed for trees that occur as children.
    a_phi: Vec<Vec<T>>,
    /// `|A| |Phi(t)|` and `|Phi(t)|` in f64, for residual scales.
    abs_phi: Vec<Vec<f64>>,
    abs_a_phi: Vec<Vec<f64>>,
    abs_a: Vec<Vec<f64>>,
}

impl<T: Scalar> WeightTable<T> {
    fn new(t: &Tableau) -> Self {
        let abs_a = (0..t.stages())
            .map(|i| t.a_row(i).iter().map(Coefficient::abs_f64).collect())
            .collect();
        Self {
            tab: t.to_scalars(),
            phi: Vec::new(),
            a_phi: Vec::new(),
            abs_phi: Vec::new(),
            abs_a_phi: Vec::new(),
            abs_a,
        }
    }

    fn extend_to(&mut self, q: u32) -> Result<(), TreeError> {
        let trees = enumerate_trees(q)?;
        let s = self.tab.b.len();
        if self.phi.len() >= trees.len() {
            return Ok(());
        }
        for t in &trees[self.phi.len()..] {
            let mut phi = vec![T::one(); s];
            let mut abs_phi = vec![1.0; s];
            for &c in t.children() {
                let a_phi = &self.a_phi[c];
                let abs_a_phi = &self.abs_a_phi[c];
                for i in 0..s {
                    if !phi[i].is_zero() {
                        phi[i] = phi[i].mul(&a_phi[i]);
                    }
                    abs_phi[i] *= abs_a_phi[i];
                }
            }
            let a_phi = self.tab.apply_a(&phi);
            let abs_a_phi = self
                .abs_a
                .iter()
                .map(|row| row.iter().zip(&abs_phi).map(|(a, p)| a * p).sum())
                .collect();
            self.phi.push(phi);
            self.a_phi.push(a_phi);
            self.abs_phi.push(abs_phi);
            self.abs_a_phi.push(abs_a_phi);
        }
        Ok(())
    }

    fn residuals(
        &mut self,
        which: Weights,
        q: u32,
        convention: ResidualConvention,
    ) -> Result<Vec<Residual>, TreeError> {
        self.extend_to(q)?;
        let w = self.tab.weights(which).to_vec();
        let w_abs: Vec<f64> = w.iter().map(|x| x.to_f64().abs()).collect();
        let out = trees_of_order(q)?
            .iter()
            .map(|t| {
                let phi = &self.phi[t.id()];
                let dot = w
                    .iter()
                    .zip(phi)
                    .filter(|(b, _)| !b.is_zero())
                    .fold(T::zero(), |acc, (b, p)| acc.add(&b.mul(p)));
                let inv_gamma = T::from_rational(&t.gamma_rational().recip());
                let mut value = dot.sub(&inv_gamma);
                let mut scale = w_abs
                    .iter()
                    .zip(&self.abs_phi[t.id()])
                    .map(|(b, p)| b * p)
                    .sum::<f64>()
                    .max(1.0 / t.gamma() as f64);
                if convention == ResidualConvention::SigmaWeighted {
                    value = value.div(&T::from_rational(&t.sigma_rational()));
                    scale /= t.sigma() as f64;
                }
                Residual {
                    tree: t,
                    value: value.into_coefficient(),
                    scale,
                }
            })
            .collect();
        Ok(out)
    }
}

enum Engine {
    Exact(WeightTable<Rational>),
    Approx(WeightTable<DoubleDouble>),
}

/// Order-condition evaluator for one tableau. Exact tableaus are handled in
/// rational arithmetic, others in double-double.
pub struct OrderConditions {
    engine: Engine,
    declared: (u32, u32),
    tolerance: f64,
}

impl OrderConditions {
    pub fn new(t: &Tableau) -> Self {
        let engine = if t.is_exact() {
            Engine::Exact(WeightTable::new(t))
        } else {
            Engine::Approx(WeightTable::new(t))
        };
        Self {
            engine,
            declared: (t.order(), t.embedded_order()),
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    /// Relative tolerance used for inexact tableaus; exact ones ignore it.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.engine, Engine::Exact(_))
    }

    pub fn declared_order(&self, which: Weights) -> u32 {
        match which {
            Weights::Principal => self.declared.0,
            Weights::Embedded => self.declared.1,
        }
    }

    /// Residuals for every tree of order exactly `q`.
    pub fn residuals(
        &mut self,
        which: Weights,
        q: u32,
        convention: ResidualConvention,
    ) -> Result<Vec<Residual>, TreeError> {
        match &mut self.engine {
            Engine::Exact(w) => w.residuals(which, q, convention),
            Engine::Approx(w) => w.residuals(which, q, convention),
        }
    }

    /// Largest `q` for which every condition of order `<= q` holds, with the
    /// first failing condition at `q + 1`.
    pub fn verify(&mut self, which: Weights) -> OrderReport {
        let tol = self.tolerance;
        let mut verified = 0;
        for q in 1..=MAX_TREE_ORDER {
            let res = self
                .residuals(which, q, ResidualConvention::Plain)
                .expect("order in range");
            if let Some(bad) = res.into_iter().find(|r| !r.vanishes(tol)) {
                return OrderReport {
                    order: VerifiedOrder::Exact(verified),
                    failure: Some(bad),
                };
            }
            verified = q;
        }
        OrderReport {
            order: VerifiedOrder::AtLeast(MAX_TREE_ORDER),
            failure: None,
        }
    }

    /// Number of order-`q` conditions the weights fail.
    pub fn count_failures(&mut self, which: Weights, q: u32) -> Result<usize, TreeError> {
        let tol = self.tolerance;
        Ok(self
            .residuals(which, q, ResidualConvention::Plain)?
            .iter()
            .filter(|r| !r.vanishes(tol))
            .count())
    }
}

/// Residuals of the trees of order exactly `q` for the chosen weights.
pub fn order_residuals(
    t: &Tableau,
    which: Weights,
    q: u32,
    convention: ResidualConvention,
) -> Result<Vec<Residual>, TreeError> {
    OrderConditions::new(t).residuals(which, q, convention)
}

/// Verified order of the chosen weights (exact, or to the default tolerance
/// for inexact tableaus).
pub fn verify_order(t: &Tableau, which: Weights) -> OrderReport {
    OrderConditions::new(t).verify(which)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rational;

    fn q(n: i64, d: i64) -> Coefficient {
        Coefficient::Exact(rational(n, d))
    }

    fn euler() -> Tableau {
        Tableau::new("euler", vec![vec![]], vec![q(1, 1)], vec![q(1, 1)], 1, 1).unwrap()
    }

    fn midpoint() -> Tableau {
        Tableau::new(
            "midpoint",
            vec![vec![], vec![q(1, 2)]],
            vec![q(0, 1), q(1, 1)],
            vec![q(1, 1), q(0, 1)],
            2,
            1,
        )
        .unwrap()
    }

    fn values(r: &[Residual]) -> Vec<Coefficient> {
        r.iter().map(|x| x.value.clone()).collect()
    }

    #[test]
    fn euler_residuals() {
        let t = euler();
        let r1 = order_residuals(&t, Weights::Principal, 1, ResidualConvention::Plain).unwrap();
        assert_eq!(values(&r1), vec![q(0, 1)]);
        let r2 = order_residuals(&t, Weights::Principal, 2, ResidualConvention::Plain).unwrap();
        assert_eq!(values(&r2), vec![q(-1, 2)]);
    }

    #[test]
    fn midpoint_residuals() {
        let r = order_residuals(&midpoint(), Weights::Principal, 3, ResidualConvention::Plain)
            .unwrap();
        // Bushy tree first: sum b c^2 - 1/3, then b A c - 1/6.
        assert_eq!(values(&r), vec![q(-1, 12), q(-1, 6)]);
        let w = order_residuals(
            &midpoint(),
            Weights::Principal,
            3,
            ResidualConvention::SigmaWeighted,
        )
        .unwrap();
        assert_eq!(values(&w), vec![q(-1, 24), q(-1, 6)]);
    }

    #[test]
    fn verification_is_sharp() {
        let rep = verify_order(&midpoint(), Weights::Principal);
        assert_eq!(rep.order, VerifiedOrder::Exact(2));
        assert_eq!(rep.failure.unwrap().tree.order(), 3);
        assert_eq!(
            verify_order(&midpoint(), Weights::Embedded).order,
            VerifiedOrder::Exact(1)
        );
        assert_eq!(verify_order(&euler(), Weights::Principal).order, VerifiedOrder::Exact(1));
    }

    #[test]
    fn inexact_tableau_uses_tolerance() {
        let half = Coefficient::Approx(DoubleDouble::from_f64(0.5) + DoubleDouble::from_f64(1e-30));
        let t = Tableau::new(
            "perturbed",
            vec![vec![], vec![half]],
            vec![q(0, 1), q(1, 1)],
            vec![q(1, 1), q(0, 1)],
            2,
            1,
        )
        .unwrap();
        let mut oc = OrderConditions::new(&t);
        assert!(!oc.is_exact());
        assert_eq!(oc.verify(Weights::Principal).order, VerifiedOrder::Exact(2));
    }
}

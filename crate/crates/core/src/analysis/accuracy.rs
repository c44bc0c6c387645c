//! Principal error norm and accuracy-efficiency indices.

use crate::builders::EmbeddedMethod;
use crate::exact::{
    DoubleDouble, OrderConditions, Rational, ResidualConvention, Scalar, Tableau,
    Weights, MAX_TREE_ORDER,
};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum AccuracyError {
    #[error("order-{0} conditions are beyond the supported tree order")]
    OrderTooHigh(u32),
    #[error("principal error norm is zero; the declared order is not sharp")]
    NotSharp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyReport {
    pub c_p1: f64,
    pub eta: f64,
    pub eta_parallel: f64,
    /// Order-`p` conditions the embedded weights fail.
    pub defect: usize,
}

/// `C_{p+1}`: Euclidean norm of the plain order-`(p+1)` residuals of `b`,
/// summed exactly and rounded once.
pub fn principal_error_norm(t: &Tableau) -> Result<f64, AccuracyError> {
    let q = t.order() + 1;
    if q > MAX_TREE_ORDER {
        return Err(AccuracyError::OrderTooHigh(q));
    }
    let res = OrderConditions::new(t)
        .residuals(Weights::Principal, q, ResidualConvention::Plain)
        .expect("order checked");
    let sum = if t.is_exact() {
        let total = res.iter().fold(Rational::zero(), |acc, r| {
            let v = r.value.to_rational();
            acc + &v * &v
        });
        total.to_f64()
    } else {
        res.iter()
            .fold(DoubleDouble::ZERO, |acc, r| {
                let v = r.value.to_dd();
                acc + v * v
            })
            .to_f64()
    };
    Ok(sum.sqrt())
}

/// `eta = (1/s) C_{p+1}^{-1/(p+1)}`, times `s/s_seq` when `parallel`.
pub fn accuracy_efficiency(m: &EmbeddedMethod, parallel: bool) -> Result<f64, AccuracyError> {
    let c = principal_error_norm(m.tableau())?;
    eta_from_norm(m, c, parallel)
}

fn eta_from_norm(m: &EmbeddedMethod, c: f64, parallel: bool) -> Result<f64, AccuracyError> {
    if c == 0.0 {
        return Err(AccuracyError::NotSharp);
    }
    let s = m.stages() as f64;
    let p1 = f64::from(m.order() + 1);
    let eta = c.powf(-1.0 / p1) / s;
    if parallel {
        let s_seq = m.graph().seq_stages().expect("acyclic") as f64;
        Ok(eta * s / s_seq)
    } else {
        Ok(eta)
    }
}

/// Number of order-`p` conditions not satisfied by the embedded weights.
pub fn embedded_defect(m: &EmbeddedMethod) -> usize {
    let t = m.tableau();
    let p = t.order().min(MAX_TREE_ORDER);
    OrderConditions::new(t)
        .count_failures(Weights::Embedded, p)
        .expect("order in range")
}

pub fn accuracy_report(m: &EmbeddedMethod) -> Result<AccuracyReport, AccuracyError> {
    let c_p1 = principal_error_norm(m.tableau())?;
    Ok(AccuracyReport {
        c_p1,
        eta: eta_from_norm(m, c_p1, false)?,
        eta_parallel: eta_from_norm(m, c_p1, true)?,
        defect: embedded_defect(m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::build_ex_euler;
    use crate::exact::{rational, Coefficient};

    fn q(n: i64, d: i64) -> Coefficient {
        Coefficient::Exact(rational(n, d))
    }

    #[test]
    fn euler_and_midpoint_norms() {
        let euler = Tableau::new("euler", vec![vec![]], vec![q(1, 1)], vec![q(1, 1)], 1, 1).unwrap();
        assert_eq!(principal_error_norm(&euler).unwrap(), 0.5);
        let mid = build_ex_euler(2).unwrap();
        let c = principal_error_norm(mid.tableau()).unwrap();
        assert!((c - 5f64.sqrt() / 12.0).abs() < 1e-15);
        let eta = accuracy_efficiency(&mid, false).unwrap();
        assert!((eta - 0.5 * (12.0 / 5f64.sqrt()).powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn euler_four_defect() {
        assert!(embedded_defect(&build_ex_euler(4).unwrap()) >= 1);
    }
}

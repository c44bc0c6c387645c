//! Construction of extrapolation and deferred-correction methods as embedded
//! Runge-Kutta pairs, plus bundled reference pairs.

mod dc;
mod extrapolation;
mod reference;
mod symbolic;

use std::fmt;

use crate::analysis::graph::StageGraph;
use crate::exact::{
    FormatError, OrderConditions, Rational, Tableau, TableauError, VerifiedOrder, Weights,
    MAX_TREE_ORDER,
};

pub use dc::{DcConfig, NodeFamily};
pub use reference::{load_reference_pair, load_tableau_file, reference_names};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    ExEuler,
    ExMidpoint,
    DcEuler,
    Reference,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::ExEuler => "ex-euler",
            Family::ExMidpoint => "ex-midpoint",
            Family::DcEuler => "dc",
            Family::Reference => "reference",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MethodParams {
    ExEuler { p: u32 },
    ExMidpoint { p: u32 },
    Dc(DcConfig),
    Reference { name: String },
}

/// Where a stage comes from in the generating algorithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageInfo {
    /// e.g. `Y_{3,1}`; stage 0 is `y_n`.
    pub label: String,
    /// Extrapolation chain or correction sweep (1-based); `None` for the
    /// shared first evaluation and for reference pairs.
    pub chain: Option<usize>,
    /// Substep within the chain.
    pub step: usize,
}

/// How much order checking a builder does before returning.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VerifyMode {
    /// Verify unless the tableau is large enough that the check would
    /// dominate (see [`VerifyMode::should_verify`]).
    #[default]
    Auto,
    Always,
    Never,
}

/// Stage-count times tree-count budget for [`VerifyMode::Auto`] on exact
/// tableaus (about a second of rational arithmetic). Double-double tableaus
/// are always cheap enough.
const AUTO_VERIFY_BUDGET: usize = 150_000;

impl VerifyMode {
    pub fn should_verify(self, t: &Tableau) -> bool {
        match self {
            VerifyMode::Always => true,
            VerifyMode::Never => false,
            VerifyMode::Auto if !t.is_exact() => true,
            VerifyMode::Auto => {
                let q = (t.order() + 1).min(MAX_TREE_ORDER);
                let trees = crate::exact::enumerate_trees(q).map_or(usize::MAX, <[_]>::len);
                trees.saturating_mul(t.stages()) <= AUTO_VERIFY_BUDGET
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("{family} order {p} not supported: {reason}")]
    Order {
        family: Family,
        p: u32,
        reason: &'static str,
    },
    #[error("theta = {0} outside [0, 1]")]
    Theta(Rational),
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error("{label}: {which} weights verified to order {found}, declared {declared}{}", .tree.as_ref().map(|t| format!("; failing tree {t}")).unwrap_or_default())]
    Verification {
        label: String,
        which: &'static str,
        declared: u32,
        found: VerifiedOrder,
        tree: Option<String>,
    },
    #[error("unknown reference pair `{0}` (known: bs5(4), pd8(7))")]
    UnknownReference(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
}

/// A tableau together with its construction provenance and stage graph.
#[derive(Clone, Debug)]
pub struct EmbeddedMethod {
    tableau: Tableau,
    family: Family,
    params: MethodParams,
    stages: Vec<StageInfo>,
    graph: StageGraph,
}

impl EmbeddedMethod {
    fn assemble(
        tableau: Tableau,
        family: Family,
        params: MethodParams,
        stages: Vec<StageInfo>,
    ) -> Self {
        let graph =
            StageGraph::from_tableau(&tableau).with_labels(stages.iter().map(|s| s.label.clone()));
        Self {
            tableau,
            family,
            params,
            stages,
            graph,
        }
    }

    /// Wraps an arbitrary tableau (no provenance beyond stage numbers).
    pub fn from_tableau(tableau: Tableau) -> Self {
        let stages = (0..tableau.stages())
            .map(|i| StageInfo {
                label: format!("stage {}", i + 1),
                chain: None,
                step: i,
            })
            .collect();
        let name = tableau.label().to_string();
        Self::assemble(tableau, Family::Reference, MethodParams::Reference { name }, stages)
    }

    pub fn tableau(&self) -> &Tableau {
        &self.tableau
    }

    pub fn label(&self) -> &str {
        self.tableau.label()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &MethodParams {
        &self.params
    }

    pub fn stage_info(&self) -> &[StageInfo] {
        &self.stages
    }

    pub fn graph(&self) -> &StageGraph {
        &self.graph
    }

    pub fn stages(&self) -> usize {
        self.tableau.stages()
    }

    pub fn order(&self) -> u32 {
        self.tableau.order()
    }

    pub fn embedded_order(&self) -> u32 {
        self.tableau.embedded_order()
    }
}

fn expected_order(declared: u32) -> VerifiedOrder {
    if declared >= MAX_TREE_ORDER {
        VerifiedOrder::AtLeast(MAX_TREE_ORDER)
    } else {
        VerifiedOrder::Exact(declared)
    }
}

fn weights_name(which: Weights) -> &'static str {
    match which {
        Weights::Principal => "b",
        Weights::Embedded => "bhat",
    }
}

/// Checks that both weight vectors have exactly their declared orders.
pub fn check_declared_orders(t: &Tableau) -> Result<(), BuildError> {
    let mut oc = OrderConditions::new(t);
    for which in [Weights::Principal, Weights::Embedded] {
        let declared = t.declared_order(which);
        let report = oc.verify(which);
        if report.order != expected_order(declared) {
            return Err(BuildError::Verification {
                label: t.label().to_string(),
                which: weights_name(which),
                declared,
                found: report.order,
                tree: report
                    .failure
                    .map(|f| format!("{:?}", f.tree.level_sequence())),
            });
        }
    }
    Ok(())
}

/// Checks that both weight vectors reach at least their declared orders.
pub(crate) fn check_minimum_orders(t: &Tableau) -> Result<(), BuildError> {
    let mut oc = OrderConditions::new(t);
    for which in [Weights::Principal, Weights::Embedded] {
        let declared = t.declared_order(which);
        let report = oc.verify(which);
        if report.order.value() < declared.min(MAX_TREE_ORDER) {
            return Err(BuildError::Verification {
                label: t.label().to_string(),
                which: weights_name(which),
                declared,
                found: report.order,
                tree: report
                    .failure
                    .map(|f| format!("{:?}", f.tree.level_sequence())),
            });
        }
    }
    Ok(())
}

fn finish(
    built: (Tableau, Vec<StageInfo>),
    family: Family,
    params: MethodParams,
    verify: VerifyMode,
) -> Result<EmbeddedMethod, BuildError> {
    let (tableau, stages) = built;
    if verify.should_verify(&tableau) {
        check_declared_orders(&tableau)?;
    }
    Ok(EmbeddedMethod::assemble(tableau, family, params, stages))
}

pub fn build_ex_euler(p: u32) -> Result<EmbeddedMethod, BuildError> {
    build_ex_euler_with(p, VerifyMode::Auto)
}

pub fn build_ex_euler_with(p: u32, verify: VerifyMode) -> Result<EmbeddedMethod, BuildError> {
    if !(2..=12).contains(&p) {
        return Err(BuildError::Order {
            family: Family::ExEuler,
            p,
            reason: "order must be between 2 and 12",
        });
    }
    finish(
        extrapolation::ex_euler(p)?,
        Family::ExEuler,
        MethodParams::ExEuler { p },
        verify,
    )
}

pub fn build_ex_midpoint(p: u32) -> Result<EmbeddedMethod, BuildError> {
    build_ex_midpoint_with(p, VerifyMode::Auto)
}

pub fn build_ex_midpoint_with(p: u32, verify: VerifyMode) -> Result<EmbeddedMethod, BuildError> {
    if p % 2 != 0 {
        return Err(BuildError::Order {
            family: Family::ExMidpoint,
            p,
            reason: "midpoint extrapolation needs an even order",
        });
    }
    if !(4..=18).contains(&p) {
        return Err(BuildError::Order {
            family: Family::ExMidpoint,
            p,
            reason: "order must be between 4 and 18",
        });
    }
    finish(
        extrapolation::ex_midpoint(p)?,
        Family::ExMidpoint,
        MethodParams::ExMidpoint { p },
        verify,
    )
}

pub fn build_dc_euler(cfg: &DcConfig) -> Result<EmbeddedMethod, BuildError> {
    build_dc_euler_with(cfg, VerifyMode::Auto)
}

pub fn build_dc_euler_with(cfg: &DcConfig, verify: VerifyMode) -> Result<EmbeddedMethod, BuildError> {
    if !(3..=12).contains(&cfg.p) {
        return Err(BuildError::Order {
            family: Family::DcEuler,
            p: cfg.p,
            reason: "order must be between 3 and 12",
        });
    }
    if !dc::theta_in_range(&cfg.theta) {
        return Err(BuildError::Theta(cfg.theta.clone()));
    }
    finish(
        dc::dc_euler(cfg)?,
        Family::DcEuler,
        MethodParams::Dc(cfg.clone()),
        verify,
    )
}

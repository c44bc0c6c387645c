//! Exact arithmetic, tableaus, rooted trees and order conditions.

pub mod dd;
pub mod format;
pub mod order;
pub mod rational;
pub mod scalar;
pub mod tableau;
pub mod trees;

pub use dd::DoubleDouble;
pub use format::{parse_tableau, serialize_tableau, FormatError};
pub use order::{
    order_residuals, verify_order, OrderConditions, OrderReport, Residual, ResidualConvention,
    VerifiedOrder, DEFAULT_TOLERANCE,
};
pub use rational::{integer, rational, Rational};
pub use scalar::{Coefficient, Scalar};
pub use tableau::{ScalarTableau, Tableau, TableauError, Weights};
pub use trees::{enumerate_trees, trees_of_order, RootedTree, TreeError, MAX_TREE_ORDER};

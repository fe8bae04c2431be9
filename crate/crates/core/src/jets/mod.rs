//! Truncated Taylor jets and the expression trees that are lifted into them.

mod expr;
mod jet;
mod layout;
pub(crate) mod univariate;

pub use expr::{lift, Expr, Lifter, Node, Rational, UnivariateFn, MAX_ORDER};
pub use jet::Jet;
pub use layout::{coefficient_count, Layout};

/// Default evaluation order used by the curvature pipeline.
pub const DEFAULT_ORDER: usize = 3;

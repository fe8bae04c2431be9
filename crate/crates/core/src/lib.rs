//! Numerical verification of Killing initial data and the static/Obata rigidity picture.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod jets;
pub mod killing_dev;
pub mod models;
pub mod operators;
pub mod warp_ode;

pub use error::{Error, Result};

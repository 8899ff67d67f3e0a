// NaN must fail range checks, so negated comparisons are deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod curve;
pub mod error;
pub mod geodesic;
pub mod knot;
pub mod metric;
pub mod ode;
pub mod quadrature;
pub mod quotient;
pub mod warp;

pub use error::{Error, Result};

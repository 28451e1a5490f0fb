//! Rhombus gasket construction of the Koch snowflake and its one-parameter
//! family of fractal curves.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod curve;
pub mod error;
pub mod geom;
pub mod ifs;
pub mod koch;
pub mod render;
pub mod substitution;

pub use error::{Error, Result};

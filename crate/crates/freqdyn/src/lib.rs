//! Frequent hypercyclicity toolkit: weighted densities, weighted shifts and the
//! construction of common frequently hypercyclic vectors.

// `!(x > 0.0)` style guards reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod construction;
pub mod densities;
pub mod error;
pub mod logspace;
pub mod operators;
pub mod shift_analysis;

pub use error::{Error, Result};

//! Phase structure of Peng-Robinson gases and steady isentropic filtration
//! through a porous medium driven by point sources.
//!
//! Everything is computed in reduced (dimensionless) variables; see
//! [`eos::to_reduced`] and [`eos::to_dimensional`] for unit conversion.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eos;
pub mod error;
pub mod field;
pub mod interp;
pub mod isentrope;
pub mod parallel;
pub mod phase;
pub mod potential;
pub mod quad;
pub mod roots;

pub use error::{Error, Result};

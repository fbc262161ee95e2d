//! Numerical toolkit for four-dimensional quasi-Einstein metrics: curvature
//! of coordinate charts, quasi-Einstein residuals, closed-form topological and
//! geometric estimates, one-dimensional comparison ODEs and curvature
//! integrals over compactified charts.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod comparison;
pub mod error;
pub mod fixtures;
pub mod qe;
pub mod sum;
pub mod tensor;
pub mod topology;

pub use error::{Error, Result};

//! Levi-form pseudoconvexity analysis for domains `Ω = {ρ < 0} ⊂ C^n`.
//!
//! The crate parses a real-valued defining function, differentiates it with
//! second-order Wirtinger jets, samples the boundary, and minimises the Levi
//! form over complex tangent directions. When a boundary point with negative
//! Levi form is found, it constructs a two-dimensional affine slice through
//! that point whose own boundary carries the same negative Levi value, along
//! with a local quadratic witness of nonpseudoconvexity.

// Negated float comparisons are used on purpose so that NaN takes the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod error;
pub mod expr;
pub mod hormander;
pub mod levi;
pub mod linalg;
pub mod pipeline;
pub mod report;
pub mod sampling;
pub mod slicing;

pub use error::{Error, Result};

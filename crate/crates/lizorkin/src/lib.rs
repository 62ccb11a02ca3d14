//! Grid-scale numerics for first-order-difference Triebel–Lizorkin norms on
//! rough domains: Whitney coverings, Jones-type extension, chain-rule
//! expansions and the verification studies built on them.

// Index loops read better in the numeric kernels; `!(x > 0.0)` rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod calculus;
pub mod error;
pub mod experiments;
pub mod extension;
pub mod geometry;
pub mod spaces;

pub use error::{Error, Result};

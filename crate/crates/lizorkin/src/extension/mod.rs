//! Partition of unity, moment projections and the extension operators.

pub mod bumps;
pub mod moments;
pub mod operator;

pub use bumps::BumpPartition;
pub use moments::{moment_projection, moment_projection_windowed, MomentPolynomial};
pub use operator::{extend, extend_lambda0, extend_lambdak, extension_covering, Extension, ExtensionStats};

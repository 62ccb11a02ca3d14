//! Sampled functions on grids and their discrete norms.

pub mod compose;
pub mod grid;
pub mod norms;
pub mod sampled;

pub use compose::resample_through_map;
pub use grid::Grid;
pub use norms::{
    holder_norm, holder_seminorm, holder_seminorm_with, lp_norm, tl_norm, tl_norm_with, tl_seminorm,
    tl_norms, tl_seminorm_with, tl_seminorms, wkp_norm, HolderOptions, NormSpec, NormValue, TlOptions,
};
pub use sampled::SampledFunction;

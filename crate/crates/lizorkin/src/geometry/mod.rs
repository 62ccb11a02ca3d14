//! Dyadic geometry: domains, Whitney coverings, chains and shadows.

pub mod chain;
pub mod checks;
pub mod cube;
pub mod domain;
pub mod shadow;
pub mod whitney;

pub use chain::{find_chain, find_chain_indices, Chain};
pub use checks::{check_corkscrew, check_uniformity, sample_uniformity, CorkscrewReport, UniformityReport};
pub use cube::{DyadicCube, Lattice};
pub use domain::{BBox, Domain, SdfGrid, Shape, BUILTIN_NAMES};
pub use shadow::{shadow_of, shadow_sums, Shadow, ShadowSums};
pub use whitney::{CubeIndex, CubeSet, Family, WhitneyCovering, WhitneyOptions, DEFAULT_CW};

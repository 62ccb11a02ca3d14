//! Multiindices, chain-rule expansions, inverse-function derivatives, finite
//! differences and test maps.

pub mod faa;
pub mod finite_diff;
pub mod inverse;
pub mod maps;
pub mod multi_index;

pub use faa::{eval_chain_derivative, faa_terms, DerivativeTable, FaaTerm, MAX_ORDER};
pub use inverse::{inverse_derivative_expansion, inverse_map_derivatives, InverseExpansion, JetTable};
pub use maps::{singular_values, MapFamily};
pub use multi_index::{m_vector, MultiIndex};
pub use finite_diff::{delta_h, finite_diff, product_difference_expansion};

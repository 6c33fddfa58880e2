//! Real Schur flow structure: decomposition plans, component forms, the
//! gradient zero pattern and the canonical form of antisymmetric matrices.

mod canonical;
mod matrix;
mod pattern;
mod plan;

pub use canonical::{canonical_antisymmetric, canonical_block_matrix, CanonicalRotation};
pub use matrix::{mat_mul, random_orthogonal, sym_antisym_split, transpose};
pub use pattern::{block_of, check_rsf, zero_pattern, ZeroPattern};
pub use plan::{component_velocity_forms, component_vorticities, decomposition_plan, DecompPlan};

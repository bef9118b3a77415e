//! Exact integer and rational linear algebra.
//!
//! Everything here works over arbitrary-precision integers: Smith normal form
//! intermediates grow quickly, and a silently wrapped entry would corrupt an
//! isotropy group without any visible symptom.

mod group;
mod hnf;
mod matrix;
mod snf;

pub use group::{
    group_equal, restrict_character, subgroup_structure, AmbientGroup, CharacterDescriptor,
    GroupDescriptor,
};
pub(crate) use group::to_i64;
pub use hnf::{lattice_contains, rational_kernel, row_hnf};
pub use matrix::IntMatrix;
pub use snf::{smith_normal_form, SnfResult};

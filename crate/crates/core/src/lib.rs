//! Stratified reduction for linear abelian actions.
//!
//! Given a diagonal action of `G = T^k × Π ℤ/m_i` on `ℂⁿ`, described by an
//! integer weight system, this crate computes the orbit-type stratification of
//! the symplectic quotient `V//G(0)` and of the contact quotient `S//G` of the
//! unit sphere, the local model `ℝ^{2m} × cone(link)` at each stratum, and the
//! recursive tree of links. Exact integer and rational arithmetic decides every
//! combinatorial question; floating point only enters the sampler.

pub mod error;
pub mod intlin;
pub mod local_model;
pub mod lp;
pub mod sampler;
mod serde_util;
pub mod strat;
pub mod support;
pub mod torus_rep;
pub mod union_find;

pub use error::{Error, Result};
pub use intlin::{AmbientGroup, CharacterDescriptor, GroupDescriptor, IntMatrix};
pub use local_model::{link_tree, slice_representation, LinkNode, LinkTree, SliceRep};
pub use sampler::{verify_ledgers, SampleBatch, VerificationBudget, VerificationReport};
pub use strat::{
    assemble_partition, open_dense_stratum, Partition, QuotientKind, StratificationDescriptor,
    Stratum,
};
pub use support::Support;
pub use torus_rep::{GroupElement, MomentValue, Point, WeightSystem};

//! Computational tools for closed subgroups of the symmetric group on ℕ.
//!
//! - [`perm`]: lazy two-sided permutations, windows, parity, back-and-forth limits.
//! - [`metrics`]: generalized metrics, norms, refinement, bounded-permutation groups.
//! - [`partitions`]: computable partitions, their classes, stabilizers and conjugators.
//! - [`witnesses`]: explicit constructions relating stabilizer groups of partitions.
//! - [`trees`]: stabilizer trees, branch limits and the special permutation `s`.
//! - [`local`]: factoring permutations of ω into two local permutations.
//! - [`classifier`]: group descriptors, orbit probing and the four-class classifier.

pub mod classifier;
pub mod local;
pub mod metrics;
pub mod partitions;
pub mod perm;
pub mod trees;
pub mod witnesses;

/// Exact rationals used for all distances.
pub type Rational = num_rational::Ratio<i64>;

/// A three-valued answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

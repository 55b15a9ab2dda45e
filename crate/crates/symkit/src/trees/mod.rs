//! Stabilizer trees `g(k_0, …, k_{r-1})`, their branch limits, and the
//! special permutation `s` built from an E-tree of tuples.
//!
//! Nodes are built by length. `Γ_i` holds `ε_{<i}` and the pivots chosen so
//! far together with their preimages under every node of length at most `i`,
//! and a child of a node of length `i` differs from it by a left factor in
//! `G_(Γ_i)`. Every branch therefore satisfies the back-and-forth hypotheses
//! at every level of the built tree.

mod etree;
mod oracle;
mod tree;

pub use etree::{
    build_e_tree, build_s, verify_conjugation, AllInjective, ConjugationReport, DFamily, ENode, ETree, ETreeVariant,
    TreeFamily, E_NODE_CAP,
};
pub use oracle::{
    FiniteGroup, FixingGroup, FullGroup, GroupOracle, OrbitResult, StabilizerGroup, TrivialGroup, GROUP_CAP,
    ORBIT_HORIZON,
};
pub use tree::{
    branch_limit, branch_sequence, build_tree, NodeSummary, TreeCheck, TreeMode, TreeNode, TreeState, TreeSummary,
    DEFAULT_DEPTH_CAP, PIVOT_SCAN,
};

use thiserror::Error;

use crate::partitions::PartitionError;
use crate::perm::PermError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("hypothesis failure at level {level}: {reason}")]
    HypothesisFailure { level: usize, reason: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("ill-formed tree: {0}")]
    IllFormed(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

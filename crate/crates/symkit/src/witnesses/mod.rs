//! Explicit constructions relating stabilizers of partitions: the pair
//! `(f, g)` with `S_(B) ⊆ (f⁻¹S_(A)f)(g⁻¹S_(A)g)`, the even-subgroup shift,
//! the red/green chain factorization, the ℤ-shift commutator solve and the
//! finite-support predicates.

mod commutator;
mod even;
mod pequiv;
mod qequiv;

pub use commutator::{
    block_shift, commutator_solve, realized_pattern, sfinite_class, sigma, sfinite_class_with_cap, three_cycle_extract,
    CommutatorSolution, SFiniteClass, SFiniteReport, SFINITE_CAP,
};
pub use even::{decompose_z2, even_shift_witness, EvenShift};
pub use pequiv::{factor_through, p_equiv_witness, verify_packing, PFactorization, PWitness, PackEntry};
pub use qequiv::{chain_partition, q_equiv_witness, ChainColor, QFactor, QWitness};

use std::sync::Mutex;

use thiserror::Error;

use crate::partitions::{Partition, PartitionError};
use crate::perm::{PermError, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error("no certificate: {0}")]
    NoCertificate(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("closure exceeds {cap} elements")]
    Budget { cap: usize },
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

struct IndexState {
    ids: Vec<Point>,
    scan: Point,
}

/// Which blocks a [`BlockIndex`] counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BlockKind {
    All,
    NonSingleton,
    Singleton,
}

/// Block ids of a partition in increasing order, restricted to one kind of
/// block, enumerated on demand.
pub(crate) struct BlockIndex {
    p: Partition,
    kind: BlockKind,
    horizon: Point,
    state: Mutex<IndexState>,
}

impl BlockIndex {
    pub fn new(p: &Partition, kind: BlockKind, horizon: Point) -> Self {
        BlockIndex {
            p: p.clone(),
            kind,
            horizon,
            state: Mutex::new(IndexState {
                ids: Vec::new(),
                scan: 0,
            }),
        }
    }

    fn counts(&self, id: Point) -> Result<bool, PartitionError> {
        if self.p.block_of(id) != id {
            return Ok(false);
        }
        Ok(match self.kind {
            BlockKind::All => true,
            BlockKind::NonSingleton => self.p.block_members(id)?.len() > 1,
            BlockKind::Singleton => self.p.block_members(id)?.len() == 1,
        })
    }

    fn scan_until(&self, st: &mut IndexState, done: impl Fn(&IndexState) -> bool) -> Result<(), PartitionError> {
        while !done(st) {
            if st.scan >= self.horizon {
                return Err(PartitionError::ProfileViolation {
                    block: st.scan,
                    reason: format!("no further block of {} below {}", self.p.name(), self.horizon),
                });
            }
            let x = st.scan;
            st.scan += 1;
            if self.counts(x)? {
                st.ids.push(x);
            }
        }
        Ok(())
    }

    /// The id of the `k`-th counted block.
    pub fn nth(&self, k: usize) -> Result<Point, PartitionError> {
        let mut st = self.state.lock().unwrap();
        self.scan_until(&mut st, |s| s.ids.len() > k)?;
        Ok(st.ids[k])
    }

    /// The ordinal of a counted block id, or `None` if the block is not counted.
    pub fn ordinal(&self, id: Point) -> Result<Option<usize>, PartitionError> {
        let mut st = self.state.lock().unwrap();
        self.scan_until(&mut st, |s| s.scan > id)?;
        Ok(st.ids.binary_search(&id).ok())
    }
}

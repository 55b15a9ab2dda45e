//! Computable partitions of ℕ into blocks.
//!
//! A block is identified by its least member. Profiles are declared by the
//! constructor and only spot-checked against probes.

mod classify;
mod conjugator;

pub use classify::{classify_partition, stabilizer_membership, ClassTag, Membership, PartitionClassTag};
pub use conjugator::{conjugator, conjugator_with_horizon};

use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::{PermError, Point};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("block {0} is infinite")]
    InfiniteBlock(Point),
    #[error("profile violation at block {block}: {reason}")]
    ProfileViolation { block: Point, reason: String },
    #[error("partitions are not isomorphic at depth {depth}: {reason}")]
    NotIsomorphicAtDepth { depth: usize, reason: String },
    #[error("unsupported partition: {0}")]
    Unsupported(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// Number of blocks with more than one element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Count {
    Finite(usize),
    Infinite,
}

/// Declared size profile of a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    BoundedBy { bound: usize, nonsingletons: Count },
    UnboundedFinite,
    HasInfiniteBlock { block: Point },
}

/// The block structure behind a [`Partition`].
pub trait BlockOracle: Send + Sync {
    /// Least member of the block containing `x`.
    fn block_of(&self, x: Point) -> Point;
    /// Members of the block with least member `id`, in increasing order.
    fn block_members(&self, id: Point) -> Result<Vec<Point>, PartitionError>;
}

/// A probed block recorded as evidence for the declared profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockSample {
    pub block: Point,
    /// `None` for an infinite block.
    pub size: Option<usize>,
}

/// A partition of ℕ with a declared profile.
#[derive(Clone)]
pub struct Partition {
    name: String,
    oracle: Arc<dyn BlockOracle>,
    profile: Profile,
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition({}, {:?})", self.name, self.profile)
    }
}

impl Partition {
    pub fn new(name: &str, oracle: Arc<dyn BlockOracle>, profile: Profile) -> Self {
        Partition {
            name: name.to_string(),
            oracle,
            profile,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn block_of(&self, x: Point) -> Point {
        self.oracle.block_of(x)
    }

    pub fn block_members(&self, id: Point) -> Result<Vec<Point>, PartitionError> {
        self.oracle.block_members(id)
    }

    /// Members of the block containing `x`.
    pub fn block(&self, x: Point) -> Result<Vec<Point>, PartitionError> {
        self.block_members(self.block_of(x))
    }

    /// Block ids in `[lo, hi)`, increasing.
    pub fn block_ids_in(&self, lo: Point, hi: Point) -> Vec<Point> {
        (lo..hi).filter(|&x| self.block_of(x) == x).collect()
    }

    /// Sizes of the blocks whose ids lie below `horizon`.
    pub fn certificate_samples(&self, horizon: Point) -> Vec<BlockSample> {
        self.block_ids_in(0, horizon)
            .into_iter()
            .map(|b| BlockSample {
                block: b,
                size: self.block_members(b).ok().map(|m| m.len()),
            })
            .collect()
    }

    /// The global block-size bound, if declared.
    pub fn size_bound(&self) -> Option<usize> {
        match self.profile {
            Profile::BoundedBy { bound, .. } => Some(bound),
            _ => None,
        }
    }

    pub fn has_finite_blocks(&self) -> bool {
        !matches!(self.profile, Profile::HasInfiniteBlock { .. })
    }

    /// Blocks `[start_k, start_k + size(k))` for a size sequence.
    pub fn intervals(
        name: &str,
        sizes: impl Fn(usize) -> usize + Send + Sync + 'static,
        profile: Profile,
    ) -> Self {
        Self::new(name, Arc::new(Intervals::new(sizes)), profile)
    }

    pub fn pairs() -> Self {
        Self::intervals(
            "partition:pairs",
            |_| 2,
            Profile::BoundedBy {
                bound: 2,
                nonsingletons: Count::Infinite,
            },
        )
    }

    /// Blocks of sizes 1, 2, 3, ... laid out consecutively.
    pub fn intervals_growing() -> Self {
        Self::intervals("partition:intervals-growing", |k| k + 1, Profile::UnboundedFinite)
    }

    /// Sizes 2, 1, 4, 3, 6, 5, ...: the growing intervals with neighbours swapped.
    pub fn intervals_shuffled() -> Self {
        Self::intervals(
            "partition:intervals-shuffled",
            |k| (k ^ 1) + 1,
            Profile::UnboundedFinite,
        )
    }

    /// Singletons alternating with blocks of sizes 4, 5, 6, ...
    pub fn growing_with_singletons() -> Self {
        Self::intervals(
            "partition:growing-singletons",
            |k| if k % 2 == 0 { 1 } else { k / 2 + 4 },
            Profile::UnboundedFinite,
        )
    }

    /// Consecutive blocks of a fixed size.
    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "block size must be positive");
        Self::intervals(
            &format!("partition:uniform@{size}"),
            move |_| size,
            Profile::BoundedBy {
                bound: size,
                nonsingletons: if size > 1 { Count::Infinite } else { Count::Finite(0) },
            },
        )
    }

    pub fn singletons() -> Self {
        let mut p = Self::uniform(1);
        p.name = "partition:singletons".into();
        p
    }

    /// Blocks `{4k, 4k+1}` and singletons `{4k+2}`, `{4k+3}`.
    pub fn canonical_a0() -> Self {
        Self::new(
            "partition:a0",
            Arc::new(A0),
            Profile::BoundedBy {
                bound: 2,
                nonsingletons: Count::Infinite,
            },
        )
    }

    /// Two infinite blocks: the even and the odd numbers.
    pub fn parity() -> Self {
        Self::new("partition:parity", Arc::new(Parity), Profile::HasInfiniteBlock { block: 0 })
    }

    /// Finitely many listed blocks, all other points singletons.
    pub fn explicit(
        name: &str,
        blocks: Vec<Vec<Point>>,
        profile: Option<Profile>,
    ) -> Result<Self, PartitionError> {
        let ex = Explicit::new(blocks)?;
        let inferred = Profile::BoundedBy {
            bound: ex.max_size(),
            nonsingletons: Count::Finite(ex.nonsingletons()),
        };
        Ok(Self::new(name, Arc::new(ex), profile.unwrap_or(inferred)))
    }

    /// Parses `partition:<name>` or a bare `<name>`.
    pub fn parse(text: &str) -> Result<Self, PartitionError> {
        let s = text.trim();
        let body = s.strip_prefix("partition:").unwrap_or(s);
        let bad = |msg: String| PartitionError::Parse { pos: 0, msg };
        if let Some(path) = body.strip_prefix("explicit@") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| bad(format!("cannot read `{path}`: {e}")))?;
            return Self::from_json(&format!("partition:explicit@{path}"), &text);
        }
        if let Some(n) = body.strip_prefix("uniform@") {
            let k: usize = n.parse().map_err(|_| bad(format!("bad block size `{n}`")))?;
            if k == 0 {
                return Err(bad("block size must be positive".into()));
            }
            return Ok(Self::uniform(k));
        }
        match body {
            "pairs" => Ok(Self::pairs()),
            "a0" => Ok(Self::canonical_a0()),
            "intervals-growing" => Ok(Self::intervals_growing()),
            "intervals-shuffled" => Ok(Self::intervals_shuffled()),
            "growing-singletons" => Ok(Self::growing_with_singletons()),
            "singletons" => Ok(Self::singletons()),
            "parity" => Ok(Self::parity()),
            _ => Err(bad(format!("unknown partition `{body}`"))),
        }
    }

    /// Reads `{"blocks": [[..], ..], "rest": "singletons", "profile": {..}}`.
    pub fn from_json(name: &str, text: &str) -> Result<Self, PartitionError> {
        #[derive(Deserialize)]
        struct Doc {
            blocks: Vec<Vec<Point>>,
            #[serde(default)]
            rest: Option<String>,
            #[serde(default)]
            profile: Option<Profile>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| PartitionError::Parse {
            pos: e.column(),
            msg: e.to_string(),
        })?;
        if let Some(r) = doc.rest.as_deref() {
            if r != "singletons" {
                return Err(PartitionError::Unsupported(format!("rest `{r}`")));
            }
        }
        Self::explicit(name, doc.blocks, doc.profile)
    }
}

/// Consecutive intervals with sizes from a sequence; block starts are cached.
struct Intervals {
    sizes: Box<dyn Fn(usize) -> usize + Send + Sync>,
    starts: Mutex<Vec<Point>>,
}

impl Intervals {
    fn new(sizes: impl Fn(usize) -> usize + Send + Sync + 'static) -> Self {
        Intervals {
            sizes: Box::new(sizes),
            starts: Mutex::new(vec![0]),
        }
    }

    /// Index of the interval containing `x`, and the cached starts.
    fn locate(&self, x: Point) -> (usize, Point, Point) {
        let mut st = self.starts.lock().unwrap();
        while *st.last().unwrap() <= x {
            let k = st.len() - 1;
            let next = st[k] + (self.sizes)(k).max(1);
            st.push(next);
        }
        let k = st.partition_point(|&s| s <= x) - 1;
        (k, st[k], st[k + 1])
    }
}

impl BlockOracle for Intervals {
    fn block_of(&self, x: Point) -> Point {
        self.locate(x).1
    }
    fn block_members(&self, id: Point) -> Result<Vec<Point>, PartitionError> {
        let (_, s, e) = self.locate(id);
        Ok((s..e).collect())
    }
}

struct A0;

impl BlockOracle for A0 {
    fn block_of(&self, x: Point) -> Point {
        if x % 4 == 1 {
            x - 1
        } else {
            x
        }
    }
    fn block_members(&self, id: Point) -> Result<Vec<Point>, PartitionError> {
        Ok(match id % 4 {
            0 | 1 => vec![id - id % 4, id - id % 4 + 1],
            _ => vec![id],
        })
    }
}

struct Parity;

impl BlockOracle for Parity {
    fn block_of(&self, x: Point) -> Point {
        x % 2
    }
    fn block_members(&self, id: Point) -> Result<Vec<Point>, PartitionError> {
        Err(PartitionError::InfiniteBlock(id % 2))
    }
}

struct Explicit {
    owner: std::collections::HashMap<Point, Point>,
    blocks: std::collections::HashMap<Point, Vec<Point>>,
}

impl Explicit {
    fn new(blocks: Vec<Vec<Point>>) -> Result<Self, PartitionError> {
        let mut owner = std::collections::HashMap::new();
        let mut out = std::collections::HashMap::new();
        for b in blocks {
            let b: BTreeSet<Point> = b.into_iter().collect();
            let Some(&id) = b.iter().next() else {
                return Err(PartitionError::Unsupported("empty block".into()));
            };
            for &x in &b {
                if owner.insert(x, id).is_some() {
                    return Err(PartitionError::ProfileViolation {
                        block: id,
                        reason: format!("{x} listed in two blocks"),
                    });
                }
            }
            out.insert(id, b.into_iter().collect());
        }
        Ok(Explicit { owner, blocks: out })
    }

    fn max_size(&self) -> usize {
        self.blocks.values().map(|b| b.len()).max().unwrap_or(1).max(1)
    }

    fn nonsingletons(&self) -> usize {
        self.blocks.values().filter(|b| b.len() > 1).count()
    }
}

impl BlockOracle for Explicit {
    fn block_of(&self, x: Point) -> Point {
        self.owner.get(&x).copied().unwrap_or(x)
    }
    fn block_members(&self, id: Point) -> Result<Vec<Point>, PartitionError> {
        Ok(self.blocks.get(&id).cloned().unwrap_or_else(|| vec![id]))
    }
}

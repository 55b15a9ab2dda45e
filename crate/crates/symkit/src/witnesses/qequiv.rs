//! Red/green chain colorings of a partition with bounded blocks and the
//! factorization of `S_(A)` through two conjugates of `S_(A₀)`.
//!
//! Every block is chained in increasing order. Edge `t` of the chain of a
//! non-singleton block with ordinal `k` is red when `t + k` is even, so blocks
//! alternate the starting color and both colors end chains infinitely often.

use std::sync::Arc;

use serde::Serialize;

use super::{BlockIndex, BlockKind, WitnessError};
use crate::partitions::{
    classify_partition, conjugator, stabilizer_membership, BlockOracle, ClassTag, Count, Partition, PartitionError,
    Profile,
};
use crate::perm::{Permutation, Point};
use crate::Tri;

const HORIZON: Point = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainColor {
    Red,
    Green,
}

impl ChainColor {
    fn of_edge(ordinal: usize, t: usize) -> ChainColor {
        if (ordinal + t) % 2 == 0 {
            ChainColor::Red
        } else {
            ChainColor::Green
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ChainColor::Red => "red",
            ChainColor::Green => "green",
        }
    }
}

struct ChainMatching {
    a: Partition,
    index: Arc<BlockIndex>,
    color: ChainColor,
}

impl ChainMatching {
    /// The chain of `x`'s block, its ordinal, and the position of `x`.
    fn locate(&self, x: Point) -> Result<Option<(Vec<Point>, usize, usize)>, PartitionError> {
        let members = self.a.block(x)?;
        if members.len() == 1 {
            return Ok(None);
        }
        let k = self.index.ordinal(members[0])?.expect("non-singleton block");
        let p = members.iter().position(|&y| y == x).unwrap();
        Ok(Some((members, k, p)))
    }

    fn partner(&self, x: Point) -> Result<Option<Point>, PartitionError> {
        let Some((chain, k, p)) = self.locate(x)? else {
            return Ok(None);
        };
        if p + 1 < chain.len() && ChainColor::of_edge(k, p) == self.color {
            return Ok(Some(chain[p + 1]));
        }
        if p > 0 && ChainColor::of_edge(k, p - 1) == self.color {
            return Ok(Some(chain[p - 1]));
        }
        Ok(None)
    }
}

impl BlockOracle for ChainMatching {
    fn block_of(&self, x: Point) -> Point {
        match self.partner(x) {
            Ok(Some(y)) => x.min(y),
            _ => x,
        }
    }

    fn block_members(&self, id: Point) -> Result<Vec<Point>, PartitionError> {
        Ok(match self.partner(id)? {
            Some(y) => vec![id.min(y), id.max(y)],
            None => vec![id],
        })
    }
}

/// The matching formed by the edges of one color.
pub fn chain_partition(a: &Partition, color: ChainColor) -> Partition {
    chain_partition_with(a, color, Arc::new(BlockIndex::new(a, BlockKind::NonSingleton, HORIZON)))
}

fn chain_partition_with(a: &Partition, color: ChainColor, index: Arc<BlockIndex>) -> Partition {
    Partition::new(
        &format!("partition:chain-{}({})", color.label(), a.name()),
        Arc::new(ChainMatching {
            a: a.clone(),
            index,
            color,
        }),
        Profile::BoundedBy {
            bound: 2,
            nonsingletons: Count::Infinite,
        },
    )
}

/// `f` carries the blocks of `A₀` onto the red edges and `g` onto the green
/// edges, so `f⁻¹S_(A₀)f` and `g⁻¹S_(A₀)g` are the stabilizers of the two matchings.
#[derive(Clone)]
pub struct QWitness {
    pub a: Partition,
    pub a0: Partition,
    pub red: Partition,
    pub green: Partition,
    pub f: Permutation,
    pub g: Permutation,
    /// Block-size bound of `A`.
    pub bound: usize,
    index: Arc<BlockIndex>,
}

/// One adjacent transposition of a chain.
#[derive(Debug, Clone)]
pub struct QFactor {
    pub perm: Permutation,
    pub color: ChainColor,
    /// The conjugate back into `S_(A₀)` passed the membership check.
    pub certified: bool,
}

pub fn q_equiv_witness(a: &Partition, depth: usize) -> Result<QWitness, WitnessError> {
    let tag = classify_partition(a)?;
    if tag.tag != ClassTag::InQ {
        return Err(WitnessError::Precondition(format!(
            "{} is not tagged as bounded with infinitely many non-singleton blocks",
            a.name()
        )));
    }
    let bound = a.size_bound().expect("bounded profile");
    let a0 = Partition::canonical_a0();
    let index = Arc::new(BlockIndex::new(a, BlockKind::NonSingleton, HORIZON));
    let red = chain_partition_with(a, ChainColor::Red, index.clone());
    let green = chain_partition_with(a, ChainColor::Green, index.clone());
    let f = conjugator(&a0, &red, depth)?;
    let g = conjugator(&a0, &green, depth)?;
    Ok(QWitness {
        a: a.clone(),
        a0,
        red,
        green,
        f,
        g,
        bound,
        index,
    })
}

impl QWitness {
    /// Writes `h ∈ S_(A)` as a word of chain transpositions, block by block,
    /// using bubble sort on the chain positions. Blocks meeting `[0, window)`
    /// are covered, and all of `h` when its support is finite.
    pub fn factorize(&self, h: &Permutation, window: usize) -> Result<Vec<QFactor>, WitnessError> {
        let finite = h.support_bound().is_some();
        if !finite && !h.has_block_certificate(self.a.name()) {
            return Err(WitnessError::NoCertificate(format!(
                "{} has neither finite support nor a block certificate for {}",
                h.to_text(),
                self.a.name()
            )));
        }
        let membership = stabilizer_membership(h, &self.a, window)?;
        if membership.answer != Tri::Yes {
            return Err(WitnessError::NoCertificate(membership.reason));
        }
        let points: Vec<Point> = if finite {
            h.support()?.into_iter().collect()
        } else {
            (0..window).collect()
        };
        let mut blocks: Vec<Point> = points.iter().map(|&x| self.a.block_of(x)).collect();
        blocks.sort_unstable();
        blocks.dedup();

        let mut word = Vec::new();
        for id in blocks {
            let chain = self.a.block_members(id)?;
            let mut pos: Vec<usize> = chain
                .iter()
                .map(|&x| Ok(chain.binary_search(&h.apply(x)?).expect("h preserves the block")))
                .collect::<Result<_, WitnessError>>()?;
            if chain.len() == 1 {
                continue;
            }
            let k = self.index.ordinal(id)?.expect("non-singleton block");
            while let Some(t) = (0..chain.len() - 1).find(|&t| pos[t] > pos[t + 1]) {
                pos.swap(t, t + 1);
                let color = ChainColor::of_edge(k, t);
                let perm = Permutation::transposition(chain[t], chain[t + 1]);
                let certified = self.certify(&perm, color)?;
                word.push(QFactor { perm, color, certified });
            }
        }
        Ok(word)
    }

    fn certify(&self, t: &Permutation, color: ChainColor) -> Result<bool, WitnessError> {
        let u = match color {
            ChainColor::Red => &self.f,
            ChainColor::Green => &self.g,
        };
        let back = t.conjugate_by(&u.inverse())?;
        Ok(stabilizer_membership(&back, &self.a0, 0)?.answer == Tri::Yes)
    }
}

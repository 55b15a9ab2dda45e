//! Greedy size-matched conjugators between partitions.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use super::{Partition, PartitionError};
use crate::perm::{PermError, Permutation, Point, Rule};

/// Default number of points scanned ahead when looking for a matching block.
pub const DEFAULT_HORIZON: Point = 1 << 16;

struct State {
    /// Next point at which to look for an A-block start.
    a_next: Point,
    /// Next point of B not yet scanned for block starts.
    b_next: Point,
    /// Unused B-blocks by size, in increasing id order.
    free: HashMap<usize, VecDeque<Point>>,
    fwd: HashMap<Point, Point>,
    bwd: HashMap<Point, Point>,
}

struct Matcher {
    a: Partition,
    b: Partition,
    horizon: Point,
    state: Mutex<State>,
}

impl Matcher {
    /// Assigns the next A-block to the least unused B-block of the same size.
    fn step(&self, st: &mut State) -> Result<(), PermError> {
        let fail = |msg: String| PermError::Undefined {
            rule: format!("conjugator({}, {}): {msg}", self.a.name(), self.b.name()),
            point: st.a_next,
        };
        let mut id = st.a_next;
        while self.a.block_of(id) != id {
            id += 1;
        }
        let members = self.a.block_members(id).map_err(|e| fail(e.to_string()))?;
        let size = members.len();
        let limit = st.b_next + self.horizon;
        loop {
            if let Some(bid) = st.free.get_mut(&size).and_then(|q| q.pop_front()) {
                let targets = self.b.block_members(bid).map_err(|e| fail(e.to_string()))?;
                for (x, y) in members.iter().zip(targets) {
                    st.fwd.insert(*x, y);
                    st.bwd.insert(y, *x);
                }
                st.a_next = id + 1;
                return Ok(());
            }
            if st.b_next >= limit {
                return Err(fail(format!("no block of size {size} within the horizon")));
            }
            let x = st.b_next;
            st.b_next += 1;
            if self.b.block_of(x) == x {
                let n = self.b.block_members(x).map_err(|e| fail(e.to_string()))?.len();
                st.free.entry(n).or_default().push_back(x);
            }
        }
    }

    fn forward(&self, x: Point) -> Result<Point, PermError> {
        let mut st = self.state.lock().unwrap();
        while !st.fwd.contains_key(&x) {
            self.step(&mut st)?;
        }
        Ok(st.fwd[&x])
    }

    fn backward(&self, y: Point) -> Result<Point, PermError> {
        let mut st = self.state.lock().unwrap();
        let mut steps = 0;
        while !st.bwd.contains_key(&y) {
            if steps > self.horizon {
                return Err(PermError::Undefined {
                    rule: format!(
                        "conjugator({}, {}): no A-block reaches this point within the horizon",
                        self.a.name(),
                        self.b.name()
                    ),
                    point: y,
                });
            }
            self.step(&mut st)?;
            steps += 1;
        }
        Ok(st.bwd[&y])
    }
}

struct ConjugatorRule(Arc<Matcher>);

impl Rule for ConjugatorRule {
    fn name(&self) -> String {
        format!("conjugator({},{})", self.0.a.name(), self.0.b.name())
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        self.0.forward(x)
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        self.0.backward(x)
    }
}

/// A permutation `f` with `A f = B`, matching A-blocks in increasing id order
/// to the least unused B-block of the same size.
///
/// The first `depth` blocks of A and of B are matched eagerly; a block that
/// finds no partner within the scan horizon yields `NotIsomorphicAtDepth`.
pub fn conjugator(a: &Partition, b: &Partition, depth: usize) -> Result<Permutation, PartitionError> {
    conjugator_with_horizon(a, b, depth, DEFAULT_HORIZON)
}

pub fn conjugator_with_horizon(
    a: &Partition,
    b: &Partition,
    depth: usize,
    horizon: Point,
) -> Result<Permutation, PartitionError> {
    let m = Arc::new(Matcher {
        a: a.clone(),
        b: b.clone(),
        horizon,
        state: Mutex::new(State {
            a_next: 0,
            b_next: 0,
            free: HashMap::new(),
            fwd: HashMap::new(),
            bwd: HashMap::new(),
        }),
    });
    let mismatch = |reason: String| PartitionError::NotIsomorphicAtDepth { depth, reason };
    let mut a_id = 0;
    let mut b_id = 0;
    for _ in 0..depth {
        while a.block_of(a_id) != a_id {
            a_id += 1;
        }
        while b.block_of(b_id) != b_id {
            b_id += 1;
        }
        m.forward(a_id).map_err(|e| {
            mismatch(format!(
                "A-block {a_id} of size {}: {e}",
                a.block_members(a_id).map_or(0, |v| v.len())
            ))
        })?;
        m.backward(b_id).map_err(|e| {
            mismatch(format!(
                "B-block {b_id} of size {}: {e}",
                b.block_members(b_id).map_or(0, |v| v.len())
            ))
        })?;
        a_id += 1;
        b_id += 1;
    }
    Ok(Permutation::from_rule(Arc::new(ConjugatorRule(m))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::stabilizer_membership;
    use crate::Tri;

    /// `Σf` is exactly a block of `B` for each of the first `n` blocks of `A`.
    fn carries_blocks(f: &Permutation, a: &Partition, b: &Partition, n: usize) -> bool {
        a.block_ids_in(0, 100_000).into_iter().take(n).all(|id| {
            let mut img: Vec<Point> = a
                .block_members(id)
                .unwrap()
                .iter()
                .map(|&x| f.apply(x).unwrap())
                .collect();
            img.sort();
            b.block(img[0]).unwrap() == img
        })
    }

    #[test]
    fn same_partition_maps_blocks_to_themselves() {
        let a = Partition::intervals_growing();
        let f = conjugator(&a, &a, 20).unwrap();
        assert!(f.agrees_on(&Permutation::identity(), 500).unwrap());
    }

    #[test]
    fn pairs_against_a0_mismatch() {
        let err = conjugator_with_horizon(&Partition::pairs(), &Partition::canonical_a0(), 4, 2000)
            .unwrap_err();
        match err {
            PartitionError::NotIsomorphicAtDepth { reason, .. } => {
                assert!(reason.contains("B-block 2 of size 1"), "{reason}")
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn shuffled_intervals_are_conjugate() {
        let a = Partition::intervals_growing();
        let b = Partition::intervals_shuffled();
        let f = conjugator(&a, &b, 30).unwrap();
        assert!(f.verify_window(1000).passed);
        assert!(carries_blocks(&f, &a, &b, 30));
        // Conjugating a generator of S_(A) lands in S_(B).
        for id in a.block_ids_in(0, 200) {
            let m = a.block_members(id).unwrap();
            if m.len() < 2 {
                continue;
            }
            let t = Permutation::transposition(m[0], m[m.len() - 1]);
            let c = t.conjugate_by(&f).unwrap();
            assert_eq!(stabilizer_membership(&c, &b, 0).unwrap().answer, Tri::Yes);
        }
    }

    #[test]
    fn a0_against_relabelled_a0() {
        // Pairs {4k+2, 4k+3} and singletons {4k}, {4k+1}.
        let b = Partition::explicit(
            "partition:explicit@shifted",
            (0..300).map(|k| vec![4 * k + 2, 4 * k + 3]).collect(),
            Some(crate::partitions::Profile::BoundedBy {
                bound: 2,
                nonsingletons: crate::partitions::Count::Infinite,
            }),
        )
        .unwrap();
        let a = Partition::canonical_a0();
        let f = conjugator(&a, &b, 40).unwrap();
        assert!(carries_blocks(&f, &a, &b, 40));
    }
}

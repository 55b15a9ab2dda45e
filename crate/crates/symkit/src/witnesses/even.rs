//! The shift `α_i ↦ α_{i+2}` on marked points of a partition with infinitely
//! many singletons and all other blocks of size at least 4, and the
//! decomposition of `(ℤ/2ℤ)^ω` it relies on.
//!
//! `α_{4i}, …, α_{4i+3}` are the four least points of the `i`-th non-singleton
//! block. `α_{-k}` is the singleton of ordinal `2k - 2`, so singletons of odd
//! ordinal stay unmarked.

use std::sync::Arc;

use super::{BlockIndex, BlockKind, WitnessError};
use crate::partitions::{classify_partition, ClassTag, Partition, PartitionError};
use crate::perm::{PermError, Permutation, Point, Rule};

const HORIZON: Point = 1 << 20;

/// Blocks checked against the required shape.
const SHAPE_PROBE: Point = 2048;

struct Marking {
    a: Partition,
    big: BlockIndex,
    singles: BlockIndex,
}

impl Marking {
    fn alpha(&self, i: i64) -> Result<Point, PartitionError> {
        if i >= 0 {
            let id = self.big.nth((i / 4) as usize)?;
            Ok(self.a.block_members(id)?[(i % 4) as usize])
        } else {
            self.singles.nth((2 * (-i) - 2) as usize)
        }
    }

    fn index_of(&self, x: Point) -> Result<Option<i64>, PartitionError> {
        let id = self.a.block_of(x);
        let members = self.a.block_members(id)?;
        if members.len() == 1 {
            let s = self.singles.ordinal(id)?.expect("singleton block");
            return Ok((s % 2 == 0).then(|| -((s / 2) as i64) - 1));
        }
        let o = self.big.ordinal(id)?.expect("non-singleton block");
        let p = members.iter().position(|&y| y == x).unwrap();
        Ok((p < 4).then_some(4 * o as i64 + p as i64))
    }
}

struct ShiftRule(Arc<Marking>);

impl ShiftRule {
    fn step(&self, x: Point, by: i64) -> Result<Point, PermError> {
        let fail = |e: PartitionError| PermError::Undefined {
            rule: format!("even-shift: {e}"),
            point: x,
        };
        match self.0.index_of(x).map_err(fail)? {
            Some(i) => self.0.alpha(i + by).map_err(fail),
            None => Ok(x),
        }
    }
}

impl Rule for ShiftRule {
    fn name(&self) -> String {
        format!("even-shift({})", self.0.a.name())
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        self.step(x, 2)
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        self.step(x, -2)
    }
}

/// The shift `f` with `α_i f = α_{i+2}`, identity off the marked points.
#[derive(Clone)]
pub struct EvenShift {
    pub f: Permutation,
    marking: Arc<Marking>,
}

impl EvenShift {
    pub fn alpha(&self, i: i64) -> Result<Point, WitnessError> {
        Ok(self.marking.alpha(i)?)
    }

    /// The index `i` with `α_i = x`, if `x` is marked.
    pub fn index_of(&self, x: Point) -> Result<Option<i64>, WitnessError> {
        Ok(self.marking.index_of(x)?)
    }

    /// The element of `S_(B) ≅ (ℤ/2ℤ)^ω` swapping `α_{2j}, α_{2j+1}` for each set bit `j`.
    pub fn z2_element(&self, bits: &[bool]) -> Result<Permutation, WitnessError> {
        let mut cycles = Vec::new();
        for (j, &b) in bits.iter().enumerate() {
            if b {
                cycles.push(vec![self.alpha(2 * j as i64)?, self.alpha(2 * j as i64 + 1)?]);
            }
        }
        Ok(Permutation::from_cycles(&cycles)?)
    }

    /// The first `n` coordinates of an element of `S_(B)`.
    pub fn z2_coordinates(&self, p: &Permutation, n: usize) -> Result<Vec<bool>, WitnessError> {
        (0..n)
            .map(|j| {
                let (x, y) = (self.alpha(2 * j as i64)?, self.alpha(2 * j as i64 + 1)?);
                Ok(p.apply(x)? == y)
            })
            .collect()
    }
}

/// Builds the shift after checking that `A` is in 𝒫 with the required shape
/// on its first blocks.
pub fn even_shift_witness(a: &Partition) -> Result<EvenShift, WitnessError> {
    let tag = classify_partition(a)?;
    if tag.tag != ClassTag::InP {
        return Err(WitnessError::Precondition(format!("{} is not tagged as unbounded finite", a.name())));
    }
    let mut singles = 0;
    for id in a.block_ids_in(0, SHAPE_PROBE) {
        let n = a.block_members(id)?.len();
        match n {
            1 => singles += 1,
            2..=3 => {
                return Err(WitnessError::Precondition(format!(
                    "block {id} of {} has {n} points; non-singleton blocks need at least 4",
                    a.name()
                )))
            }
            _ => {}
        }
    }
    if singles < 16 {
        return Err(WitnessError::Precondition(format!(
            "only {singles} singletons below {SHAPE_PROBE} in {}",
            a.name()
        )));
    }
    let marking = Arc::new(Marking {
        a: a.clone(),
        big: BlockIndex::new(a, BlockKind::NonSingleton, HORIZON),
        singles: BlockIndex::new(a, BlockKind::Singleton, HORIZON),
    });
    Ok(EvenShift {
        f: Permutation::from_rule(Arc::new(ShiftRule(marking.clone()))),
        marking,
    })
}

/// Writes `a = x ⊕ y` with `x_{2i} = x_{2i+1}`, `y_0 = 0` and `y_{2i+1} = y_{2i+2}`.
/// Every coordinate is forced from left to right.
pub fn decompose_z2(a: &[bool]) -> Result<(Vec<bool>, Vec<bool>), WitnessError> {
    if a.len() % 2 == 1 {
        return Err(WitnessError::Precondition(format!("prefix length {} is odd", a.len())));
    }
    let mut x = vec![false; a.len()];
    let mut y = vec![false; a.len()];
    for i in 0..a.len() {
        if i % 2 == 0 {
            y[i] = if i == 0 { false } else { y[i - 1] };
            x[i] = a[i] ^ y[i];
        } else {
            x[i] = x[i - 1];
            y[i] = a[i] ^ x[i];
        }
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn witness() -> EvenShift {
        even_shift_witness(&Partition::growing_with_singletons()).unwrap()
    }

    fn valid(a: &[bool], x: &[bool], y: &[bool]) -> bool {
        let n = a.len();
        (0..n).all(|i| x[i] ^ y[i] == a[i])
            && (0..n / 2).all(|i| x[2 * i] == x[2 * i + 1])
            && (n == 0 || !y[0])
            && (0..n / 2).all(|i| 2 * i + 2 >= n || y[2 * i + 1] == y[2 * i + 2])
    }

    #[test]
    fn marked_points_shift_by_two() {
        let w = witness();
        assert!(w.f.verify_window(500).passed);
        for i in -8..=8 {
            assert_eq!(w.f.apply(w.alpha(i).unwrap()).unwrap(), w.alpha(i + 2).unwrap());
        }
        // Sizes 1, 4, 1, 5, …: block {1,2,3,4} carries α_0..α_3.
        assert_eq!(w.alpha(0).unwrap(), 1);
        assert_eq!(w.alpha(3).unwrap(), 4);
        assert_eq!(w.alpha(-1).unwrap(), 0);
    }

    #[test]
    fn unmarked_points_are_fixed() {
        let w = witness();
        let a = Partition::growing_with_singletons();
        let mut unmarked_singletons = 0;
        for x in 0..300 {
            if w.index_of(x).unwrap().is_none() {
                assert_eq!(w.f.apply(x).unwrap(), x);
                if a.block(x).unwrap().len() == 1 {
                    unmarked_singletons += 1;
                }
            }
        }
        assert!(unmarked_singletons > 5);
    }

    #[test]
    fn conjugation_shifts_coordinates() {
        let w = witness();
        let bits = [true, false, true, true, false, true];
        let p = w.z2_element(&bits).unwrap();
        let c = Permutation::word(vec![w.f.inverse(), p, w.f.clone()]);
        let coords = w.z2_coordinates(&c, 7).unwrap();
        assert_eq!(coords, vec![false, true, false, true, true, false, true]);
    }

    #[test]
    fn shape_is_checked() {
        assert!(even_shift_witness(&Partition::intervals_growing()).is_err());
        assert!(even_shift_witness(&Partition::pairs()).is_err());
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(decompose_z2(&[false; 6]).unwrap(), (vec![false; 6], vec![false; 6]));
        assert_eq!(decompose_z2(&[true, false]).unwrap(), (vec![true, true], vec![false, true]));
        assert!(decompose_z2(&[true]).is_err());
    }

    #[test]
    fn decomposition_is_unique_on_short_prefixes() {
        for n in (0..=8).step_by(2) {
            for code in 0u32..1 << n {
                let a: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
                let mut found = Vec::new();
                for xc in 0u32..1 << n {
                    let x: Vec<bool> = (0..n).map(|i| xc >> i & 1 == 1).collect();
                    let y: Vec<bool> = (0..n).map(|i| x[i] ^ a[i]).collect();
                    if valid(&a, &x, &y) {
                        found.push((x, y));
                    }
                }
                assert_eq!(found.len(), 1);
                assert_eq!(decompose_z2(&a).unwrap(), found[0]);
            }
        }
    }

    proptest! {
        #[test]
        fn decomposition_constraints(a in prop::collection::vec(any::<bool>(), 6)) {
            let a: Vec<bool> = a.iter().chain(a.iter()).copied().collect();
            let (x, y) = decompose_z2(&a).unwrap();
            prop_assert!(valid(&a, &x, &y));
        }
    }
}

use serde::Serialize;

use super::{BlockSample, Count, Partition, PartitionError, Profile};
use crate::perm::{Permutation, Point};
use crate::Tri;

/// Points probed when checking a declared profile.
pub const PROBE_HORIZON: Point = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassTag {
    /// Finite blocks without a common size bound.
    InP,
    /// Bounded blocks, infinitely many of size > 1.
    InQ,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionClassTag {
    pub tag: ClassTag,
    pub reason: String,
    pub samples: Vec<BlockSample>,
}

/// Tags a partition from its declared profile after checking that profile on
/// the blocks with ids below `horizon`.
pub fn classify_partition(a: &Partition) -> Result<PartitionClassTag, PartitionError> {
    classify_partition_within(a, PROBE_HORIZON)
}

pub fn classify_partition_within(
    a: &Partition,
    horizon: Point,
) -> Result<PartitionClassTag, PartitionError> {
    let samples = a.certificate_samples(horizon);
    let violation = |block, reason: String| PartitionError::ProfileViolation { block, reason };
    let (tag, reason) = match a.profile() {
        Profile::BoundedBy {
            bound,
            nonsingletons,
        } => {
            let mut big = 0;
            for s in &samples {
                match s.size {
                    None => return Err(violation(s.block, "declared bounded but infinite".into())),
                    Some(n) if n > bound => {
                        return Err(violation(s.block, format!("size {n} exceeds bound {bound}")))
                    }
                    Some(n) if n > 1 => big += 1,
                    _ => {}
                }
            }
            if let Count::Finite(k) = nonsingletons {
                if big > k {
                    let b = samples.iter().filter(|s| s.size > Some(1)).nth(k).unwrap();
                    return Err(violation(
                        b.block,
                        format!("more than {k} blocks of size > 1"),
                    ));
                }
            }
            match nonsingletons {
                Count::Infinite if bound >= 2 => (
                    ClassTag::InQ,
                    format!(
                        "sizes bounded by {bound}, infinitely many non-singletons declared; {big} seen below {horizon}"
                    ),
                ),
                _ => (
                    ClassTag::Neither,
                    format!("sizes bounded by {bound} with finitely many non-singletons"),
                ),
            }
        }
        Profile::UnboundedFinite => {
            if let Some(s) = samples.iter().find(|s| s.size.is_none()) {
                return Err(violation(s.block, "declared finite but infinite".into()));
            }
            let half = samples.len() / 2;
            let max = |xs: &[BlockSample]| xs.iter().filter_map(|s| s.size).max().unwrap_or(0);
            let (early, late) = (max(&samples[..half]), max(&samples[half..]));
            if late <= early {
                let b = samples.last().map_or(0, |s| s.block);
                return Err(violation(
                    b,
                    format!("no growth in block sizes below {horizon} (max {early} then {late})"),
                ));
            }
            (
                ClassTag::InP,
                format!("finite blocks with unbounded sizes declared; sizes grow from {early} to {late} below {horizon}"),
            )
        }
        Profile::HasInfiniteBlock { block } => {
            match a.block_members(block) {
                Err(PartitionError::InfiniteBlock(_)) => {}
                _ => return Err(violation(block, "declared infinite but finite".into())),
            }
            (ClassTag::Neither, format!("block {block} is infinite"))
        }
    };
    Ok(PartitionClassTag {
        tag,
        reason,
        samples,
    })
}

/// Answer to "does `f` preserve every block of `A`?".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub answer: Tri,
    /// A block that is not mapped into itself.
    pub witness_block: Option<Point>,
    pub reason: String,
}

pub fn stabilizer_membership(
    f: &Permutation,
    a: &Partition,
    window: usize,
) -> Result<Membership, PartitionError> {
    let check = |xs: &mut dyn Iterator<Item = Point>| -> Result<Option<Point>, PartitionError> {
        for x in xs {
            if a.block_of(f.apply(x)?) != a.block_of(x) {
                return Ok(Some(a.block_of(x)));
            }
        }
        Ok(None)
    };
    let no = |b: Point| Membership {
        answer: Tri::No,
        witness_block: Some(b),
        reason: format!("block {b} is not mapped into itself"),
    };
    if f.support_bound().is_some() {
        let support = f.support()?;
        return Ok(match check(&mut support.iter().copied())? {
            Some(b) => no(b),
            None => Membership {
                answer: Tri::Yes,
                witness_block: None,
                reason: format!("all {} moved points stay in their blocks", support.len()),
            },
        });
    }
    if let Some(b) = check(&mut (0..window))? {
        return Ok(no(b));
    }
    if f.has_block_certificate(a.name()) {
        return Ok(Membership {
            answer: Tri::Yes,
            witness_block: None,
            reason: format!("carries a block certificate for {}", a.name()),
        });
    }
    Ok(Membership {
        answer: Tri::Unknown,
        witness_block: None,
        reason: format!("no violation below {window} and no certificate"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::parse_perm;

    #[test]
    fn tags() {
        assert_eq!(classify_partition(&Partition::canonical_a0()).unwrap().tag, ClassTag::InQ);
        assert_eq!(classify_partition(&Partition::pairs()).unwrap().tag, ClassTag::InQ);
        assert_eq!(
            classify_partition(&Partition::intervals_growing()).unwrap().tag,
            ClassTag::InP
        );
        assert_eq!(classify_partition(&Partition::singletons()).unwrap().tag, ClassTag::Neither);
        assert_eq!(classify_partition(&Partition::parity()).unwrap().tag, ClassTag::Neither);
    }

    #[test]
    fn lying_profiles_are_caught() {
        let liar = Partition::intervals(
            "partition:liar",
            |k| if k == 30 { 3 } else { 2 },
            Profile::BoundedBy {
                bound: 2,
                nonsingletons: Count::Infinite,
            },
        );
        assert_eq!(
            classify_partition(&liar).unwrap_err(),
            PartitionError::ProfileViolation {
                block: 60,
                reason: "size 3 exceeds bound 2".into()
            }
        );
        let flat = Partition::intervals("partition:flat", |_| 3, Profile::UnboundedFinite);
        assert!(classify_partition(&flat).is_err());
    }

    #[test]
    fn agrees_with_brute_force_scan() {
        for p in [
            Partition::pairs(),
            Partition::canonical_a0(),
            Partition::intervals_growing(),
            Partition::uniform(3),
            Partition::singletons(),
        ] {
            // Independent scan: count sizes point by point.
            let mut sizes = std::collections::BTreeMap::new();
            for x in 0..PROBE_HORIZON {
                *sizes.entry(p.block_of(x)).or_insert(0usize) += 1;
            }
            let last = *sizes.keys().next_back().unwrap();
            sizes.remove(&last);
            let max = *sizes.values().max().unwrap();
            let nonsingle = sizes.values().filter(|&&s| s > 1).count();
            let firsthalf: Vec<usize> = sizes.values().take(sizes.len() / 2).copied().collect();
            let grows = max > firsthalf.iter().copied().max().unwrap_or(0);
            let expected = if grows {
                ClassTag::InP
            } else if max >= 2 && nonsingle > 100 {
                ClassTag::InQ
            } else {
                ClassTag::Neither
            };
            assert_eq!(classify_partition(&p).unwrap().tag, expected, "{}", p.name());
        }
    }

    #[test]
    fn membership_examples() {
        let a0 = Partition::canonical_a0();
        let yes = stabilizer_membership(&Permutation::identity(), &a0, 100).unwrap();
        assert_eq!(yes.answer, Tri::Yes);
        let no = stabilizer_membership(&parse_perm("cycles:(0 2)").unwrap(), &a0, 100).unwrap();
        assert_eq!(no.answer, Tri::No);
        assert_eq!(no.witness_block, Some(0));
        let yes = stabilizer_membership(&parse_perm("cycles:(0 1)").unwrap(), &a0, 100).unwrap();
        assert_eq!(yes.answer, Tri::Yes);
        let pairs = Partition::pairs();
        let sw = parse_perm("rule:swap-pairs").unwrap();
        assert_eq!(stabilizer_membership(&sw, &pairs, 100).unwrap().answer, Tri::Yes);
        assert_eq!(stabilizer_membership(&sw, &a0, 100).unwrap().answer, Tri::No);
        let rot = parse_perm("rule:block-rotate;size=2;shift=1").unwrap();
        assert_eq!(stabilizer_membership(&rot, &pairs, 100).unwrap().answer, Tri::Unknown);
    }
}

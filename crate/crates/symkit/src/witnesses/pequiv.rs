//! The pair `(f, g)` with every `B`-block inside `Δf` or `Δg` for an `A`-block `Δ`.
//!
//! `B₁` is the set of `B`-blocks of even ordinal and `B₂` those of odd ordinal.
//! `f` is built one round at a time: round `k` maps the least unused `A`-block
//! with at least `|Σ|` points onto the `k`-th block `Σ` of `B₁` (first points
//! to first points) and sends the rest of that `A`-block, every smaller
//! `A`-block skipped on the way, and at least one further point, to the least
//! points of `∪B₂` not yet in the range. `g` is the same with `B₁` and `B₂`
//! exchanged.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::{BlockIndex, BlockKind, WitnessError};
use crate::partitions::{stabilizer_membership, Partition, PartitionError};
use crate::perm::{PermError, Permutation, Point, Rule};
use crate::Tri;

/// Points scanned for blocks before a profile is declared violated.
const HORIZON: Point = 1 << 20;

/// Points of too-small blocks skipped in one round before giving up.
const SKIP_LIMIT: usize = 1 << 16;

/// `B`-block `b_block` (with the given ordinal) lies inside `Δf` for the `A`-block `a_block`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PackEntry {
    pub b_block: Point,
    pub ordinal: usize,
    pub a_block: Point,
}

struct PackState {
    a_next: Point,
    sink_next: Point,
    round: usize,
    fwd: HashMap<Point, Point>,
    bwd: HashMap<Point, Point>,
    packing: Vec<PackEntry>,
}

struct Packer {
    a: Partition,
    b: Partition,
    /// 0 packs the even-ordinal blocks of `B`, 1 the odd ones.
    half: usize,
    b_index: Arc<BlockIndex>,
    state: Mutex<PackState>,
}

impl Packer {
    fn next_a_block(&self, st: &mut PackState) -> Result<Vec<Point>, PartitionError> {
        let start = st.a_next;
        loop {
            if st.a_next >= start + HORIZON {
                return Err(PartitionError::ProfileViolation {
                    block: start,
                    reason: format!("no block of {} starts within {HORIZON} points", self.a.name()),
                });
            }
            let x = st.a_next;
            st.a_next += 1;
            if self.a.block_of(x) == x {
                return self.a.block_members(x);
            }
        }
    }

    fn next_sink_point(&self, st: &mut PackState) -> Result<Point, PartitionError> {
        loop {
            let y = st.sink_next;
            st.sink_next += 1;
            let ord = self.b_index.ordinal(self.b.block_of(y))?.expect("every block is counted");
            if ord % 2 != self.half {
                return Ok(y);
            }
        }
    }

    fn round(&self, st: &mut PackState) -> Result<(), PartitionError> {
        let ordinal = 2 * st.round + self.half;
        let target_id = self.b_index.nth(ordinal)?;
        let target = self.b.block_members(target_id)?;
        let need = target.len();
        let mut rest = Vec::new();
        let chosen = loop {
            let m = self.next_a_block(st)?;
            if m.len() >= need {
                break m;
            }
            if rest.len() > SKIP_LIMIT {
                return Err(PartitionError::ProfileViolation {
                    block: m[0],
                    reason: format!("no block of {} has {need} points", self.a.name()),
                });
            }
            rest.extend(m);
        };
        for (&x, &y) in chosen.iter().zip(&target) {
            st.fwd.insert(x, y);
            st.bwd.insert(y, x);
        }
        rest.extend_from_slice(&chosen[need..]);
        if rest.is_empty() {
            rest = self.next_a_block(st)?;
        }
        rest.sort_unstable();
        for x in rest {
            let y = self.next_sink_point(st)?;
            st.fwd.insert(x, y);
            st.bwd.insert(y, x);
        }
        st.packing.push(PackEntry {
            b_block: target_id,
            ordinal,
            a_block: chosen[0],
        });
        st.round += 1;
        Ok(())
    }

    fn fail(&self, e: PartitionError, point: Point) -> PermError {
        PermError::Undefined {
            rule: format!("{}: {e}", self.label()),
            point,
        }
    }

    fn label(&self) -> String {
        format!("p-witness({},{};{})", self.a.name(), self.b.name(), self.half)
    }

    fn forward(&self, x: Point) -> Result<Point, PermError> {
        let mut st = self.state.lock().unwrap();
        while !st.fwd.contains_key(&x) {
            self.round(&mut st).map_err(|e| self.fail(e, x))?;
        }
        Ok(st.fwd[&x])
    }

    fn backward(&self, y: Point) -> Result<Point, PermError> {
        let mut st = self.state.lock().unwrap();
        while !st.bwd.contains_key(&y) {
            self.round(&mut st).map_err(|e| self.fail(e, y))?;
        }
        Ok(st.bwd[&y])
    }
}

struct PackRule(Arc<Packer>);

impl Rule for PackRule {
    fn name(&self) -> String {
        self.0.label()
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        self.0.forward(x)
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        self.0.backward(x)
    }
}

#[derive(Clone)]
pub struct PWitness {
    pub a: Partition,
    pub b: Partition,
    pub f: Permutation,
    pub g: Permutation,
    /// Blocks of `B₁` packed by `f`, in round order.
    pub packing_f: Vec<PackEntry>,
    /// Blocks of `B₂` packed by `g`, in round order.
    pub packing_g: Vec<PackEntry>,
    b_index: Arc<BlockIndex>,
}

impl PWitness {
    /// 0 for blocks of `B₁`, 1 for blocks of `B₂`.
    pub fn half_of(&self, x: Point) -> Result<usize, PartitionError> {
        Ok(self.b_index.ordinal(self.b.block_of(x))?.expect("every block is counted") % 2)
    }
}

/// Builds `f` and `g`, packing the first `depth` blocks of each half eagerly.
pub fn p_equiv_witness(a: &Partition, b: &Partition, depth: usize) -> Result<PWitness, WitnessError> {
    let b_index = Arc::new(BlockIndex::new(b, BlockKind::All, HORIZON));
    let packer = |half| {
        Arc::new(Packer {
            a: a.clone(),
            b: b.clone(),
            half,
            b_index: b_index.clone(),
            state: Mutex::new(PackState {
                a_next: 0,
                sink_next: 0,
                round: 0,
                fwd: HashMap::new(),
                bwd: HashMap::new(),
                packing: Vec::new(),
            }),
        })
    };
    let (pf, pg) = (packer(0), packer(1));
    let mut packings = Vec::new();
    for p in [&pf, &pg] {
        let mut st = p.state.lock().unwrap();
        while st.round < depth {
            p.round(&mut st)?;
        }
        packings.push(st.packing[..depth].to_vec());
    }
    let packing_g = packings.pop().unwrap();
    let packing_f = packings.pop().unwrap();
    Ok(PWitness {
        a: a.clone(),
        b: b.clone(),
        f: Permutation::from_rule(Arc::new(PackRule(pf))),
        g: Permutation::from_rule(Arc::new(PackRule(pg))),
        packing_f,
        packing_g,
        b_index,
    })
}

/// Checks that each packed `B`-block pulls back into a single `A`-block.
pub fn verify_packing(w: &PWitness) -> Result<bool, WitnessError> {
    for (perm, packing) in [(&w.f, &w.packing_f), (&w.g, &w.packing_g)] {
        for e in packing {
            for y in w.b.block_members(e.b_block)? {
                if w.a.block_of(perm.apply_inv(y)?) != e.a_block {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `h = p·q` with `p` moving only points of `∪B₁` and `q` only points of `∪B₂`.
#[derive(Debug, Clone)]
pub struct PFactorization {
    pub p: Permutation,
    pub q: Permutation,
    /// Whether `f p f⁻¹ ∈ S_(A)`.
    pub p_certified: Tri,
    /// Whether `g q g⁻¹ ∈ S_(A)`.
    pub q_certified: Tri,
}

struct HalfRule {
    h: Permutation,
    w: PWitness,
    half: usize,
}

impl HalfRule {
    fn map(&self, x: Point, inv: bool) -> Result<Point, PermError> {
        let half = self.w.half_of(x).map_err(|e| PermError::Undefined {
            rule: format!("half-factor: {e}"),
            point: x,
        })?;
        if half != self.half {
            return Ok(x);
        }
        if inv {
            self.h.apply_inv(x)
        } else {
            self.h.apply(x)
        }
    }
}

impl Rule for HalfRule {
    fn name(&self) -> String {
        format!("half-factor({};{})", self.h.to_text(), self.half)
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        self.map(x, false)
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        self.map(x, true)
    }
}

/// Splits `h ∈ S_(B)` along `B₁`/`B₂` and checks each part in its conjugate
/// of `S_(A)`. Finite-support parts are certified exactly; others on `window`.
pub fn factor_through(h: &Permutation, w: &PWitness, window: usize) -> Result<PFactorization, WitnessError> {
    let certified = h.has_block_certificate(w.b.name())
        || (h.support_bound().is_some() && stabilizer_membership(h, &w.b, 0)?.answer == Tri::Yes);
    if !certified {
        return Err(WitnessError::NoCertificate(format!(
            "{} is not certified to preserve the blocks of {}",
            h.to_text(),
            w.b.name()
        )));
    }
    let mut parts = Vec::new();
    for half in 0..2 {
        let part = match h.support_bound() {
            Some(_) => {
                let mut cycles = Vec::new();
                for c in h.cycles()? {
                    if w.half_of(c[0])? == half {
                        cycles.push(c);
                    }
                }
                Permutation::from_cycles(&cycles)?
            }
            None => Permutation::from_rule(Arc::new(HalfRule {
                h: h.clone(),
                w: w.clone(),
                half,
            })),
        };
        let conj = if half == 0 { &w.f } else { &w.g };
        let cert = if part.is_explicit_finite() {
            let c = part.conjugate_by(&conj.inverse())?;
            stabilizer_membership(&c, &w.a, window)?.answer
        } else {
            let c = Permutation::word(vec![conj.clone(), part.clone(), conj.inverse()]);
            match stabilizer_membership(&c, &w.a, window)?.answer {
                Tri::No => Tri::No,
                _ => Tri::Unknown,
            }
        };
        parts.push((part, cert));
    }
    let (q, q_certified) = parts.pop().unwrap();
    let (p, p_certified) = parts.pop().unwrap();
    Ok(PFactorization {
        p,
        q,
        p_certified,
        q_certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn growing() -> Partition {
        Partition::intervals_growing()
    }

    /// A random element of `S_(B)` acting on the first `n` blocks.
    pub(crate) fn random_block_perm(b: &Partition, n: usize, rng: &mut ChaCha8Rng) -> Permutation {
        let mut map = std::collections::BTreeMap::new();
        for id in b.block_ids_in(0, 100_000).into_iter().take(n) {
            let m = b.block_members(id).unwrap();
            let mut img = m.clone();
            img.shuffle(rng);
            for (x, y) in m.into_iter().zip(img) {
                if x != y {
                    map.insert(x, y);
                }
            }
        }
        Permutation::from_map(map).unwrap()
    }

    #[test]
    fn packing_covers_first_blocks() {
        let w = p_equiv_witness(&growing(), &growing(), 4).unwrap();
        assert_eq!(w.packing_f.len(), 4);
        assert_eq!(w.packing_f.iter().map(|e| e.ordinal).collect::<Vec<_>>(), vec![0, 2, 4, 6]);
        assert_eq!(w.packing_g.iter().map(|e| e.ordinal).collect::<Vec<_>>(), vec![1, 3, 5, 7]);
        assert!(verify_packing(&w).unwrap());
        // Independent check: Δf contains Σ, enumerating Δf directly.
        for e in &w.packing_f {
            let image: Vec<Point> =
                w.a.block_members(e.a_block).unwrap().iter().map(|&x| w.f.apply(x).unwrap()).collect();
            for y in w.b.block_members(e.b_block).unwrap() {
                assert!(image.contains(&y));
            }
        }
        assert!(w.f.verify_window(1000).passed);
        assert!(w.g.verify_window(1000).passed);
    }

    #[test]
    fn different_partitions() {
        let a = Partition::intervals_shuffled();
        let b = Partition::growing_with_singletons();
        let w = p_equiv_witness(&a, &b, 6).unwrap();
        assert!(verify_packing(&w).unwrap());
        assert!(w.f.verify_window(1000).passed);
        assert!(w.g.verify_window(1000).passed);
    }

    #[test]
    fn bounded_source_is_a_profile_violation() {
        let err = p_equiv_witness(&Partition::uniform(2), &growing(), 3).err();
        assert!(matches!(err, Some(WitnessError::Partition(PartitionError::ProfileViolation { .. }))));
    }

    #[test]
    fn factor_examples() {
        let w = p_equiv_witness(&growing(), &growing(), 6).unwrap();
        let id = factor_through(&Permutation::identity(), &w, 100).unwrap();
        assert!(id.p.agrees_on(&Permutation::identity(), 100).unwrap());
        assert!(id.q.agrees_on(&Permutation::identity(), 100).unwrap());
        // Block 3..6 has ordinal 2, so it belongs to B₁.
        let h = Permutation::from_cycles(&[vec![3, 5, 4]]).unwrap();
        let fac = factor_through(&h, &w, 100).unwrap();
        assert!(fac.p.agrees_on(&h, 100).unwrap());
        assert!(fac.q.agrees_on(&Permutation::identity(), 100).unwrap());
        assert_eq!(fac.p_certified, Tri::Yes);
        let bad = Permutation::from_cycles(&[vec![0, 1]]).unwrap();
        assert!(matches!(factor_through(&bad, &w, 100), Err(WitnessError::NoCertificate(_))));
    }

    #[test]
    fn random_factorizations() {
        let w = p_equiv_witness(&growing(), &growing(), 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let h = random_block_perm(&w.b, 6, &mut rng);
            let fac = factor_through(&h, &w, 1000).unwrap();
            let prod = Permutation::word(vec![fac.p.clone(), fac.q.clone()]);
            assert!(prod.agrees_on(&h, 1000).unwrap());
            assert_eq!(fac.p_certified, Tri::Yes);
            assert_eq!(fac.q_certified, Tri::Yes);
        }
    }
}

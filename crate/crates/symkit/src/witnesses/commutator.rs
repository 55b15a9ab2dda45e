//! Commutators with the block shift on `Δ = ∪Σ_i`, 3-cycle extraction and
//! the finite-group class of a set of finitely supported generators.
//!
//! `Σ_i = {4e, 4e+1}` where `e` is the [`ZEmbedding`] code of `i ∈ ℤ`; the
//! points congruent to 2 or 3 mod 4 make up `Ω − Δ`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use super::WitnessError;
use crate::perm::{BlockShiftZ, Parity, Permutation, Point, ZEmbedding};

/// Default bound on the order of a group enumerated by [`sfinite_class`].
pub const SFINITE_CAP: usize = 40320;

/// The two points of `Σ_i`.
pub fn sigma(i: i64) -> [Point; 2] {
    let e = 4 * ZEmbedding::encode(i);
    [e, e + 1]
}

/// The shift `h` with `Σ_i h = Σ_{i+1}`, fixing `Ω − Δ` pointwise.
pub fn block_shift() -> Permutation {
    Permutation::from_rule(Arc::new(BlockShiftZ))
}

/// Activation bits `f_i` for `i ∈ [lo, lo + f.len())`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommutatorSolution {
    pub lo: i64,
    pub f: Vec<bool>,
}

impl CommutatorSolution {
    pub fn bit(&self, i: i64) -> Option<bool> {
        usize::try_from(i - self.lo).ok().and_then(|k| self.f.get(k).copied())
    }

    /// The element swapping `Σ_i` for each active `i`.
    pub fn f_perm(&self) -> Permutation {
        let cycles: Vec<Vec<Point>> = self
            .f
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| sigma(self.lo + k as i64).to_vec())
            .collect();
        Permutation::from_cycles(&cycles).expect("blocks are disjoint")
    }

    /// `h⁻¹f⁻¹hf`.
    pub fn realize(&self) -> Permutation {
        let h = block_shift();
        let f = self.f_perm();
        Permutation::word(vec![h.inverse(), f.inverse(), h, f])
    }
}

/// Solves `c_i = f_{i−1} ⊕ f_i` for targets `c_i`, `i ∈ [lo, lo + target.len())`.
/// The bits `f_{lo−1}, …, f_{lo+len−1}` are fixed by `anchor = (index, bit)`,
/// which selects one of the two complementary solutions.
pub fn commutator_solve(target: &[bool], lo: i64, anchor: (i64, bool)) -> Result<CommutatorSolution, WitnessError> {
    let start = lo - 1;
    let n = target.len() + 1;
    let (ai, ab) = anchor;
    let k = usize::try_from(ai - start)
        .ok()
        .filter(|&k| k < n)
        .ok_or_else(|| WitnessError::Precondition(format!("anchor {ai} outside [{start}, {}]", start + n as i64 - 1)))?;
    let mut f = vec![false; n];
    f[k] = ab;
    for j in k + 1..n {
        f[j] = target[j - 1] ^ f[j - 1];
    }
    for j in (0..k).rev() {
        f[j] = target[j] ^ f[j + 1];
    }
    Ok(CommutatorSolution { lo: start, f })
}

/// Which of `Σ_lo, …, Σ_{hi−1}` the permutation swaps.
pub fn realized_pattern(p: &Permutation, lo: i64, hi: i64) -> Result<Vec<bool>, WitnessError> {
    (lo..hi)
        .map(|i| {
            let [a, b] = sigma(i);
            match p.apply(a)? {
                y if y == a => Ok(false),
                y if y == b => Ok(true),
                y => Err(WitnessError::Precondition(format!("Σ_{i} is not preserved: {a} goes to {y}"))),
            }
        })
        .collect()
}

/// `s⁻¹g⁻¹sg` for finitely supported `g`, `s` whose supports meet in one point.
pub fn three_cycle_extract(g: &Permutation, s: &Permutation) -> Result<Permutation, WitnessError> {
    for (name, p) in [("g", g), ("s", s)] {
        if p.support_bound().is_none() {
            return Err(WitnessError::NoCertificate(format!("{name} has no finite-support certificate")));
        }
    }
    let (sg, ss) = (g.support()?, s.support()?);
    let meet: Vec<Point> = sg.intersection(&ss).copied().collect();
    if meet.len() != 1 {
        return Err(WitnessError::Precondition(format!(
            "supports must meet in exactly one point, they meet in {meet:?}"
        )));
    }
    let c = s.inverse().then(&g.inverse()).then(s).then(g);
    let cycles = c.cycles()?;
    if cycles.len() != 1 || cycles[0].len() != 3 {
        return Err(WitnessError::Precondition(format!("commutator {} is not a 3-cycle", c.to_text())));
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SFiniteClass {
    Trivial,
    EvenFinite,
    OddFinite,
}

#[derive(Debug, Clone, Serialize)]
pub struct SFiniteReport {
    pub class: SFiniteClass,
    pub order: usize,
    /// An odd element of the group, in text form.
    pub odd_witness: Option<String>,
}

pub fn sfinite_class(gens: &[Permutation]) -> Result<SFiniteReport, WitnessError> {
    sfinite_class_with_cap(gens, SFINITE_CAP)
}

/// Enumerates `⟨gens⟩` inside `Sym(∪ supports)` by breadth-first closure.
pub fn sfinite_class_with_cap(gens: &[Permutation], cap: usize) -> Result<SFiniteReport, WitnessError> {
    let mut points = BTreeSet::new();
    for (k, g) in gens.iter().enumerate() {
        if g.support_bound().is_none() {
            return Err(WitnessError::NoCertificate(format!("generator {k} has no finite-support certificate")));
        }
        points.extend(g.support()?);
    }
    let points: Vec<Point> = points.into_iter().collect();
    let slot: HashMap<Point, usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let gens: Vec<Vec<usize>> = gens
        .iter()
        .map(|g| points.iter().map(|&x| Ok(slot[&g.apply(x)?])).collect::<Result<_, WitnessError>>())
        .collect::<Result<_, _>>()?;

    let identity: Vec<usize> = (0..points.len()).collect();
    let mut seen = BTreeSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    let mut odd_witness = None;
    while let Some(e) = queue.pop_front() {
        for g in &gens {
            let next: Vec<usize> = e.iter().map(|&i| g[i]).collect();
            if seen.contains(&next) {
                continue;
            }
            if seen.len() >= cap {
                return Err(WitnessError::Budget { cap });
            }
            if odd_witness.is_none() {
                let map = points.iter().zip(&next).map(|(&x, &j)| (x, points[j])).collect();
                let p = Permutation::from_map(map)?;
                if p.parity()? == Parity::Odd {
                    odd_witness = Some(p.to_text());
                }
            }
            seen.insert(next.clone());
            queue.push_back(next);
        }
    }
    let class = match (seen.len(), &odd_witness) {
        (1, _) => SFiniteClass::Trivial,
        (_, None) => SFiniteClass::EvenFinite,
        (_, Some(_)) => SFiniteClass::OddFinite,
    };
    Ok(SFiniteReport {
        class,
        order: seen.len(),
        odd_witness,
    })
}

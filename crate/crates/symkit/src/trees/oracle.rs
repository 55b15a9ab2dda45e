//! Orbit and transport queries for pointwise stabilizers `G_(Γ)`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use super::TreeError;
use crate::partitions::{Partition, PartitionError};
use crate::perm::{Permutation, Point};

/// Points scanned when an orbit is listed by search.
pub const ORBIT_HORIZON: Point = 1 << 20;

/// Default bound on the order of an enumerated finite group.
pub const GROUP_CAP: usize = 40320;

/// An orbit of `G_(Γ)`: complete, or at least the listed distinct points.
/// The first listed point is always the queried point.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "kind", content = "points", rename_all = "kebab-case")]
pub enum OrbitResult {
    Full(Vec<Point>),
    AtLeast(Vec<Point>),
}

impl OrbitResult {
    pub fn points(&self) -> &[Point] {
        match self {
            OrbitResult::Full(p) | OrbitResult::AtLeast(p) => p,
        }
    }

    pub fn len(&self) -> usize {
        self.points().len()
    }

    pub fn is_empty(&self) -> bool {
        self.points().is_empty()
    }

    pub fn is_full(&self) -> bool {
        matches!(self, OrbitResult::Full(_))
    }
}

pub trait GroupOracle: Send + Sync {
    fn name(&self) -> String;
    /// The orbit of `alpha` under `G_(Γ)`, listing at most `n` points unless complete.
    fn orbit(&self, gamma: &BTreeSet<Point>, alpha: Point, n: usize) -> Result<OrbitResult, TreeError>;
    /// An element of `G_(Γ)` carrying `alpha` to `target`.
    fn act(&self, gamma: &BTreeSet<Point>, alpha: Point, target: Point) -> Result<Permutation, TreeError>;
    /// Whether the group is declared closed.
    fn closed(&self) -> bool;
}

fn not_in_orbit(name: &str, alpha: Point, target: Point) -> TreeError {
    TreeError::Precondition(format!("{target} is not in the orbit of {alpha} under the stabilizer in {name}"))
}

fn swap(alpha: Point, target: Point) -> Permutation {
    if alpha == target {
        Permutation::identity()
    } else {
        Permutation::transposition(alpha, target)
    }
}

/// `Sym(ℕ)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullGroup;

impl GroupOracle for FullGroup {
    fn name(&self) -> String {
        "full".into()
    }

    fn orbit(&self, gamma: &BTreeSet<Point>, alpha: Point, n: usize) -> Result<OrbitResult, TreeError> {
        if gamma.contains(&alpha) {
            return Ok(OrbitResult::Full(vec![alpha]));
        }
        let mut pts = vec![alpha];
        pts.extend((0..).filter(|x| *x != alpha && !gamma.contains(x)).take(n.saturating_sub(1)));
        Ok(OrbitResult::AtLeast(pts))
    }

    fn act(&self, gamma: &BTreeSet<Point>, alpha: Point, target: Point) -> Result<Permutation, TreeError> {
        if alpha != target && (gamma.contains(&alpha) || gamma.contains(&target)) {
            return Err(not_in_orbit("full", alpha, target));
        }
        Ok(swap(alpha, target))
    }

    fn closed(&self) -> bool {
        true
    }
}

/// The trivial group.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrivialGroup;

impl GroupOracle for TrivialGroup {
    fn name(&self) -> String {
        "trivial".into()
    }

    fn orbit(&self, _: &BTreeSet<Point>, alpha: Point, _: usize) -> Result<OrbitResult, TreeError> {
        Ok(OrbitResult::Full(vec![alpha]))
    }

    fn act(&self, _: &BTreeSet<Point>, alpha: Point, target: Point) -> Result<Permutation, TreeError> {
        if alpha == target {
            Ok(Permutation::identity())
        } else {
            Err(not_in_orbit("trivial", alpha, target))
        }
    }

    fn closed(&self) -> bool {
        true
    }
}

/// `S_(A)`: inside a block the stabilizer of `Γ` is the full symmetric group
/// on the block minus `Γ`.
#[derive(Debug, Clone)]
pub struct StabilizerGroup {
    pub partition: Partition,
}

impl StabilizerGroup {
    pub fn new(partition: Partition) -> Self {
        StabilizerGroup { partition }
    }
}

impl GroupOracle for StabilizerGroup {
    fn name(&self) -> String {
        format!("stab:{}", self.partition.name())
    }

    fn orbit(&self, gamma: &BTreeSet<Point>, alpha: Point, n: usize) -> Result<OrbitResult, TreeError> {
        if gamma.contains(&alpha) {
            return Ok(OrbitResult::Full(vec![alpha]));
        }
        let a = &self.partition;
        let mut pts = vec![alpha];
        match a.block(alpha) {
            Ok(members) => {
                pts.extend(members.into_iter().filter(|x| *x != alpha && !gamma.contains(x)));
                if pts.len() <= n.max(1) {
                    return Ok(OrbitResult::Full(pts));
                }
                pts.truncate(n.max(1));
                Ok(OrbitResult::AtLeast(pts))
            }
            Err(PartitionError::InfiniteBlock(id)) => {
                let more = (0..ORBIT_HORIZON)
                    .filter(|&x| x != alpha && !gamma.contains(&x) && a.block_of(x) == id)
                    .take(n.saturating_sub(1));
                pts.extend(more);
                Ok(OrbitResult::AtLeast(pts))
            }
            Err(e) => Err(e.into()),
        }
    }

    fn act(&self, gamma: &BTreeSet<Point>, alpha: Point, target: Point) -> Result<Permutation, TreeError> {
        if alpha == target {
            return Ok(Permutation::identity());
        }
        let a = &self.partition;
        if gamma.contains(&alpha) || gamma.contains(&target) || a.block_of(alpha) != a.block_of(target) {
            return Err(not_in_orbit(&self.name(), alpha, target));
        }
        Ok(swap(alpha, target).with_block_certificate(a.name()))
    }

    fn closed(&self) -> bool {
        true
    }
}

/// The group generated by finitely many finitely supported permutations,
/// enumerated once by closure.
pub struct FiniteGroup {
    name: String,
    points: Vec<Point>,
    slot: HashMap<Point, usize>,
    elements: Vec<Vec<usize>>,
}

impl FiniteGroup {
    pub fn new(gens: &[Permutation]) -> Result<Self, TreeError> {
        Self::with_cap(gens, GROUP_CAP)
    }

    pub fn with_cap(gens: &[Permutation], cap: usize) -> Result<Self, TreeError> {
        let mut pts = BTreeSet::new();
        for g in gens {
            if g.support_bound().is_none() {
                return Err(TreeError::Precondition(format!("{} has no finite-support certificate", g.to_text())));
            }
            pts.extend(g.support()?);
        }
        let points: Vec<Point> = pts.into_iter().collect();
        let slot: HashMap<Point, usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let gens_idx: Vec<Vec<usize>> = gens
            .iter()
            .map(|g| points.iter().map(|&x| Ok(slot[&g.apply(x)?])).collect::<Result<_, TreeError>>())
            .collect::<Result<_, _>>()?;
        let identity: Vec<usize> = (0..points.len()).collect();
        let mut seen = BTreeSet::from([identity.clone()]);
        let mut elements = vec![identity.clone()];
        let mut queue = VecDeque::from([identity]);
        while let Some(e) = queue.pop_front() {
            for g in &gens_idx {
                let next: Vec<usize> = e.iter().map(|&i| g[i]).collect();
                if seen.insert(next.clone()) {
                    if elements.len() >= cap {
                        return Err(TreeError::Budget(format!("group order exceeds {cap}")));
                    }
                    elements.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
        let name = format!(
            "gens:[{}]",
            gens.iter().map(|g| g.to_text()).collect::<Vec<_>>().join(",")
        );
        Ok(FiniteGroup {
            name,
            points,
            slot,
            elements,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Union of the generator supports.
    pub fn support(&self) -> &[Point] {
        &self.points
    }

    fn fixes(&self, e: &[usize], gamma: &BTreeSet<Point>) -> bool {
        gamma
            .iter()
            .filter_map(|x| self.slot.get(x))
            .all(|&i| e[i] == i)
    }

    fn to_perm(&self, e: &[usize]) -> Permutation {
        let map = self.points.iter().zip(e).map(|(&x, &j)| (x, self.points[j])).collect();
        Permutation::from_map(map).expect("group element")
    }

    /// Elements of `G_(Γ)` other than the identity, as permutations.
    pub fn nontrivial_in_stabilizer(&self, gamma: &BTreeSet<Point>) -> Option<Permutation> {
        self.elements
            .iter()
            .skip(1)
            .find(|e| self.fixes(e, gamma))
            .map(|e| self.to_perm(e))
    }
}

impl GroupOracle for FiniteGroup {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn orbit(&self, gamma: &BTreeSet<Point>, alpha: Point, _: usize) -> Result<OrbitResult, TreeError> {
        let Some(&i) = self.slot.get(&alpha) else {
            return Ok(OrbitResult::Full(vec![alpha]));
        };
        let mut pts = vec![alpha];
        for e in &self.elements {
            let y = self.points[e[i]];
            if self.fixes(e, gamma) && !pts.contains(&y) {
                pts.push(y);
            }
        }
        Ok(OrbitResult::Full(pts))
    }

    fn act(&self, gamma: &BTreeSet<Point>, alpha: Point, target: Point) -> Result<Permutation, TreeError> {
        if alpha == target {
            return Ok(Permutation::identity());
        }
        let (Some(&i), Some(&j)) = (self.slot.get(&alpha), self.slot.get(&target)) else {
            return Err(not_in_orbit(&self.name, alpha, target));
        };
        self.elements
            .iter()
            .find(|e| e[i] == j && self.fixes(e, gamma))
            .map(|e| self.to_perm(e))
            .ok_or_else(|| not_in_orbit(&self.name, alpha, target))
    }

    fn closed(&self) -> bool {
        true
    }
}

/// `G_(Γ₀)` for an inner group `G`: queries add `Γ₀` to the fixed set.
pub struct FixingGroup {
    pub inner: Arc<dyn GroupOracle>,
    pub gamma: BTreeSet<Point>,
}

impl FixingGroup {
    fn joined(&self, gamma: &BTreeSet<Point>) -> BTreeSet<Point> {
        self.gamma.union(gamma).copied().collect()
    }
}

impl GroupOracle for FixingGroup {
    fn name(&self) -> String {
        let pts: Vec<String> = self.gamma.iter().map(|p| p.to_string()).collect();
        format!("fix({};{})", self.inner.name(), pts.join(","))
    }

    fn orbit(&self, gamma: &BTreeSet<Point>, alpha: Point, n: usize) -> Result<OrbitResult, TreeError> {
        self.inner.orbit(&self.joined(gamma), alpha, n)
    }

    fn act(&self, gamma: &BTreeSet<Point>, alpha: Point, target: Point) -> Result<Permutation, TreeError> {
        self.inner.act(&self.joined(gamma), alpha, target)
    }

    fn closed(&self) -> bool {
        self.inner.closed()
    }
}

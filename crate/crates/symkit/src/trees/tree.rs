//! Building the tree of elements `g(k_0, …, k_{r-1})` level by level.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{GroupOracle, OrbitResult, TreeError};
use crate::perm::{limit, ConvergentSequence, Permutation, Point, SeqTerm};

/// Largest tree depth accepted by [`build_tree`].
pub const DEFAULT_DEPTH_CAP: usize = 12;

/// Candidate pivots scanned at each level.
pub const PIVOT_SCAN: Point = 4096;

/// Largest number of nodes a tree may hold.
const NODE_CAP: usize = 200_000;

/// Points probed to find the maximal orbit size in binary mode.
const M_PROBE: Point = 64;

/// Orbit size treated as unbounded when probing for the maximum.
const M_BOUND: usize = 4096;

/// How pivots are chosen and how many children a node receives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TreeMode {
    /// Pivots have infinite orbits. A node `g(k_0..k_{i-1})` has children
    /// `k_i = 0, 1, …` while `i + 1 + Σk` stays within the depth.
    InfOrbits,
    /// Pivots have orbits of at least `|K_i|·N_i` points; every node of
    /// length `i` has `N_i` children.
    UnboundedOrbits { n: Vec<usize> },
    /// All orbits have at most `M` points; pivots come in pairs `α_i, β_i`
    /// from an orbit of exactly `M` points and every node has two children.
    BinaryOrbits,
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub index: Vec<usize>,
    pub perm: Permutation,
    /// `h` with `perm = h · parent`.
    pub left: Permutation,
    pub parent: Option<usize>,
}

pub struct TreeState {
    pub mode: TreeMode,
    pub depth: usize,
    pub oracle: Arc<dyn GroupOracle>,
    pub alphas: Vec<Point>,
    pub betas: Vec<Point>,
    /// `Γ_0, …, Γ_depth`.
    pub gammas: Vec<BTreeSet<Point>>,
    /// Maximal orbit size in binary mode.
    pub max_orbit: Option<usize>,
    pub nodes: Vec<TreeNode>,
    /// Node ids by length.
    pub by_len: Vec<Vec<usize>>,
    by_index: HashMap<Vec<usize>, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeSummary {
    pub index: Vec<usize>,
    pub perm: String,
    pub pivot_images: Vec<Point>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeSummary {
    pub mode: TreeMode,
    pub depth: usize,
    pub oracle: String,
    pub alphas: Vec<Point>,
    pub betas: Vec<Point>,
    pub max_orbit: Option<usize>,
    pub gammas: Vec<Vec<Point>>,
    pub k_sizes: Vec<usize>,
    pub nodes: Vec<NodeSummary>,
}

/// Counts of the structural checks performed by [`TreeState::check_invariants`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeCheck {
    pub left_factors: usize,
    pub sibling_pairs: usize,
}

fn failure(level: usize, reason: String) -> TreeError {
    TreeError::HypothesisFailure { level, reason }
}

pub fn build_tree(oracle: Arc<dyn GroupOracle>, mode: TreeMode, depth: usize) -> Result<TreeState, TreeError> {
    if depth > DEFAULT_DEPTH_CAP {
        return Err(TreeError::Budget(format!("depth {depth} exceeds the cap {DEFAULT_DEPTH_CAP}")));
    }
    if let TreeMode::UnboundedOrbits { n } = &mode {
        if n.len() < depth {
            return Err(TreeError::Precondition(format!("{} branching numbers given for depth {depth}", n.len())));
        }
        if n.iter().take(depth).any(|&k| k == 0) {
            return Err(TreeError::Precondition("branching numbers must be positive".into()));
        }
    }
    let root = TreeNode {
        index: Vec::new(),
        perm: Permutation::identity(),
        left: Permutation::identity(),
        parent: None,
    };
    let mut t = TreeState {
        mode,
        depth,
        oracle,
        alphas: Vec::new(),
        betas: Vec::new(),
        gammas: Vec::new(),
        max_orbit: None,
        nodes: vec![root],
        by_len: vec![vec![0]],
        by_index: HashMap::from([(Vec::new(), 0)]),
    };
    for i in 0..depth {
        let gamma = t.compute_gamma(i)?;
        t.gammas.push(gamma);
        let children = t.child_counts(i);
        let total: usize = children.iter().sum();
        if t.nodes.len() + total > NODE_CAP {
            return Err(TreeError::Budget(format!("tree exceeds {NODE_CAP} nodes at length {}", i + 1)));
        }
        let orbit = t.choose_pivot(i, total)?;
        t.grow(i, &children, &orbit)?;
    }
    let gamma = t.compute_gamma(depth)?;
    t.gammas.push(gamma);
    Ok(t)
}

impl TreeState {
    fn compute_gamma(&self, i: usize) -> Result<BTreeSet<Point>, TreeError> {
        let base: BTreeSet<Point> = (0..i).chain(self.alphas.iter().copied()).chain(self.betas.iter().copied()).collect();
        let mut gamma = BTreeSet::new();
        for level in &self.by_len[..=i] {
            for &id in level {
                let g = &self.nodes[id].perm;
                for &b in &base {
                    gamma.insert(g.apply_inv(b)?);
                }
            }
        }
        Ok(gamma)
    }

    fn child_counts(&self, i: usize) -> Vec<usize> {
        self.by_len[i]
            .iter()
            .map(|&id| match &self.mode {
                TreeMode::InfOrbits => {
                    let used = i + self.nodes[id].index.iter().sum::<usize>();
                    self.depth - used.min(self.depth)
                }
                TreeMode::UnboundedOrbits { n } => n[i],
                TreeMode::BinaryOrbits => 2,
            })
            .collect()
    }

    /// Picks `α_i` (and `β_i`) and returns its listed orbit under `G_(Γ_i)`.
    fn choose_pivot(&mut self, i: usize, total: usize) -> Result<Vec<Point>, TreeError> {
        let gamma = self.gammas[i].clone();
        let oracle = self.oracle.clone();
        let outside = (0..PIVOT_SCAN).filter(|x| !gamma.contains(x));
        match &self.mode {
            TreeMode::InfOrbits => {
                let need = self.nodes.len() + total + 1;
                for x in outside {
                    if let OrbitResult::AtLeast(pts) = oracle.orbit(&gamma, x, need)? {
                        if pts.len() >= need {
                            self.alphas.push(x);
                            return Ok(pts);
                        }
                    }
                }
                Err(failure(
                    i,
                    format!("no point below {PIVOT_SCAN} outside Γ_{i} has an infinite orbit under G_(Γ_{i})"),
                ))
            }
            TreeMode::UnboundedOrbits { n } => {
                let need = (self.by_len[i].len() * n[i]).max(2);
                for x in outside {
                    let o = oracle.orbit(&gamma, x, need)?;
                    if o.len() >= need {
                        self.alphas.push(x);
                        return Ok(o.points().to_vec());
                    }
                }
                Err(failure(
                    i,
                    format!(
                        "no orbit of G_(Γ_{i}) reaches |K_{i}|·N_{i} = {}·{} points",
                        self.by_len[i].len(),
                        n[i]
                    ),
                ))
            }
            TreeMode::BinaryOrbits => {
                let m = match self.max_orbit {
                    Some(m) => m,
                    None => {
                        let mut m = 1;
                        for x in 0..M_PROBE {
                            let o = oracle.orbit(&gamma, x, M_BOUND)?;
                            if !o.is_full() {
                                return Err(failure(i, format!("the orbit of {x} has at least {} points", o.len())));
                            }
                            m = m.max(o.len());
                        }
                        if m < 2 {
                            return Err(failure(i, format!("every orbit of the first {M_PROBE} points is trivial")));
                        }
                        self.max_orbit = Some(m);
                        m
                    }
                };
                for x in outside {
                    let o = oracle.orbit(&gamma, x, M_BOUND)?;
                    if !o.is_full() || o.len() > m {
                        return Err(failure(i, format!("the orbit of {x} under G_(Γ_{i}) exceeds {m} points")));
                    }
                    if o.len() == m {
                        let beta = *o.points().iter().filter(|&&y| y != x).min().expect("m ≥ 2");
                        self.alphas.push(x);
                        self.betas.push(beta);
                        return Ok(o.points().to_vec());
                    }
                }
                Err(failure(i, format!("no orbit of G_(Γ_{i}) has the maximal size {m}")))
            }
        }
    }

    fn grow(&mut self, i: usize, children: &[usize], orbit: &[Point]) -> Result<(), TreeError> {
        let alpha = self.alphas[i];
        let gamma = self.gammas[i].clone();
        let mut avoid: HashSet<Point> = match self.mode {
            TreeMode::InfOrbits => self
                .nodes
                .iter()
                .map(|n| n.perm.apply(alpha))
                .collect::<Result<_, _>>()?,
            _ => HashSet::new(),
        };
        let parents = self.by_len[i].clone();
        let mut level = Vec::new();
        for (&pid, &count) in parents.iter().zip(children) {
            let parent = self.nodes[pid].perm.clone();
            for k in 0..count {
                let target = match self.mode {
                    TreeMode::BinaryOrbits => {
                        let pivot = if k == 0 { alpha } else { self.betas[i] };
                        let target = parent.apply_inv(pivot)?;
                        if !orbit.contains(&target) {
                            return Err(failure(
                                i,
                                format!("{target} is not in the orbit of α_{i} = {alpha} under G_(Γ_{i})"),
                            ));
                        }
                        target
                    }
                    _ => {
                        let mut chosen = None;
                        for &o in orbit {
                            if !avoid.contains(&parent.apply(o)?) {
                                chosen = Some(o);
                                break;
                            }
                        }
                        chosen.ok_or_else(|| {
                            failure(i, format!("the orbit of α_{i} = {alpha} has too few points for fresh images"))
                        })?
                    }
                };
                let h = self.oracle.act(&gamma, alpha, target)?;
                let perm = h.then(&parent);
                avoid.insert(perm.apply(alpha)?);
                let mut index = self.nodes[pid].index.clone();
                index.push(k);
                let id = self.nodes.len();
                self.by_index.insert(index.clone(), id);
                self.nodes.push(TreeNode {
                    index,
                    perm,
                    left: h,
                    parent: Some(pid),
                });
                level.push(id);
            }
        }
        self.by_len.push(level);
        Ok(())
    }

    pub fn node(&self, index: &[usize]) -> Option<&TreeNode> {
        self.by_index.get(index).map(|&id| &self.nodes[id])
    }

    pub fn node_id(&self, index: &[usize]) -> Option<usize> {
        self.by_index.get(index).copied()
    }

    /// `K_j`: nodes with `r + Σk = j` in infinite-orbit mode, nodes of length `j` otherwise.
    pub fn k_set(&self, j: usize) -> Vec<&TreeNode> {
        match self.mode {
            TreeMode::InfOrbits => self
                .nodes
                .iter()
                .filter(|n| n.index.len() + n.index.iter().sum::<usize>() == j)
                .collect(),
            _ => self.by_len.get(j).map_or_else(Vec::new, |l| l.iter().map(|&id| &self.nodes[id]).collect()),
        }
    }

    /// `(α_0 g, …, α_{r-1} g)` for the node `g` of length `r`.
    pub fn pivot_images(&self, node: &TreeNode) -> Result<Vec<Point>, TreeError> {
        self.alphas[..node.index.len()]
            .iter()
            .map(|&a| Ok(node.perm.apply(a)?))
            .collect()
    }

    /// Checks that every left factor fixes its `Γ` and that siblings send
    /// the pivot to distinct points.
    pub fn check_invariants(&self) -> Result<TreeCheck, TreeError> {
        let mut check = TreeCheck {
            left_factors: 0,
            sibling_pairs: 0,
        };
        for n in &self.nodes[1..] {
            let i = n.index.len() - 1;
            for &x in &self.gammas[i] {
                if n.left.apply(x)? != x {
                    return Err(TreeError::IllFormed(format!("left factor of {:?} moves {x} ∈ Γ_{i}", n.index)));
                }
            }
            let parent = &self.nodes[n.parent.expect("non-root")].perm;
            let support: BTreeSet<Point> = n.perm.support()?.union(&parent.support()?).copied().collect();
            for &x in support.iter().chain(n.left.support()?.iter()) {
                if n.left.then(parent).apply(x)? != n.perm.apply(x)? {
                    return Err(TreeError::IllFormed(format!("{:?} is not its left factor times its parent", n.index)));
                }
            }
            check.left_factors += 1;
        }
        for level in &self.by_len {
            let mut seen: HashMap<(Option<usize>, Point), &[usize]> = HashMap::new();
            for &id in level {
                let n = &self.nodes[id];
                let Some(p) = n.parent else { continue };
                let img = n.perm.apply(self.alphas[n.index.len() - 1])?;
                if let Some(other) = seen.insert((Some(p), img), &n.index) {
                    return Err(TreeError::IllFormed(format!("{other:?} and {:?} agree on their pivot", n.index)));
                }
                check.sibling_pairs += 1;
            }
        }
        Ok(check)
    }

    pub fn summary(&self) -> Result<TreeSummary, TreeError> {
        let k_sizes = (0..=self.depth).map(|j| self.k_set(j).len()).collect();
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                Ok(NodeSummary {
                    index: n.index.clone(),
                    perm: n.perm.to_text(),
                    pivot_images: self.pivot_images(n)?,
                })
            })
            .collect::<Result<_, TreeError>>()?;
        Ok(TreeSummary {
            mode: self.mode.clone(),
            depth: self.depth,
            oracle: self.oracle.name(),
            alphas: self.alphas.clone(),
            betas: self.betas.clone(),
            max_orbit: self.max_orbit,
            gammas: self.gammas.iter().map(|g| g.iter().copied().collect()).collect(),
            k_sizes,
            nodes,
        })
    }
}

/// The sequence `j ↦ (g(k_0..k_j), Γ_j)` along a branch, closed by a guard
/// term `Γ_m` that every deeper extension fixes relative to the last node.
pub fn branch_sequence(t: &TreeState, choice: &[usize]) -> Result<Arc<ConvergentSequence>, TreeError> {
    let mut terms = Vec::with_capacity(choice.len() + 1);
    for j in 0..choice.len() {
        let node = t
            .node(&choice[..=j])
            .ok_or_else(|| TreeError::Precondition(format!("the tree has no node {:?}", &choice[..=j])))?;
        terms.push(SeqTerm {
            perm: Some(node.perm.clone()),
            gamma: t.gammas[j].clone(),
        });
    }
    terms.push(SeqTerm {
        perm: None,
        gamma: t.gammas[choice.len()].clone(),
    });
    Ok(Arc::new(ConvergentSequence::from_terms(terms, true)))
}

/// The limit of [`branch_sequence`], verified at every available level.
pub fn branch_limit(t: &TreeState, choice: &[usize]) -> Result<Permutation, TreeError> {
    let seq = branch_sequence(t, choice)?;
    if choice.is_empty() {
        return Ok(Permutation::identity());
    }
    Ok(limit(seq, choice.len())?)
}

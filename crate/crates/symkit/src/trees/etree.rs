//! E-trees of tuples `e(n_0, …, n_r; π_1, …, π_r)` and the permutation `s`
//! that realizes each `π_r` on the freshly placed components.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{branch_limit, TreeError, TreeState};
use crate::perm::{Permutation, Point};

/// Largest number of E-tree nodes built.
pub const E_NODE_CAP: usize = 100_000;

/// A family `D_i` of `i`-tuples closed under prefixes, given by its extensions.
pub trait DFamily: Send + Sync {
    fn name(&self) -> String;
    /// The point `α_i`.
    fn alpha(&self, i: usize) -> Result<Point, TreeError>;
    /// Points `β ≥ from` with `prefix ⌢ β` in the family, in increasing order.
    fn extensions<'a>(&'a self, prefix: &[Point], from: Point)
        -> Result<Box<dyn Iterator<Item = Point> + 'a>, TreeError>;
    /// A lower bound on the number of extensions of every tuple of length `i`;
    /// `None` when there are infinitely many.
    fn branching(&self, i: usize) -> Option<usize>;
    /// An element `g` with `α_i g = tuple_i` for every listed component.
    fn realize(&self, tuple: &[Point]) -> Result<Permutation, TreeError>;
}

/// All injective tuples, with `α_i = i`; this is the family of the full group.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllInjective;

impl DFamily for AllInjective {
    fn name(&self) -> String {
        "all-injective".into()
    }

    fn alpha(&self, i: usize) -> Result<Point, TreeError> {
        Ok(i)
    }

    fn extensions<'a>(
        &'a self,
        prefix: &[Point],
        from: Point,
    ) -> Result<Box<dyn Iterator<Item = Point> + 'a>, TreeError> {
        let taken: HashSet<Point> = prefix.iter().copied().collect();
        Ok(Box::new((from..).filter(move |x| !taken.contains(x))))
    }

    fn branching(&self, _: usize) -> Option<usize> {
        None
    }

    fn realize(&self, tuple: &[Point]) -> Result<Permutation, TreeError> {
        let n = tuple.len();
        let image: BTreeSet<Point> = tuple.iter().copied().collect();
        if image.len() != n {
            return Err(TreeError::Precondition(format!("{tuple:?} is not injective")));
        }
        let mut map: BTreeMap<Point, Point> = tuple.iter().enumerate().map(|(i, &y)| (i, y)).collect();
        let sources = image.iter().copied().filter(|&y| y >= n);
        let targets = (0..n).filter(|x| !image.contains(x));
        map.extend(sources.zip(targets));
        Ok(Permutation::from_map(map)?)
    }
}

/// The family `D_i = {(α_0 g, …, α_{i-1} g) : g a node of length i}` of a built tree.
pub struct TreeFamily {
    tree: Arc<TreeState>,
    prefixes: HashMap<Vec<Point>, usize>,
    children: Vec<Vec<usize>>,
}

impl TreeFamily {
    pub fn new(tree: Arc<TreeState>) -> Result<Self, TreeError> {
        let mut prefixes = HashMap::new();
        let mut children = vec![Vec::new(); tree.nodes.len()];
        for (id, n) in tree.nodes.iter().enumerate() {
            prefixes.insert(tree.pivot_images(n)?, id);
            if let Some(p) = n.parent {
                children[p].push(id);
            }
        }
        Ok(TreeFamily {
            tree,
            prefixes,
            children,
        })
    }

    fn node_of(&self, prefix: &[Point]) -> Result<usize, TreeError> {
        self.prefixes
            .get(prefix)
            .copied()
            .ok_or_else(|| TreeError::Precondition(format!("{prefix:?} is not in the tree family")))
    }
}

impl DFamily for TreeFamily {
    fn name(&self) -> String {
        format!("tree({})", self.tree.oracle.name())
    }

    fn alpha(&self, i: usize) -> Result<Point, TreeError> {
        self.tree
            .alphas
            .get(i)
            .copied()
            .ok_or_else(|| TreeError::Precondition(format!("the tree has only {} pivots", self.tree.alphas.len())))
    }

    fn extensions<'a>(
        &'a self,
        prefix: &[Point],
        from: Point,
    ) -> Result<Box<dyn Iterator<Item = Point> + 'a>, TreeError> {
        let id = self.node_of(prefix)?;
        let Some(&alpha) = self.tree.alphas.get(prefix.len()) else {
            return Ok(Box::new(std::iter::empty()));
        };
        let mut imgs = self.children[id]
            .iter()
            .map(|&c| self.tree.nodes[c].perm.apply(alpha))
            .collect::<Result<Vec<_>, _>>()?;
        imgs.retain(|&y| y >= from);
        imgs.sort_unstable();
        Ok(Box::new(imgs.into_iter()))
    }

    fn branching(&self, i: usize) -> Option<usize> {
        let Some(level) = self.tree.by_len.get(i) else {
            return Some(0);
        };
        Some(level.iter().map(|&id| self.children[id].len()).min().unwrap_or(0))
    }

    fn realize(&self, tuple: &[Point]) -> Result<Permutation, TreeError> {
        let id = self.node_of(tuple)?;
        branch_limit(&self.tree, &self.tree.nodes[id].index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ETreeVariant {
    /// `E_i` holds a node for every composition `0 = n_0 < … < n_r = i` and
    /// every choice of `π_m ∈ Sym([n_{m-1}, n_m))`.
    Compositions,
    /// One fixed breakpoint sequence; `E_r` holds the nodes with breakpoints
    /// `n_0..n_r`, and the `j`-th component sits at jump index `i(j)`.
    Breakpoints { n: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ENode {
    pub breaks: Vec<usize>,
    /// `π_m` as offsets: `π_m(n_{m-1} + t) = n_{m-1} + perms[m-1][t]`.
    pub perms: Vec<Vec<usize>>,
    pub tuple: Vec<Point>,
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ETree {
    pub variant: ETreeVariant,
    pub family: String,
    /// Jump indices `i(j)` of the breakpoint variant.
    pub jumps: Vec<usize>,
    /// The branching bound `|E_{r-1}|·(Δ·Δ! + n_{r-1})` required at each `r ≥ 1`.
    pub bounds: Vec<usize>,
    /// Node ids of `E_0, E_1, …`.
    pub levels: Vec<Vec<usize>>,
    pub nodes: Vec<ENode>,
    #[serde(skip)]
    lookup: HashMap<(Vec<usize>, Vec<Vec<usize>>), usize>,
}

/// Permutations of `0..n` in lexicographic order.
fn all_perms(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

struct Placer<'a> {
    d: &'a dyn DFamily,
    used: HashSet<Point>,
    low: Point,
}

impl Placer<'_> {
    fn fresh(&mut self, prefix: &[Point], level: usize) -> Result<Point, TreeError> {
        let mut found = None;
        for y in self.d.extensions(prefix, self.low)?.take(E_NODE_CAP * 8) {
            if !self.used.contains(&y) {
                found = Some(y);
                break;
            }
        }
        let y = found.ok_or_else(|| TreeError::HypothesisFailure {
            level,
            reason: format!("{prefix:?} has no fresh extension in {}", self.d.name()),
        })?;
        self.used.insert(y);
        while self.used.contains(&self.low) {
            self.low += 1;
        }
        Ok(y)
    }

    fn any(&self, prefix: &[Point], level: usize) -> Result<Point, TreeError> {
        self.d.extensions(prefix, 0)?.next().ok_or_else(|| TreeError::HypothesisFailure {
            level,
            reason: format!("{prefix:?} has no extension in {}", self.d.name()),
        })
    }
}

impl ETree {
    fn push(&mut self, node: ENode) -> usize {
        let id = self.nodes.len();
        self.lookup.insert((node.breaks.clone(), node.perms.clone()), id);
        self.nodes.push(node);
        id
    }

    /// Tuple position of the `j`-th component.
    fn position(&self, j: usize) -> usize {
        match self.variant {
            ETreeVariant::Compositions => j,
            ETreeVariant::Breakpoints { .. } => self.jumps[j],
        }
    }

    pub fn node_by(&self, breaks: &[usize], perms: &[Vec<usize>]) -> Option<&ENode> {
        self.lookup.get(&(breaks.to_vec(), perms.to_vec())).map(|&id| &self.nodes[id])
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }
}

pub fn build_e_tree(d: &dyn DFamily, variant: ETreeVariant, depth: usize) -> Result<ETree, TreeError> {
    let mut t = ETree {
        variant: variant.clone(),
        family: d.name(),
        jumps: Vec::new(),
        bounds: Vec::new(),
        levels: Vec::new(),
        nodes: Vec::new(),
        lookup: HashMap::new(),
    };
    let root = t.push(ENode {
        breaks: vec![0],
        perms: Vec::new(),
        tuple: Vec::new(),
        parent: None,
    });
    t.levels.push(vec![root]);
    let mut placer = Placer {
        d,
        used: HashSet::new(),
        low: 0,
    };
    match variant {
        ETreeVariant::Compositions => {
            for i in 1..=depth {
                let size: usize = (0..i).map(|p| t.levels[p].len() * factorial(i - p)).sum();
                if t.nodes.len() + size > E_NODE_CAP {
                    return Err(TreeError::Budget(format!("E_{i} would exceed {E_NODE_CAP} nodes")));
                }
                let mut level = Vec::with_capacity(size);
                for p in 0..i {
                    let perms = all_perms(i - p);
                    for pid in t.levels[p].clone() {
                        for pi in &perms {
                            let parent = &t.nodes[pid];
                            let mut node = ENode {
                                breaks: parent.breaks.clone(),
                                perms: parent.perms.clone(),
                                tuple: parent.tuple.clone(),
                                parent: Some(pid),
                            };
                            node.breaks.push(i);
                            node.perms.push(pi.clone());
                            for _ in p..i {
                                let y = placer.fresh(&node.tuple, i)?;
                                node.tuple.push(y);
                            }
                            level.push(t.push(node));
                        }
                    }
                }
                t.levels.push(level);
            }
        }
        ETreeVariant::Breakpoints { n } => {
            if n.first().is_some_and(|&x| x != 0) || n.windows(2).any(|w| w[0] >= w[1]) {
                return Err(TreeError::Precondition(format!("breakpoints {n:?} must start at 0 and increase")));
            }
            let top = depth.min(n.len().saturating_sub(1));
            for r in 1..=top {
                let (lo, hi) = (n[r - 1], n[r]);
                let delta = hi - lo;
                let bound = t.levels[r - 1].len() * (delta * factorial(delta) + lo);
                let mut i = t.jumps.last().map_or(0, |&x| x + 1);
                for _ in lo..hi {
                    loop {
                        match d.branching(i) {
                            None => break,
                            Some(k) if k >= bound => break,
                            Some(0) => {
                                return Err(TreeError::HypothesisFailure {
                                    level: r,
                                    reason: format!("no index beyond {i} has N_i ≥ {bound} in {}", d.name()),
                                })
                            }
                            Some(_) => i += 1,
                        }
                    }
                    t.jumps.push(i);
                    i += 1;
                }
                t.bounds.push(bound);
                if t.nodes.len() + t.levels[r - 1].len() * factorial(delta) > E_NODE_CAP {
                    return Err(TreeError::Budget(format!("E_{r} would exceed {E_NODE_CAP} nodes")));
                }
                let jump_set: HashSet<usize> = t.jumps.iter().copied().collect();
                let end = t.jumps[hi - 1] + 1;
                let perms = all_perms(delta);
                let mut level = Vec::new();
                for pid in t.levels[r - 1].clone() {
                    for pi in &perms {
                        let parent = &t.nodes[pid];
                        let mut node = ENode {
                            breaks: parent.breaks.clone(),
                            perms: parent.perms.clone(),
                            tuple: parent.tuple.clone(),
                            parent: Some(pid),
                        };
                        node.breaks.push(hi);
                        node.perms.push(pi.clone());
                        while node.tuple.len() < end {
                            let y = if jump_set.contains(&node.tuple.len()) {
                                placer.fresh(&node.tuple, r)?
                            } else {
                                placer.any(&node.tuple, r)?
                            };
                            node.tuple.push(y);
                        }
                        level.push(t.push(node));
                    }
                }
                t.levels.push(level);
            }
        }
    }
    Ok(t)
}

/// The permutation with `β_j s = β_{jπ_r}` on the fresh components of every node.
pub fn build_s(t: &ETree) -> Result<Permutation, TreeError> {
    let mut map = BTreeMap::new();
    for node in &t.nodes[1..] {
        let r = node.breaks.len() - 1;
        let lo = node.breaks[r - 1];
        for (off, &img) in node.perms[r - 1].iter().enumerate() {
            let x = node.tuple[t.position(lo + off)];
            let y = node.tuple[t.position(lo + img)];
            if map.insert(x, y).is_some() {
                return Err(TreeError::IllFormed(format!("component {x} is placed twice")));
            }
        }
    }
    Permutation::from_map(map).map_err(|e| TreeError::IllFormed(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugationReport {
    pub breaks: Vec<usize>,
    pub checked: usize,
    /// Indices `i` with `α_i g s ≠ α_{iπ} g`.
    pub failures: Vec<usize>,
    pub passed: bool,
}

/// Checks `α_i g s = α_{iπ} g` for `i < window`, where `g` realizes the
/// E-tree node determined by the interval decomposition of `π`.
pub fn verify_conjugation(
    t: &ETree,
    s: &Permutation,
    d: &dyn DFamily,
    pi: &Permutation,
    window: usize,
) -> Result<ConjugationReport, TreeError> {
    let images: Vec<usize> = (0..window).map(|j| pi.apply(j)).collect::<Result<_, _>>()?;
    let preserves = |lo: usize, hi: usize| images[lo..hi].iter().all(|&y| (lo..hi).contains(&y));
    let breaks: Vec<usize> = match &t.variant {
        ETreeVariant::Compositions => {
            if window >= t.levels.len() {
                return Err(TreeError::Precondition(format!("window {window} exceeds the E-tree depth")));
            }
            let mut breaks = vec![0];
            while let Some(&lo) = breaks.last().filter(|&&lo| lo < window) {
                let hi = (lo + 1..=window)
                    .find(|&hi| preserves(lo, hi))
                    .ok_or_else(|| TreeError::Precondition(format!("π does not preserve [0, {window})")))?;
                breaks.push(hi);
            }
            breaks
        }
        ETreeVariant::Breakpoints { n } => {
            let r = n
                .iter()
                .position(|&x| x == window)
                .filter(|&r| r < t.levels.len())
                .ok_or_else(|| TreeError::Precondition(format!("window {window} is not a built breakpoint")))?;
            let breaks = n[..=r].to_vec();
            if let Some(w) = breaks.windows(2).find(|w| !preserves(w[0], w[1])) {
                return Err(TreeError::Precondition(format!("π does not preserve [{}, {})", w[0], w[1])));
            }
            breaks
        }
    };
    let perms: Vec<Vec<usize>> = breaks
        .windows(2)
        .map(|w| images[w[0]..w[1]].iter().map(|&y| y - w[0]).collect())
        .collect();
    let node = t
        .node_by(&breaks, &perms)
        .ok_or_else(|| TreeError::Precondition(format!("no E-tree node for breakpoints {breaks:?}")))?;
    let g = d.realize(&node.tuple)?;
    let mut failures = Vec::new();
    for j in 0..window {
        let lhs = s.apply(g.apply(d.alpha(t.position(j))?)?)?;
        let rhs = g.apply(d.alpha(t.position(images[j]))?)?;
        if lhs != rhs {
            failures.push(j);
        }
    }
    Ok(ConjugationReport {
        breaks,
        checked: window,
        passed: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{build_tree, FullGroup, StabilizerGroup, TreeMode};
    use crate::partitions::Partition;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `|E_i| = Σ_{p<i} |E_p|·(i-p)!`, counted by brute force over compositions.
    fn composition_count(i: usize) -> usize {
        if i == 0 {
            return 1;
        }
        (0..i).map(|p| composition_count(p) * factorial(i - p)).sum()
    }

    fn random_interval_perm(rng: &mut ChaCha8Rng, window: usize) -> Permutation {
        let mut images = Vec::new();
        let mut lo = 0;
        while lo < window {
            let hi = rng.gen_range(lo + 1..=window);
            let mut block: Vec<usize> = (lo..hi).collect();
            block.shuffle(rng);
            images.extend(block);
            lo = hi;
        }
        Permutation::from_images(&images).unwrap()
    }

    #[test]
    fn lexicographic_permutations() {
        assert_eq!(all_perms(3).len(), 6);
        assert_eq!(all_perms(3)[1], vec![0, 2, 1]);
        assert_eq!(all_perms(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn composition_sizes() {
        let t = build_e_tree(&AllInjective, ETreeVariant::Compositions, 5).unwrap();
        assert_eq!(t.level_sizes(), vec![1, 1, 3, 11, 47, 231]);
        assert_eq!(t.level_sizes(), (0..=5).map(composition_count).collect::<Vec<_>>());
    }

    #[test]
    fn triangular_breakpoints_multiply_factorials() {
        let t = build_e_tree(&AllInjective, ETreeVariant::Breakpoints { n: vec![0, 1, 3, 6] }, 3).unwrap();
        assert_eq!(t.level_sizes(), vec![1, 1, 2, 12]);
        assert_eq!(t.jumps, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn empty_breakpoints_give_the_root() {
        let t = build_e_tree(&AllInjective, ETreeVariant::Breakpoints { n: vec![] }, 3).unwrap();
        assert_eq!(t.level_sizes(), vec![1]);
        assert!(build_s(&t).unwrap().support().unwrap().is_empty());
    }

    #[test]
    fn depth_two_transposition() {
        let t = build_e_tree(&AllInjective, ETreeVariant::Compositions, 2).unwrap();
        let s = build_s(&t).unwrap();
        let node = t.node_by(&[0, 2], &[vec![1, 0]]).unwrap();
        let (a, b) = (node.tuple[0], node.tuple[1]);
        assert_eq!(s.apply(a).unwrap(), b);
        assert_eq!(s.apply(b).unwrap(), a);
        // Components of distinct nodes are fresh, so no point is placed twice.
        let all: Vec<Point> = t.nodes.iter().flat_map(|n| n.tuple.iter().copied()).collect();
        let distinct: HashSet<Point> = all.iter().copied().collect();
        assert_eq!(distinct.len(), 1 + 2 * 2 + 1);
    }

    #[test]
    fn duplicate_component_is_ill_formed() {
        let mut t = build_e_tree(&AllInjective, ETreeVariant::Compositions, 2).unwrap();
        let last = t.nodes.len() - 1;
        t.nodes[last].tuple[1] = t.nodes[1].tuple[0];
        assert!(matches!(build_s(&t), Err(TreeError::IllFormed(_))));
    }

    #[test]
    fn conjugation_over_the_full_group() {
        let t = build_e_tree(&AllInjective, ETreeVariant::Compositions, 8).unwrap();
        let s = build_s(&t).unwrap();
        let swap = Permutation::transposition(0, 1);
        assert!(verify_conjugation(&t, &s, &AllInjective, &swap, 8).unwrap().passed);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let pi = random_interval_perm(&mut rng, 8);
            let report = verify_conjugation(&t, &s, &AllInjective, &pi, 8).unwrap();
            assert!(report.passed, "{report:?}");
        }
        let bad = Permutation::transposition(0, 9);
        assert!(matches!(
            verify_conjugation(&t, &s, &AllInjective, &bad, 8),
            Err(TreeError::Precondition(_))
        ));
    }

    #[test]
    fn realize_extends_partial_injections() {
        let g = AllInjective.realize(&[5, 0, 9]).unwrap();
        assert_eq!((0..3).map(|i| g.apply(i).unwrap()).collect::<Vec<_>>(), vec![5, 0, 9]);
        assert!(g.verify_window(20).passed);
    }

    #[test]
    fn jumps_over_an_unbounded_tree() {
        let mode = TreeMode::UnboundedOrbits { n: (1..=6).collect() };
        let tree = Arc::new(build_tree(Arc::new(FullGroup), mode, 6).unwrap());
        let d = TreeFamily::new(tree).unwrap();
        let t = build_e_tree(&d, ETreeVariant::Breakpoints { n: vec![0, 1, 3] }, 2).unwrap();
        assert_eq!(t.bounds, vec![1, 5]);
        assert_eq!(t.jumps, vec![0, 4, 5]);
        for (r, &b) in t.bounds.iter().enumerate() {
            let lo = if r == 0 { 0 } else { [0, 1, 3][r] };
            for &i in &t.jumps[lo..[0, 1, 3][r + 1]] {
                assert!(d.branching(i).unwrap() >= b);
            }
        }
        let s = build_s(&t).unwrap();
        let pi = Permutation::transposition(1, 2);
        let report = verify_conjugation(&t, &s, &d, &pi, 3).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(verify_conjugation(&t, &s, &d, &Permutation::transposition(0, 1), 3).is_err());
    }

    #[test]
    fn binary_tree_family_cannot_support_three_jumps() {
        let g = Arc::new(StabilizerGroup::new(Partition::canonical_a0()));
        let tree = Arc::new(build_tree(g, TreeMode::BinaryOrbits, 6).unwrap());
        let d = TreeFamily::new(tree).unwrap();
        let err = build_e_tree(&d, ETreeVariant::Breakpoints { n: vec![0, 1, 2, 3] }, 3).err().unwrap();
        assert!(matches!(err, TreeError::HypothesisFailure { level: 3, .. }), "{err}");
        let ok = build_e_tree(&d, ETreeVariant::Breakpoints { n: vec![0, 1, 2] }, 2).unwrap();
        assert_eq!(ok.bounds, vec![1, 2]);
    }
}

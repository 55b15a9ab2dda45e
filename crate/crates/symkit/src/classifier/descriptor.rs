//! Group descriptors and their textual grammar.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::ClassifierError;
use crate::metrics::{GeneralizedMetric, MetricError};
use crate::partitions::Partition;
use crate::perm::Cursor;
use crate::perm::{Permutation, Point};
use crate::trees::{
    FiniteGroup, FixingGroup, FullGroup, GroupOracle, OrbitResult, StabilizerGroup, TreeError, TrivialGroup,
};

/// Points scanned when listing an orbit of an FN group.
const FN_HORIZON: Point = 1 << 16;

#[derive(Clone)]
pub enum GroupDescriptor {
    FullS,
    PartitionStabilizer(Partition),
    PointwiseStabilizer {
        inner: Box<GroupDescriptor>,
        gamma: BTreeSet<Point>,
    },
    FnGroup(GeneralizedMetric),
    OracleGroup(Arc<dyn GroupOracle>),
    TrivialGroup,
    FiniteSupportGroup {
        gens: Vec<Permutation>,
        group: Arc<FiniteGroup>,
    },
}

impl fmt::Debug for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupDescriptor({self})")
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDescriptor::FullS => write!(f, "full"),
            GroupDescriptor::TrivialGroup => write!(f, "trivial"),
            GroupDescriptor::PartitionStabilizer(a) => write!(f, "stab:{}", a.name()),
            GroupDescriptor::PointwiseStabilizer { inner, gamma } => {
                let pts: Vec<String> = gamma.iter().map(|p| p.to_string()).collect();
                write!(f, "fix({inner};{})", pts.join(","))
            }
            GroupDescriptor::FnGroup(d) => write!(f, "fn:metric:{}", d.name()),
            GroupDescriptor::OracleGroup(o) => write!(f, "oracle:{}", o.name()),
            GroupDescriptor::FiniteSupportGroup { gens, .. } => {
                let g: Vec<String> = gens.iter().map(|p| p.to_text()).collect();
                write!(f, "gens:[{}]", g.join(","))
            }
        }
    }
}

/// Uncertified oracles reachable as `oracle:<name>`.
pub fn oracle_by_name(name: &str) -> Option<Arc<dyn GroupOracle>> {
    struct Named(&'static str, Arc<dyn GroupOracle>);
    impl GroupOracle for Named {
        fn name(&self) -> String {
            self.0.into()
        }
        fn orbit(&self, g: &BTreeSet<Point>, a: Point, n: usize) -> Result<OrbitResult, TreeError> {
            self.1.orbit(g, a, n)
        }
        fn act(&self, g: &BTreeSet<Point>, a: Point, t: Point) -> Result<Permutation, TreeError> {
            self.1.act(g, a, t)
        }
        fn closed(&self) -> bool {
            self.1.closed()
        }
    }
    let (label, inner): (&'static str, Arc<dyn GroupOracle>) = match name {
        "full" => ("full", Arc::new(FullGroup)),
        "trivial" => ("trivial", Arc::new(TrivialGroup)),
        "pairs" => ("pairs", Arc::new(StabilizerGroup::new(Partition::pairs()))),
        "a0" => ("a0", Arc::new(StabilizerGroup::new(Partition::canonical_a0()))),
        "intervals-growing" => (
            "intervals-growing",
            Arc::new(StabilizerGroup::new(Partition::intervals_growing())),
        ),
        _ => return None,
    };
    Some(Arc::new(Named(label, inner)))
}

/// Orbits of `FN(d)_(Γ)`: the transposition `(α β)` has norm `d(α, β)`, so
/// the orbit of `α ∉ Γ` is `{β ∉ Γ : d(α, β) < ∞}` together with `α`.
pub struct FnOracle {
    pub metric: GeneralizedMetric,
}

impl FnOracle {
    fn finite(&self, a: Point, b: Point) -> Result<bool, MetricError> {
        match self.metric.dist(a, b) {
            Ok(d) => Ok(d.is_finite()),
            Err(_) => Ok(self.metric.upper_dist(a, b)?.is_finite()),
        }
    }
}

fn metric_err(e: MetricError) -> TreeError {
    TreeError::Precondition(e.to_string())
}

impl GroupOracle for FnOracle {
    fn name(&self) -> String {
        format!("fn:metric:{}", self.metric.name())
    }

    fn orbit(&self, gamma: &BTreeSet<Point>, alpha: Point, n: usize) -> Result<OrbitResult, TreeError> {
        if gamma.contains(&alpha) {
            return Ok(OrbitResult::Full(vec![alpha]));
        }
        if let Some(Ok(class)) = self.metric.finite_class(alpha, n.max(1)) {
            let mut pts = vec![alpha];
            pts.extend(class.into_iter().filter(|x| *x != alpha && !gamma.contains(x)));
            return Ok(OrbitResult::Full(pts));
        }
        let mut pts = vec![alpha];
        for y in 0..FN_HORIZON {
            if pts.len() >= n {
                break;
            }
            if y != alpha && !gamma.contains(&y) && self.finite(alpha, y).map_err(metric_err)? {
                pts.push(y);
            }
        }
        Ok(OrbitResult::AtLeast(pts))
    }

    fn act(&self, gamma: &BTreeSet<Point>, alpha: Point, target: Point) -> Result<Permutation, TreeError> {
        if alpha == target {
            return Ok(Permutation::identity());
        }
        if gamma.contains(&alpha) || gamma.contains(&target) || !self.finite(alpha, target).map_err(metric_err)? {
            return Err(TreeError::Precondition(format!("{target} is not in the orbit of {alpha}")));
        }
        Ok(Permutation::transposition(alpha, target))
    }

    fn closed(&self) -> bool {
        false
    }
}

impl GroupDescriptor {
    pub fn finite_support(gens: Vec<Permutation>) -> Result<Self, ClassifierError> {
        let group = Arc::new(FiniteGroup::new(&gens)?);
        Ok(GroupDescriptor::FiniteSupportGroup { gens, group })
    }

    /// `G_(Γ)`; nested pointwise stabilizers merge their sets.
    pub fn fixing(self, gamma: BTreeSet<Point>) -> Self {
        match self {
            GroupDescriptor::PointwiseStabilizer { inner, gamma: g0 } => GroupDescriptor::PointwiseStabilizer {
                inner,
                gamma: g0.union(&gamma).copied().collect(),
            },
            other => GroupDescriptor::PointwiseStabilizer {
                inner: Box::new(other),
                gamma,
            },
        }
    }

    /// The partition behind a partition metric, if `d` is one.
    pub(crate) fn partition_of_metric(d: &GeneralizedMetric) -> Option<Partition> {
        let name = d.name();
        let text = name.strip_prefix("partition@")?;
        Partition::parse(text).ok()
    }

    /// Uniform orbit access.
    pub fn oracle(&self) -> Arc<dyn GroupOracle> {
        match self {
            GroupDescriptor::FullS => Arc::new(FullGroup),
            GroupDescriptor::TrivialGroup => Arc::new(TrivialGroup),
            GroupDescriptor::PartitionStabilizer(a) => Arc::new(StabilizerGroup::new(a.clone())),
            GroupDescriptor::PointwiseStabilizer { inner, gamma } => Arc::new(FixingGroup {
                inner: inner.oracle(),
                gamma: gamma.clone(),
            }),
            GroupDescriptor::FnGroup(d) => Arc::new(FnOracle { metric: d.clone() }),
            GroupDescriptor::OracleGroup(o) => o.clone(),
            GroupDescriptor::FiniteSupportGroup { group, .. } => group.clone(),
        }
    }

    pub fn parse(src: &str) -> Result<Self, ClassifierError> {
        let lead = src.len() - src.trim_start().len();
        parse_at(src.trim(), lead)
    }
}

fn perr(pos: usize, msg: impl Into<String>) -> ClassifierError {
    ClassifierError::Parse { pos, msg: msg.into() }
}

/// Byte offset of the last `;` outside brackets.
fn last_top_level_semicolon(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    let mut found = None;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ';' if depth == 0 => found = Some(i),
            _ => {}
        }
    }
    found
}

fn parse_at(s: &str, base: usize) -> Result<GroupDescriptor, ClassifierError> {
    match s {
        "full" => return Ok(GroupDescriptor::FullS),
        "trivial" => return Ok(GroupDescriptor::TrivialGroup),
        _ => {}
    }
    if let Some(rest) = s.strip_prefix("stab:") {
        let a = Partition::parse(rest).map_err(|e| perr(base + 5, e.to_string()))?;
        return Ok(GroupDescriptor::PartitionStabilizer(a));
    }
    if let Some(rest) = s.strip_prefix("fn:") {
        let d = GeneralizedMetric::parse(rest).map_err(|e| perr(base + 3, e.to_string()))?;
        return Ok(GroupDescriptor::FnGroup(d));
    }
    if let Some(rest) = s.strip_prefix("oracle:") {
        return oracle_by_name(rest.trim())
            .map(GroupDescriptor::OracleGroup)
            .ok_or_else(|| perr(base + 7, format!("unknown oracle `{rest}`")));
    }
    if let Some(rest) = s.strip_prefix("gens:") {
        let mut c = Cursor::new(rest);
        let at = |c: &Cursor, msg: String| perr(base + 5 + c.pos, msg);
        c.expect("[").map_err(|e| at(&c, e.to_string()))?;
        let mut gens = Vec::new();
        if !c.eat("]") {
            loop {
                let p = crate::perm::parse_in(&mut c).map_err(|e| match e {
                    crate::perm::PermError::Parse { pos, msg } => perr(base + 5 + pos, msg),
                    other => perr(base + 5, other.to_string()),
                })?;
                gens.push(p);
                if c.eat("]") {
                    break;
                }
                c.expect(",").map_err(|e| at(&c, e.to_string()))?;
            }
        }
        if !c.at_end() {
            return Err(at(&c, "unexpected trailing input".into()));
        }
        return GroupDescriptor::finite_support(gens);
    }
    if let Some(body) = s.strip_prefix("fix(") {
        let body = body
            .strip_suffix(')')
            .ok_or_else(|| perr(base + s.len(), "expected `)` closing `fix(`"))?;
        let semi = last_top_level_semicolon(body).ok_or_else(|| perr(base + 4, "expected `;` before the fixed points"))?;
        let (inner, pts) = (&body[..semi], &body[semi + 1..]);
        let lead = inner.len() - inner.trim_start().len();
        let inner = parse_at(inner.trim(), base + 4 + lead)?;
        let mut gamma = BTreeSet::new();
        let mut off = base + 4 + semi + 1;
        for part in pts.split(',') {
            let t = part.trim();
            if !t.is_empty() {
                let p: Point = t.parse().map_err(|_| perr(off, format!("bad point `{t}`")))?;
                gamma.insert(p);
            }
            off += part.len() + 1;
        }
        return Ok(inner.fixing(gamma));
    }
    let word: String = s.chars().take_while(|c| c.is_alphanumeric() || *c == '-').collect();
    Err(perr(base, format!("unknown descriptor `{word}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(p: &[Point]) -> BTreeSet<Point> {
        p.iter().copied().collect()
    }

    #[test]
    fn grammar_round_trips() {
        for src in [
            "full",
            "trivial",
            "stab:partition:pairs",
            "fix(stab:partition:pairs;0,1,2)",
            "fn:metric:standard-omega",
            "oracle:full",
            "gens:[cycles:(0 1 2),cycles:(3 4)]",
        ] {
            let d = GroupDescriptor::parse(src).unwrap();
            assert_eq!(d.to_string(), src);
        }
    }

    #[test]
    fn nested_fixing_merges() {
        let d = GroupDescriptor::parse("fix(fix(full;1);0, 2)").unwrap();
        assert_eq!(d.to_string(), "fix(full;0,1,2)");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = GroupDescriptor::parse("fix(bogus;1)").unwrap_err();
        assert!(matches!(e, ClassifierError::Parse { pos: 4, .. }), "{e}");
        let e = GroupDescriptor::parse("fix(full;1,x)").unwrap_err();
        assert!(matches!(e, ClassifierError::Parse { pos: 11, .. }), "{e}");
        assert!(GroupDescriptor::parse("stab:partition:nope").is_err());
        assert!(GroupDescriptor::parse("gens:[cycles:(0 1)").is_err());
        assert!(GroupDescriptor::parse("oracle:nope").is_err());
    }

    #[test]
    fn orbit_adapter_examples() {
        let full = GroupDescriptor::FullS.oracle();
        assert!(!full.orbit(&set(&[0]), 1, 16).unwrap().is_full());
        let pairs = GroupDescriptor::parse("stab:partition:pairs").unwrap().oracle();
        assert_eq!(pairs.orbit(&set(&[]), 0, 16).unwrap(), OrbitResult::Full(vec![0, 1]));
        assert_eq!(pairs.orbit(&set(&[1]), 0, 16).unwrap(), OrbitResult::Full(vec![0]));
    }

    #[test]
    fn fn_orbits() {
        let omega = GroupDescriptor::parse("fn:metric:standard-omega").unwrap().oracle();
        assert_eq!(omega.orbit(&set(&[1]), 0, 4).unwrap(), OrbitResult::AtLeast(vec![0, 2, 3, 4]));
        let discrete = GroupDescriptor::parse("fn:metric:discrete").unwrap().oracle();
        assert_eq!(discrete.orbit(&set(&[]), 5, 4).unwrap(), OrbitResult::Full(vec![5]));
        let pm = GroupDescriptor::parse("fn:metric:partition@partition:pairs").unwrap().oracle();
        assert_eq!(pm.orbit(&set(&[]), 3, 8).unwrap(), OrbitResult::Full(vec![3, 2]));
    }
}

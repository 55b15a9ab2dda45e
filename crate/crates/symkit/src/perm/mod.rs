//! Lazy two-sided permutations of ℕ.
//!
//! Permutations act on the right: `apply(p, a)` is `a·p`, and a word
//! `[p, q]` sends `a` to `(a·p)·q`.

mod limit;
mod rules;
mod text;
mod zembed;

pub use limit::{limit, ConvergentSequence, SeqTerm, TermProducer};
pub use rules::{builtin_rule, BlockReverse, BlockRotate, BlockShiftZ, FnRule, IdentityRule, ShiftZ, SwapPairs};
pub use text::{parse_perm, PermJson};
pub(crate) use text::{parse_in, Cursor};
pub use zembed::ZEmbedding;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::Rational;

/// A point of the ground set; the fixed enumeration is `ε_i = i`.
pub type Point = usize;

/// Default number of primitive steps allowed per evaluation.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("evaluation budget of {budget} steps exhausted")]
    Budget { budget: u64 },
    #[error("rule `{rule}` is undefined at {point}")]
    Undefined { rule: String, point: Point },
    #[error("convergence condition violated at level {level}, point {point}: {reason}")]
    ConvergenceViolated {
        level: usize,
        point: Point,
        reason: String,
    },
    #[error("sequence ends at level {available} before point {point} stabilizes")]
    BeyondDepth { point: Point, available: usize },
    #[error("permutation carries no finite support certificate")]
    NoSupportCertificate,
    #[error("cycles are not disjoint: {0} appears twice")]
    OverlappingCycles(Point),
    #[error("map is not a bijection of its support: {0}")]
    NotBijective(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Step counter shared by one evaluation query.
#[derive(Debug, Clone)]
pub struct Budget {
    total: u64,
    used: u64,
}

impl Budget {
    pub fn new(total: u64) -> Self {
        Budget { total, used: 0 }
    }

    pub fn tick(&mut self) -> Result<(), PermError> {
        self.used += 1;
        if self.used > self.total {
            Err(PermError::Budget { budget: self.total })
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_BUDGET)
    }
}

/// A named rule giving both directions of a permutation.
///
/// Rules must be pure. `forward` and `backward` are expected to be mutually
/// inverse; `verify_window` checks this on initial segments.
pub trait Rule: Send + Sync {
    /// Text form without the `rule:` prefix, e.g. `shift-z;by=1`.
    fn name(&self) -> String;
    fn forward(&self, x: Point) -> Result<Point, PermError>;
    fn backward(&self, x: Point) -> Result<Point, PermError>;
}

/// A certified bound on `‖g‖_d` for the metric with the given name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisplacementBound {
    pub metric: String,
    pub bound: Rational,
}

/// Pairs `(α_j, β_j)`, `j ≥ 1`, swapped by a permutation with `d(α_j, β_j) ≥ j`.
#[derive(Clone)]
pub struct GrowthCertificate {
    pub metric: String,
    pub pairs: Arc<dyn Fn(usize) -> Result<(Point, Point), PermError> + Send + Sync>,
}

impl fmt::Debug for GrowthCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrowthCertificate({})", self.metric)
    }
}

#[derive(Debug, Clone, Default)]
struct FiniteMap {
    fwd: BTreeMap<Point, Point>,
    bwd: BTreeMap<Point, Point>,
}

enum Form {
    Finite(FiniteMap),
    Rule { rule: Arc<dyn Rule>, inverted: bool },
    Word(Vec<Permutation>),
    Limit { seq: Arc<ConvergentSequence>, inverted: bool },
    Memo(Memo),
}

struct Memo {
    inner: Permutation,
    fwd: Mutex<HashMap<Point, Point>>,
    bwd: Mutex<HashMap<Point, Point>>,
}

struct Inner {
    form: Form,
    support_bound: Option<Point>,
    displacement: Vec<DisplacementBound>,
    block_certs: Vec<String>,
    growth: Option<GrowthCertificate>,
}

/// A permutation of ℕ given lazily in both directions.
#[derive(Clone)]
pub struct Permutation {
    inner: Arc<Inner>,
}

/// Outcome of checking two-sided consistency on `{0..n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowReport {
    pub window: usize,
    pub passed: bool,
    pub failure: Option<WindowFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowFailure {
    pub point: Point,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn add(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl Permutation {
    fn from_form(form: Form) -> Self {
        let support_bound = match &form {
            Form::Finite(m) => Some(m.fwd.keys().next_back().map_or(0, |&k| k + 1)),
            Form::Word(fs) => fs
                .iter()
                .map(|f| f.support_bound())
                .try_fold(0, |acc, b| b.map(|b| acc.max(b))),
            Form::Memo(m) => m.inner.support_bound(),
            Form::Rule { .. } | Form::Limit { .. } => None,
        };
        Permutation {
            inner: Arc::new(Inner {
                form,
                support_bound,
                displacement: Vec::new(),
                block_certs: Vec::new(),
                growth: None,
            }),
        }
    }

    fn with_inner(&self, f: impl FnOnce(&mut Inner)) -> Self {
        let old = &self.inner;
        let form = match &old.form {
            Form::Finite(m) => Form::Finite(m.clone()),
            Form::Rule { rule, inverted } => Form::Rule {
                rule: rule.clone(),
                inverted: *inverted,
            },
            Form::Word(fs) => Form::Word(fs.clone()),
            Form::Limit { seq, inverted } => Form::Limit {
                seq: seq.clone(),
                inverted: *inverted,
            },
            Form::Memo(m) => Form::Memo(Memo {
                inner: m.inner.clone(),
                fwd: Mutex::new(m.fwd.lock().unwrap().clone()),
                bwd: Mutex::new(m.bwd.lock().unwrap().clone()),
            }),
        };
        let mut inner = Inner {
            form,
            support_bound: old.support_bound,
            displacement: old.displacement.clone(),
            block_certs: old.block_certs.clone(),
            growth: old.growth.clone(),
        };
        f(&mut inner);
        Permutation {
            inner: Arc::new(inner),
        }
    }

    pub fn identity() -> Self {
        Self::from_form(Form::Finite(FiniteMap::default()))
    }

    /// Builds a finite-support permutation from disjoint cycles.
    pub fn from_cycles<C: AsRef<[Point]>>(cycles: &[C]) -> Result<Self, PermError> {
        let mut seen = BTreeSet::new();
        let mut map = BTreeMap::new();
        for c in cycles {
            let c = c.as_ref();
            for &x in c {
                if !seen.insert(x) {
                    return Err(PermError::OverlappingCycles(x));
                }
            }
            if c.len() < 2 {
                continue;
            }
            for (i, &x) in c.iter().enumerate() {
                map.insert(x, c[(i + 1) % c.len()]);
            }
        }
        Self::from_map(map)
    }

    pub fn transposition(a: Point, b: Point) -> Self {
        if a == b {
            return Self::identity();
        }
        Self::from_cycles(&[[a, b]]).expect("distinct points")
    }

    /// Builds a finite-support permutation from `x ↦ map[x]`; unlisted points are fixed.
    pub fn from_map(map: BTreeMap<Point, Point>) -> Result<Self, PermError> {
        let mut fm = FiniteMap::default();
        for (&x, &y) in &map {
            if x == y {
                continue;
            }
            if fm.bwd.insert(y, x).is_some() {
                return Err(PermError::NotBijective(format!("{y} has two preimages")));
            }
            fm.fwd.insert(x, y);
        }
        let dom: BTreeSet<_> = fm.fwd.keys().collect();
        let ran: BTreeSet<_> = fm.bwd.keys().collect();
        if dom != ran {
            return Err(PermError::NotBijective(
                "moved points do not map onto themselves".into(),
            ));
        }
        Ok(Self::from_form(Form::Finite(fm)))
    }

    /// Builds a finite-support permutation from its images on `{0..n-1}`.
    pub fn from_images(images: &[Point]) -> Result<Self, PermError> {
        Self::from_map(images.iter().copied().enumerate().collect())
    }

    pub fn from_rule(rule: Arc<dyn Rule>) -> Self {
        Self::from_form(Form::Rule {
            rule,
            inverted: false,
        })
    }

    /// The left-to-right product of `factors`.
    pub fn word(factors: Vec<Permutation>) -> Self {
        Self::from_form(Form::Word(factors))
    }

    pub fn limit(seq: Arc<ConvergentSequence>) -> Self {
        Self::from_form(Form::Limit {
            seq,
            inverted: false,
        })
    }

    /// Wraps `self` with an idempotent evaluation cache.
    pub fn memoized(&self) -> Self {
        let p = Self::from_form(Form::Memo(Memo {
            inner: self.clone(),
            fwd: Mutex::new(HashMap::new()),
            bwd: Mutex::new(HashMap::new()),
        }));
        let (d, b, g) = (
            self.inner.displacement.clone(),
            self.inner.block_certs.clone(),
            self.inner.growth.clone(),
        );
        p.with_inner(|i| {
            i.displacement = d;
            i.block_certs = b;
            i.growth = g;
        })
    }

    /// `self` followed by `other`. Finite-support operands multiply out exactly.
    pub fn then(&self, other: &Permutation) -> Permutation {
        if let (Some(a), Some(b)) = (self.finite_map(), other.finite_map()) {
            let mut map = BTreeMap::new();
            for &x in a.fwd.keys().chain(b.fwd.keys()) {
                let y = a.fwd.get(&x).copied().unwrap_or(x);
                let z = b.fwd.get(&y).copied().unwrap_or(y);
                map.insert(x, z);
            }
            return Self::from_map(map).expect("product of bijections");
        }
        Self::word(vec![self.clone(), other.clone()])
    }

    /// `other^{-1} · self · other`, the conjugate acting on images under `other`.
    pub fn conjugate_by(&self, other: &Permutation) -> Result<Permutation, PermError> {
        if let Some(m) = self.finite_map() {
            let mut map = BTreeMap::new();
            for (&x, &y) in &m.fwd {
                map.insert(other.apply(x)?, other.apply(y)?);
            }
            return Self::from_map(map);
        }
        Ok(Self::word(vec![other.inverse(), self.clone(), other.clone()]))
    }

    pub fn inverse(&self) -> Permutation {
        let form = match &self.inner.form {
            Form::Finite(m) => Form::Finite(FiniteMap {
                fwd: m.bwd.clone(),
                bwd: m.fwd.clone(),
            }),
            Form::Rule { rule, inverted } => Form::Rule {
                rule: rule.clone(),
                inverted: !inverted,
            },
            Form::Word(fs) => Form::Word(fs.iter().rev().map(|f| f.inverse()).collect()),
            Form::Limit { seq, inverted } => Form::Limit {
                seq: seq.clone(),
                inverted: !inverted,
            },
            Form::Memo(m) => return m.inner.inverse().memoized(),
        };
        let p = Self::from_form(form);
        let d = self.inner.displacement.clone();
        let b = self.inner.block_certs.clone();
        let sb = self.inner.support_bound;
        let growth = self.inner.growth.clone();
        p.with_inner(|i| {
            i.displacement = d;
            i.growth = growth;
            i.block_certs = b;
            i.support_bound = i.support_bound.or(sb);
        })
    }

    pub fn apply(&self, x: Point) -> Result<Point, PermError> {
        self.apply_with(x, &mut Budget::default())
    }

    pub fn apply_inv(&self, x: Point) -> Result<Point, PermError> {
        self.apply_inv_with(x, &mut Budget::default())
    }

    pub fn apply_with(&self, x: Point, budget: &mut Budget) -> Result<Point, PermError> {
        self.eval(x, false, budget)
    }

    pub fn apply_inv_with(&self, x: Point, budget: &mut Budget) -> Result<Point, PermError> {
        self.eval(x, true, budget)
    }

    fn eval(&self, x: Point, inv: bool, budget: &mut Budget) -> Result<Point, PermError> {
        match &self.inner.form {
            Form::Finite(m) => {
                budget.tick()?;
                let map = if inv { &m.bwd } else { &m.fwd };
                Ok(map.get(&x).copied().unwrap_or(x))
            }
            Form::Rule { rule, inverted } => {
                budget.tick()?;
                if inv ^ inverted {
                    rule.backward(x)
                } else {
                    rule.forward(x)
                }
            }
            Form::Word(fs) => {
                let mut y = x;
                if inv {
                    for f in fs.iter().rev() {
                        y = f.eval(y, true, budget)?;
                    }
                } else {
                    for f in fs {
                        y = f.eval(y, false, budget)?;
                    }
                }
                Ok(y)
            }
            Form::Limit { seq, inverted } => {
                budget.tick()?;
                if inv ^ inverted {
                    seq.backward(x, budget)
                } else {
                    seq.forward(x, budget)
                }
            }
            Form::Memo(m) => {
                let cache = if inv { &m.bwd } else { &m.fwd };
                if let Some(&y) = cache.lock().unwrap().get(&x) {
                    return Ok(y);
                }
                let y = m.inner.eval(x, inv, budget)?;
                cache.lock().unwrap().insert(x, y);
                let other = if inv { &m.fwd } else { &m.bwd };
                other.lock().unwrap().insert(y, x);
                Ok(y)
            }
        }
    }

    /// Checks both round trips and injectivity on `{0..n-1}`.
    pub fn verify_window(&self, n: usize) -> WindowReport {
        let fail = |point, reason: String| WindowReport {
            window: n,
            passed: false,
            failure: Some(WindowFailure { point, reason }),
        };
        let mut seen: HashMap<Point, Point> = HashMap::with_capacity(n);
        for a in 0..n {
            let y = match self.apply(a) {
                Ok(y) => y,
                Err(e) => return fail(a, format!("forward: {e}")),
            };
            match self.apply_inv(y) {
                Ok(b) if b == a => {}
                Ok(b) => return fail(a, format!("backward({y}) = {b}, expected {a}")),
                Err(e) => return fail(a, format!("backward({y}): {e}")),
            }
            let z = match self.apply_inv(a) {
                Ok(z) => z,
                Err(e) => return fail(a, format!("backward: {e}")),
            };
            match self.apply(z) {
                Ok(b) if b == a => {}
                Ok(b) => return fail(a, format!("forward({z}) = {b}, expected {a}")),
                Err(e) => return fail(a, format!("forward({z}): {e}")),
            }
            if let Some(prev) = seen.insert(y, a) {
                return fail(a, format!("{prev} and {a} both map to {y}"));
            }
        }
        WindowReport {
            window: n,
            passed: true,
            failure: None,
        }
    }

    pub fn support_bound(&self) -> Option<Point> {
        self.inner.support_bound
    }

    /// Attaches a certificate that every moved point is below `bound`.
    pub fn with_support_bound(&self, bound: Point) -> Permutation {
        self.with_inner(|i| i.support_bound = Some(bound))
    }

    pub fn with_displacement(&self, metric: &str, bound: Rational) -> Permutation {
        let cert = DisplacementBound {
            metric: metric.to_string(),
            bound,
        };
        self.with_inner(|i| i.displacement.push(cert))
    }

    /// Attaches a certificate that the permutation preserves every block of
    /// the partition with the given name.
    pub fn with_block_certificate(&self, partition: &str) -> Permutation {
        let name = partition.to_string();
        self.with_inner(|i| {
            if !i.block_certs.contains(&name) {
                i.block_certs.push(name)
            }
        })
    }

    pub fn with_growth(&self, cert: GrowthCertificate) -> Permutation {
        self.with_inner(|i| i.growth = Some(cert))
    }

    pub fn displacement_bound(&self, metric: &str) -> Option<Rational> {
        self.inner
            .displacement
            .iter()
            .filter(|d| d.metric == metric)
            .map(|d| d.bound)
            .min()
    }

    pub fn has_block_certificate(&self, partition: &str) -> bool {
        self.inner.block_certs.iter().any(|b| b == partition)
    }

    pub fn growth_certificate(&self) -> Option<&GrowthCertificate> {
        self.inner.growth.as_ref()
    }

    /// The factors of a word, or of a memoized word.
    pub fn factors(&self) -> Option<&[Permutation]> {
        match &self.inner.form {
            Form::Word(fs) => Some(fs),
            Form::Memo(m) => m.inner.factors(),
            _ => None,
        }
    }

    fn finite_map(&self) -> Option<&FiniteMap> {
        match &self.inner.form {
            Form::Finite(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_explicit_finite(&self) -> bool {
        self.finite_map().is_some()
    }

    /// Moved points, computed exactly from the support certificate.
    pub fn support(&self) -> Result<BTreeSet<Point>, PermError> {
        if let Some(m) = self.finite_map() {
            return Ok(m.fwd.keys().copied().collect());
        }
        let b = self.support_bound().ok_or(PermError::NoSupportCertificate)?;
        let mut out = BTreeSet::new();
        for x in 0..b {
            if self.apply(x)? != x {
                out.insert(x);
            }
        }
        Ok(out)
    }

    /// Multiplies out a certified finite-support permutation.
    pub fn to_finite(&self) -> Result<Permutation, PermError> {
        if self.is_explicit_finite() {
            return Ok(self.clone());
        }
        let b = self.support_bound().ok_or(PermError::NoSupportCertificate)?;
        let mut map = BTreeMap::new();
        for x in 0..b {
            map.insert(x, self.apply(x)?);
        }
        Self::from_map(map)
    }

    /// Disjoint nontrivial cycles, each starting at its least point.
    pub fn cycles(&self) -> Result<Vec<Vec<Point>>, PermError> {
        let f = self.to_finite()?;
        let m = f.finite_map().expect("finite form");
        let mut done = BTreeSet::new();
        let mut out = Vec::new();
        for &start in m.fwd.keys() {
            if done.contains(&start) {
                continue;
            }
            let mut c = vec![start];
            done.insert(start);
            let mut x = m.fwd[&start];
            while x != start {
                done.insert(x);
                c.push(x);
                x = m.fwd[&x];
            }
            out.push(c);
        }
        Ok(out)
    }

    pub fn parity(&self) -> Result<Parity, PermError> {
        let swaps: usize = self.cycles()?.iter().map(|c| c.len() - 1).sum();
        Ok(if swaps % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        })
    }

    /// Text form per the `cycles:` / `rule:` / `word:` grammar. Limits and
    /// memo wrappers have no text form and render as `limit` / their inner form.
    pub fn to_text(&self) -> String {
        match &self.inner.form {
            Form::Finite(_) => {
                let cs = self.cycles().expect("finite form");
                let mut s = String::from("cycles:");
                for c in cs {
                    s.push('(');
                    let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                    s.push_str(&parts.join(" "));
                    s.push(')');
                }
                s
            }
            Form::Rule {
                rule,
                inverted: false,
            } => format!("rule:{}", rule.name()),
            Form::Rule {
                rule,
                inverted: true,
            } => format!("word:[rule:{}^-1]", rule.name()),
            Form::Word(fs) => {
                let parts: Vec<String> = fs.iter().map(|f| f.factor_text()).collect();
                format!("word:[{}]", parts.join(","))
            }
            Form::Limit { inverted, .. } => {
                if *inverted {
                    "limit^-1".into()
                } else {
                    "limit".into()
                }
            }
            Form::Memo(m) => m.inner.to_text(),
        }
    }

    fn factor_text(&self) -> String {
        match &self.inner.form {
            Form::Rule {
                rule,
                inverted: true,
            } => format!("rule:{}^-1", rule.name()),
            _ => self.to_text(),
        }
    }

    /// Images of `{0..n-1}`.
    pub fn window_images(&self, n: usize) -> Result<Vec<Point>, PermError> {
        (0..n).map(|x| self.apply(x)).collect()
    }

    /// True when both permutations agree in both directions on `{0..n-1}`.
    pub fn agrees_on(&self, other: &Permutation, n: usize) -> Result<bool, PermError> {
        for x in 0..n {
            if self.apply(x)? != other.apply(x)? || self.apply_inv(x)? != other.apply_inv(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({})", self.to_text())
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cyc(c: &[&[Point]]) -> Permutation {
        Permutation::from_cycles(c).unwrap()
    }

    #[test]
    fn apply_basics() {
        assert_eq!(Permutation::identity().apply(7).unwrap(), 7);
        assert_eq!(cyc(&[&[0, 1, 2]]).apply(2).unwrap(), 0);
        let w = Permutation::word(vec![cyc(&[&[0, 1]]), cyc(&[&[1, 2]])]);
        assert_eq!(w.apply(0).unwrap(), 2);
    }

    #[test]
    fn inverse_of_cycle() {
        let p = cyc(&[&[0, 1, 2]]).inverse();
        assert_eq!(p.cycles().unwrap(), vec![vec![0, 2, 1]]);
        assert_eq!(Permutation::identity().inverse().cycles().unwrap().len(), 0);
    }

    #[test]
    fn overlapping_cycles_rejected() {
        assert_eq!(
            Permutation::from_cycles(&[vec![0, 1], vec![1, 2]]).unwrap_err(),
            PermError::OverlappingCycles(1)
        );
    }

    #[test]
    fn window_checks() {
        assert!(Permutation::identity().verify_window(100).passed);
        assert!(cyc(&[&[0, 1], &[2, 3]]).verify_window(10).passed);
        let succ = FnRule::new(
            "succ",
            |n| Ok(n + 1),
            |n| {
                n.checked_sub(1).ok_or(PermError::Undefined {
                    rule: "succ".into(),
                    point: n,
                })
            },
        );
        let r = Permutation::from_rule(Arc::new(succ)).verify_window(10);
        assert!(!r.passed);
        assert_eq!(r.failure.unwrap().point, 0);
    }

    #[test]
    fn parity_examples() {
        assert_eq!(Permutation::identity().parity().unwrap(), Parity::Even);
        assert_eq!(cyc(&[&[0, 1]]).parity().unwrap(), Parity::Odd);
        assert_eq!(cyc(&[&[0, 1, 2]]).parity().unwrap(), Parity::Even);
        let shift = Permutation::from_rule(Arc::new(ShiftZ::new(1)));
        assert_eq!(shift.parity().unwrap_err(), PermError::NoSupportCertificate);
    }

    #[test]
    fn budget_is_enforced() {
        let p = cyc(&[&[0, 1]]);
        let w = Permutation::word(vec![p; 50]);
        let mut b = Budget::new(10);
        assert_eq!(
            w.apply_with(0, &mut b).unwrap_err(),
            PermError::Budget { budget: 10 }
        );
    }

    #[test]
    fn memo_matches_inner() {
        let p = Permutation::word(vec![cyc(&[&[0, 5, 3]]), cyc(&[&[1, 5]])]);
        let m = p.memoized();
        for x in 0..10 {
            assert_eq!(m.apply(x).unwrap(), p.apply(x).unwrap());
            assert_eq!(m.apply_inv(x).unwrap(), p.apply_inv(x).unwrap());
        }
    }

    #[test]
    fn conjugate_moves_cycles() {
        let t = cyc(&[&[0, 1]]);
        let f = cyc(&[&[0, 4], &[1, 7]]);
        assert_eq!(t.conjugate_by(&f).unwrap().cycles().unwrap(), vec![vec![4, 7]]);
    }

    fn finite_perm() -> impl Strategy<Value = Permutation> {
        Just((0..12usize).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::from_images(&v).unwrap())
    }

    fn any_perm() -> impl Strategy<Value = Permutation> {
        prop_oneof![
            finite_perm(),
            (-3i64..4).prop_map(|k| Permutation::from_rule(Arc::new(ShiftZ::new(k)))),
            Just(Permutation::from_rule(Arc::new(SwapPairs))),
            (2usize..6, 0usize..5)
                .prop_map(|(k, s)| Permutation::from_rule(Arc::new(BlockRotate::new(k, s)))),
        ]
    }

    proptest! {
        #[test]
        fn associativity(a in any_perm(), b in any_perm(), c in any_perm()) {
            let l = Permutation::word(vec![a.clone(), Permutation::word(vec![b.clone(), c.clone()])]);
            let r = Permutation::word(vec![Permutation::word(vec![a, b]), c]);
            prop_assert!(l.agrees_on(&r, 64).unwrap());
        }

        #[test]
        fn inverse_is_involution(a in any_perm()) {
            prop_assert!(a.inverse().inverse().agrees_on(&a, 64).unwrap());
            prop_assert!(a.verify_window(64).passed);
            prop_assert!(Permutation::word(vec![a.clone(), a.inverse()]).agrees_on(&Permutation::identity(), 64).unwrap());
        }

        #[test]
        fn parity_is_homomorphism(a in finite_perm(), b in finite_perm()) {
            let ab = Permutation::word(vec![a.clone(), b.clone()]);
            prop_assert_eq!(ab.parity().unwrap(), a.parity().unwrap().add(b.parity().unwrap()));
        }

        #[test]
        fn then_matches_word(a in finite_perm(), b in finite_perm()) {
            prop_assert!(a.then(&b).agrees_on(&Permutation::word(vec![a, b]), 20).unwrap());
        }
    }
}

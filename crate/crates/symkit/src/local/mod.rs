//! Factoring a permutation of ω into two local permutations.
//!
//! With breakpoints `0 = a(0) < a(1) < …` and intervals `Σ_i = [a(i), a(i+1))`
//! such that `Σ_i f ⊆ Σ_{i-1} ∪ Σ_i ∪ Σ_{i+1}`, the factor `g` swaps the points
//! that `f` carries upward from `Σ_{2i}` into `Σ_{2i+1}` with those it carries
//! downward from `Σ_{2i+1}` into `Σ_{2i}`, paired in increasing order. Then
//! `g` preserves every `Σ_{2i} ∪ Σ_{2i+1}` and `h = g⁻¹f` every `Σ_{2i-1} ∪ Σ_{2i}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::perm::{PermError, Permutation, Point, Rule};
use crate::Tri;

/// A source of breakpoints `a(0) = 0 < a(1) < …`.
pub trait BreakpointSource: Send + Sync {
    fn a(&self, i: usize) -> Result<Point, PermError>;

    /// The `i` with `a(i) ≤ x < a(i+1)`.
    fn interval_of(&self, x: Point) -> Result<usize, PermError> {
        let mut hi = 1;
        while self.a(hi)? <= x {
            hi *= 2;
        }
        let mut lo = 0;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.a(mid)? <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

/// Breakpoints `a(i) = n·i`, valid for permutations moving no point by more than `n`.
#[derive(Debug, Clone, Copy)]
pub struct FixedStep(pub usize);

impl BreakpointSource for FixedStep {
    fn a(&self, i: usize) -> Result<Point, PermError> {
        Ok(self.0 * i)
    }
    fn interval_of(&self, x: Point) -> Result<usize, PermError> {
        Ok(x / self.0)
    }
}

struct BpState {
    a: Vec<Point>,
    /// Points below `scanned` have been folded into `reach`.
    scanned: Point,
    /// One more than the largest image or preimage of a scanned point.
    reach: Point,
}

/// Least valid breakpoints for a permutation, extended on demand: each `a(i)`
/// is the least value above `a(i-1)` such that `[0, a(i-1))` and its images and
/// preimages lie in `[0, a(i))`.
pub struct Breakpoints {
    f: Permutation,
    state: Mutex<BpState>,
}

impl Breakpoints {
    pub fn new(f: &Permutation) -> Self {
        Breakpoints {
            f: f.clone(),
            state: Mutex::new(BpState {
                a: vec![0],
                scanned: 0,
                reach: 0,
            }),
        }
    }

    /// The first `count + 1` breakpoints `a(0..=count)`.
    pub fn prefix(&self, count: usize) -> Result<Vec<Point>, PermError> {
        self.a(count)?;
        Ok(self.state.lock().unwrap().a[..=count].to_vec())
    }

    pub fn permutation(&self) -> &Permutation {
        &self.f
    }
}

impl BreakpointSource for Breakpoints {
    fn a(&self, i: usize) -> Result<Point, PermError> {
        let mut st = self.state.lock().unwrap();
        while st.a.len() <= i {
            let prev = *st.a.last().unwrap();
            while st.scanned < prev {
                let x = st.scanned;
                let m = self.f.apply(x)?.max(self.f.apply_inv(x)?);
                st.reach = st.reach.max(m + 1);
                st.scanned += 1;
            }
            let next = st.reach.max(prev + 1);
            st.a.push(next);
        }
        Ok(st.a[i])
    }
}

/// Least valid breakpoints `a(0..=count)` of `f`.
pub fn breakpoints(f: &Permutation, count: usize) -> Result<Vec<Point>, PermError> {
    Breakpoints::new(f).prefix(count)
}

/// Points carried upward past `a(i)` and points carried downward past it.
pub fn crossing_counts(
    f: &Permutation,
    src: &dyn BreakpointSource,
    i: usize,
) -> Result<(usize, usize), PermError> {
    let cut = src.a(i)?;
    let lo = if i == 0 { 0 } else { src.a(i - 1)? };
    let hi = src.a(i + 1)?;
    let (mut up, mut down) = (0, 0);
    for x in lo..hi {
        let y = f.apply(x)?;
        if x < cut && y >= cut {
            up += 1;
        }
        if x >= cut && y < cut {
            down += 1;
        }
    }
    Ok((up, down))
}

struct Pairing {
    f: Permutation,
    src: Arc<dyn BreakpointSource>,
    cache: Mutex<HashMap<usize, Arc<HashMap<Point, Point>>>>,
}

impl Pairing {
    /// Swaps within `Σ_{2p} ∪ Σ_{2p+1}`.
    fn block(&self, p: usize) -> Result<Arc<HashMap<Point, Point>>, PermError> {
        if let Some(m) = self.cache.lock().unwrap().get(&p) {
            return Ok(m.clone());
        }
        let (s0, s1, s2) = (self.src.a(2 * p)?, self.src.a(2 * p + 1)?, self.src.a(2 * p + 2)?);
        let mut up = Vec::new();
        for x in s0..s1 {
            let y = self.f.apply(x)?;
            if (s1..s2).contains(&y) {
                up.push(x);
            }
        }
        let mut down = Vec::new();
        for x in s1..s2 {
            let y = self.f.apply(x)?;
            if (s0..s1).contains(&y) {
                down.push(x);
            }
        }
        if up.len() != down.len() {
            return Err(PermError::Undefined {
                rule: format!(
                    "local pairing: {} upward and {} downward crossers at breakpoint {s1}",
                    up.len(),
                    down.len()
                ),
                point: s1,
            });
        }
        let mut m = HashMap::new();
        for (&u, &d) in up.iter().zip(&down) {
            m.insert(u, d);
            m.insert(d, u);
        }
        let m = Arc::new(m);
        self.cache.lock().unwrap().insert(p, m.clone());
        Ok(m)
    }

    fn swap(&self, x: Point) -> Result<Point, PermError> {
        let i = self.src.interval_of(x)?;
        Ok(self.block(i / 2)?.get(&x).copied().unwrap_or(x))
    }
}

struct PairSwap(Arc<Pairing>);

impl Rule for PairSwap {
    fn name(&self) -> String {
        "local-pairing".into()
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        self.0.swap(x)
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        self.0.swap(x)
    }
}

struct Remainder(Arc<Pairing>);

impl Rule for Remainder {
    fn name(&self) -> String {
        "local-remainder".into()
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        self.0.f.apply(self.0.swap(x)?)
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        self.0.swap(self.0.f.apply_inv(x)?)
    }
}

/// Factors `f = g·h` along the given breakpoints. `src` must satisfy
/// `Σ_i f ⊆ Σ_{i-1} ∪ Σ_i ∪ Σ_{i+1}`.
pub fn decompose_with(
    f: &Permutation,
    src: Arc<dyn BreakpointSource>,
) -> (Permutation, Permutation) {
    let pairing = Arc::new(Pairing {
        f: f.clone(),
        src,
        cache: Mutex::new(HashMap::new()),
    });
    let g = Permutation::from_rule(Arc::new(PairSwap(pairing.clone())));
    let h = Permutation::from_rule(Arc::new(Remainder(pairing)));
    match f.support_bound() {
        Some(b) => (g.with_support_bound(b), h.with_support_bound(b)),
        None => (g, h),
    }
}

/// Factors `f` into local permutations using its least valid breakpoints.
/// The first `count` breakpoints are computed eagerly.
pub fn decompose_local(
    f: &Permutation,
    count: usize,
) -> Result<(Permutation, Permutation, Arc<Breakpoints>), PermError> {
    let bp = Arc::new(Breakpoints::new(f));
    bp.a(count)?;
    let (g, h) = decompose_with(f, bp.clone());
    Ok((g, h, bp))
}

/// True when `p` maps `[lo, hi)` onto itself, checked pointwise.
pub fn preserves_interval(p: &Permutation, lo: Point, hi: Point) -> Result<bool, PermError> {
    for x in lo..hi {
        if !(lo..hi).contains(&p.apply(x)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalReport {
    pub answer: Tri,
    /// Invariant prefixes `[0, j)` found, `j ≥ 1`.
    pub prefixes: Vec<Point>,
    /// Whether the answer depends on the probe bound.
    pub at_budget: bool,
    pub note: String,
}

/// Looks for invariant initial segments `[0, j)` with `j ≤ probe_prefix`.
///
/// Finite-support permutations are certified local. Otherwise the answer is
/// budget-qualified: `Yes` when invariant prefixes keep appearing in the upper
/// half of the probe range, `No` when none appears past the last one found.
pub fn is_local(f: &Permutation, probe_prefix: usize) -> LocalReport {
    let mut prefixes = Vec::new();
    let mut reach = 0;
    for j in 1..=probe_prefix {
        let x = j - 1;
        let y = match f.apply(x) {
            Ok(y) => y,
            Err(e) => {
                return LocalReport {
                    answer: Tri::Unknown,
                    prefixes,
                    at_budget: true,
                    note: format!("evaluation failed at {x}: {e}"),
                }
            }
        };
        reach = reach.max(y + 1);
        if reach <= j {
            prefixes.push(j);
        }
    }
    if let Some(b) = f.support_bound() {
        return LocalReport {
            answer: Tri::Yes,
            prefixes,
            at_budget: false,
            note: format!("finite support below {b}: every prefix [0, j) with j ≥ {b} is invariant"),
        };
    }
    let last = prefixes.last().copied().unwrap_or(0);
    if last * 2 > probe_prefix {
        LocalReport {
            answer: Tri::Yes,
            prefixes,
            at_budget: true,
            note: format!("invariant prefixes recur up to {last} within {probe_prefix}"),
        }
    } else {
        LocalReport {
            answer: Tri::No,
            prefixes,
            at_budget: true,
            note: format!("no invariant prefix beyond {last} up to {probe_prefix}"),
        }
    }
}

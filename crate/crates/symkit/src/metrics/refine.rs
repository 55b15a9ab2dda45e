//! The refinement `d′ ≤ d` in which every step `α → αu^{±1}`, `u ∈ U`, costs 1.
//!
//! `d′(α, β)` is the infimum of `d(α_0, α_1) + 1 + d(α_2, α_3) + 1 + … + d(α_{2n}, α_{2n+1})`
//! over sequences from `α` to `β` with each `α_{2i+2}` a `U`-step from
//! `α_{2i+1}`. It is the shortest-path distance in the graph with `d`-edges
//! and unit `U`-edges, searched Dijkstra-style from `α`.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;

use super::{ExtendedDistance, GeneralizedMetric, MetricError, MetricOracle, ValueClass};
use crate::perm::{Permutation, Point};
use crate::Rational;

/// Maximum number of settled points per search.
pub const DEFAULT_SEARCH_CAP: usize = 200_000;

/// Radii tried, in turn, when `d(α, β) = ∞` and the base metric has no finite classes.
const MAX_RADIUS: i64 = 4096;

/// A radius-budgeted distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Budgeted {
    Exact(ExtendedDistance),
    AtLeast(#[serde(serialize_with = "super::ser_rational")] Rational),
}

/// The refined metric `d′` of a base metric and a finite set `U`.
pub struct RefinedMetric {
    base: GeneralizedMetric,
    us: Vec<Permutation>,
    cap: usize,
}

struct Search {
    settled: HashMap<Point, Rational>,
    /// True when the queue ran dry without any edge cut off by the radius.
    exhausted: bool,
}

impl RefinedMetric {
    pub fn base(&self) -> &GeneralizedMetric {
        &self.base
    }

    pub fn steps(&self) -> &[Permutation] {
        &self.us
    }

    fn neighbours(
        &self,
        x: Point,
        dx: Rational,
        radius: Option<Rational>,
        out: &mut Vec<(Point, Rational)>,
    ) -> Result<bool, MetricError> {
        let one = Rational::from_integer(1);
        let mut cut = false;
        for u in &self.us {
            for y in [u.apply(x)?, u.apply_inv(x)?] {
                if radius.is_none_or(|r| dx + one < r) {
                    out.push((y, dx + one));
                } else {
                    cut = true;
                }
            }
        }
        let points = match radius {
            Some(r) => {
                cut = true;
                self.base.ball(x, &(r - dx), self.cap)?
            }
            None => match self.base.finite_class(x, self.cap) {
                Some(class) => class?,
                None => {
                    return Err(MetricError::Unsupported(format!(
                        "{} has no finite distance classes for an unbounded search",
                        self.base.name()
                    )))
                }
            },
        };
        for y in points {
            if let ExtendedDistance::Finite(w) = self.base.dist(x, y)? {
                out.push((y, dx + w));
            }
        }
        Ok(cut)
    }

    /// Settles points in order of `d′` from `start`, stopping at `target`,
    /// at `radius` or at the cap.
    fn search(
        &self,
        start: Point,
        radius: Option<Rational>,
        target: Option<Point>,
    ) -> Result<Search, MetricError> {
        let mut best: HashMap<Point, Rational> = HashMap::from([(start, Rational::from_integer(0))]);
        let mut heap = BinaryHeap::from([Reverse((Rational::from_integer(0), start))]);
        let mut settled = HashMap::new();
        let mut cut = false;
        let mut buf = Vec::new();
        while let Some(Reverse((dx, x))) = heap.pop() {
            if settled.contains_key(&x) {
                continue;
            }
            settled.insert(x, dx);
            if settled.len() > self.cap {
                return Err(match radius {
                    Some(r) => MetricError::NotUncrowded {
                        center: start,
                        radius: r,
                        cap: self.cap,
                    },
                    None => MetricError::Budget(format!(
                        "more than {} points reachable from {start}",
                        self.cap
                    )),
                });
            }
            if Some(x) == target {
                return Ok(Search {
                    settled,
                    exhausted: false,
                });
            }
            buf.clear();
            cut |= self.neighbours(x, dx, radius, &mut buf)?;
            for &(y, dy) in &buf {
                if settled.contains_key(&y) {
                    continue;
                }
                if best.get(&y).is_none_or(|&b| dy < b) {
                    best.insert(y, dy);
                    heap.push(Reverse((dy, y)));
                }
            }
        }
        Ok(Search {
            settled,
            exhausted: !cut,
        })
    }

    /// `Exact(d′(a, b))` when it is below `r`, else `AtLeast(r)`.
    pub fn budgeted(&self, a: Point, b: Point, r: Rational) -> Result<Budgeted, MetricError> {
        let s = self.search(a, Some(r), Some(b))?;
        Ok(match s.settled.get(&b) {
            Some(&v) => Budgeted::Exact(ExtendedDistance::Finite(v)),
            None => Budgeted::AtLeast(r),
        })
    }
}

impl MetricOracle for RefinedMetric {
    fn name(&self) -> String {
        let us: Vec<String> = self.us.iter().map(|u| u.to_text()).collect();
        format!("refine({};U=[{}])", self.base.name(), us.join(","))
    }

    fn dist(&self, a: Point, b: Point) -> Result<ExtendedDistance, MetricError> {
        if a == b {
            return Ok(ExtendedDistance::zero());
        }
        if let ExtendedDistance::Finite(d) = self.base.dist(a, b)? {
            return match self.budgeted(a, b, d + Rational::from_integer(1))? {
                Budgeted::Exact(v) => Ok(v),
                Budgeted::AtLeast(_) => unreachable!("d′ ≤ d"),
            };
        }
        if self.base.finite_class(a, self.cap).is_some() {
            let s = self.search(a, None, Some(b))?;
            return Ok(match s.settled.get(&b) {
                Some(&v) => ExtendedDistance::Finite(v),
                None => ExtendedDistance::Infinite,
            });
        }
        let mut r = 2;
        while r <= MAX_RADIUS {
            let s = self.search(a, Some(Rational::from_integer(r)), Some(b))?;
            if let Some(&v) = s.settled.get(&b) {
                return Ok(ExtendedDistance::Finite(v));
            }
            r *= 2;
        }
        Err(MetricError::Budget(format!(
            "d′({a}, {b}) is at least {MAX_RADIUS}"
        )))
    }

    fn ball(&self, center: Point, r: &Rational, _cap: usize) -> Result<Vec<Point>, MetricError> {
        if *r <= Rational::from_integer(0) {
            return Ok(Vec::new());
        }
        let s = self.search(center, Some(*r), None)?;
        let mut out: Vec<Point> = s.settled.into_keys().collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Paths with `n` unit steps cost at least `n`, so a ball of radius `r` has
    /// at most `Σ_{n < r} λ(r)^{n+1} (2|U|)^n` points.
    fn uniform_bound(&self, r: &Rational) -> Option<usize> {
        let lambda = self.base.uniform_bound(r)? as u128;
        let branch = 2 * self.us.len() as u128;
        let mut total: u128 = 0;
        let mut n = 0i64;
        while Rational::from_integer(n) < *r {
            let term = lambda
                .checked_pow(n as u32 + 1)?
                .checked_mul(branch.checked_pow(n as u32)?)?;
            total = total.checked_add(term)?;
            n += 1;
        }
        usize::try_from(total).ok()
    }

    fn finite_class(&self, x: Point, _cap: usize) -> Option<Result<Vec<Point>, MetricError>> {
        self.base.finite_class(x, self.cap)?.ok()?;
        Some(self.search(x, None, None).and_then(|s| {
            if s.exhausted {
                let mut v: Vec<Point> = s.settled.into_keys().collect();
                v.sort_unstable();
                Ok(v)
            } else {
                Err(MetricError::Budget("class search cut off".into()))
            }
        }))
    }
}

/// The refinement of `d` by the finite set `U`.
pub fn refine_metric(d: &GeneralizedMetric, us: &[Permutation]) -> Result<GeneralizedMetric, MetricError> {
    if d.value_class() == ValueClass::ComparisonOnly {
        return Err(MetricError::Unsupported(format!(
            "refinement needs exact distances; {} is comparison-only",
            d.name()
        )));
    }
    for u in us {
        let report = u.verify_window(256);
        if let Some(f) = report.failure {
            return Err(MetricError::Unsupported(format!(
                "{} fails its window check at {}: {}",
                u.to_text(),
                f.point,
                f.reason
            )));
        }
    }
    Ok(GeneralizedMetric::new(std::sync::Arc::new(RefinedMetric {
        base: d.clone(),
        us: us.to_vec(),
        cap: DEFAULT_SEARCH_CAP,
    })))
}

impl GeneralizedMetric {
    /// Radius-budgeted distance; `Exact` for every metric but a refinement
    /// whose distance reaches `r`.
    pub fn dist_budgeted(&self, a: Point, b: Point, r: Rational) -> Result<Budgeted, MetricError> {
        let d = self.dist(a, b)?;
        Ok(match d {
            ExtendedDistance::Finite(v) if v < r => Budgeted::Exact(d),
            _ => Budgeted::AtLeast(r),
        })
    }
}

impl Budgeted {
    pub fn cmp_threshold(&self, r: &Rational) -> Option<Ordering> {
        match self {
            Budgeted::Exact(d) => Some(d.cmp(&ExtendedDistance::Finite(*r))),
            Budgeted::AtLeast(b) if b >= r => Some(Ordering::Greater),
            Budgeted::AtLeast(_) => None,
        }
    }
}

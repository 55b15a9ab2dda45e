//! Generalized metrics on ℕ with values in `[0, ∞]`.

mod builtin;
mod classify;
mod flow;
mod norm;
mod refine;

pub use builtin::{CayleyF2, CayleyZ2, Discrete, PartitionMetric, Sqrt, StandardOmega, StandardZ, UltraBase2, Unit};
pub use classify::{classify_metric, MetricBudget, MetricCase, MetricClassification, RadiusProbe};
pub use flow::{factor_fn_omega, net_flow, FlowValue, OmegaFactors};
pub use norm::{
    certified_norm_bound, fn_contains, norm, unbounded_witness, unbounded_witness_blockwise,
    unbounded_witness_rule, FnMembership, NormCertificate, NormReport, PointSet, WitnessPair,
};
pub use refine::{refine_metric, Budgeted, RefinedMetric, DEFAULT_SEARCH_CAP};

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::partitions::{Partition, PartitionError};
use crate::perm::{Cursor, PermError, Point};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("metric `{0}` only supports threshold comparisons")]
    ComparisonOnly(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not uncrowded: ball around {center} of radius {radius} exceeds {cap} points")]
    NotUncrowded {
        center: Point,
        radius: Rational,
        cap: usize,
    },
    #[error("insufficient set: found {found} of {needed} pairs")]
    InsufficientSet { found: usize, needed: usize },
    #[error("no certificate: {0}")]
    NoCertificate(String),
    #[error("search budget exhausted: {0}")]
    Budget(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// A distance in `[0, ∞]`; `Infinite` is the top element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedDistance {
    Finite(Rational),
    Infinite,
}

impl ExtendedDistance {
    pub fn zero() -> Self {
        ExtendedDistance::Finite(Rational::from_integer(0))
    }

    pub fn int(n: i64) -> Self {
        ExtendedDistance::Finite(Rational::from_integer(n))
    }

    pub fn finite(self) -> Option<Rational> {
        match self {
            ExtendedDistance::Finite(r) => Some(r),
            ExtendedDistance::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        self.finite().is_some()
    }

    /// Sum in `[0, ∞]`.
    pub fn add(self, other: ExtendedDistance) -> ExtendedDistance {
        match (self, other) {
            (ExtendedDistance::Finite(a), ExtendedDistance::Finite(b)) => ExtendedDistance::Finite(a + b),
            _ => ExtendedDistance::Infinite,
        }
    }
}

impl fmt::Display for ExtendedDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedDistance::Finite(r) => write!(f, "{r}"),
            ExtendedDistance::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtendedDistance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub(crate) fn ser_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueClass {
    RationalValued,
    ComparisonOnly,
}

/// Oracle access to a generalized metric.
pub trait MetricOracle: Send + Sync {
    /// Descriptor text without the `metric:` prefix.
    fn name(&self) -> String;

    fn value_class(&self) -> ValueClass {
        ValueClass::RationalValued
    }

    /// Exact distance; comparison-only metrics return `ComparisonOnly`.
    fn dist(&self, a: Point, b: Point) -> Result<ExtendedDistance, MetricError>;

    /// Compares `d(a, b)` with the finite threshold `r`.
    fn cmp_dist(&self, a: Point, b: Point, r: &Rational) -> Result<Ordering, MetricError> {
        Ok(self.dist(a, b)?.cmp(&ExtendedDistance::Finite(*r)))
    }

    /// The sorted ball `{β : d(α, β) < r}`, or `NotUncrowded` past `cap` points.
    fn ball(&self, center: Point, r: &Rational, cap: usize) -> Result<Vec<Point>, MetricError>;

    /// A bound `λ(r)` on every ball of radius `r`.
    fn uniform_bound(&self, _r: &Rational) -> Option<usize> {
        None
    }

    /// The class `{β : d(x, β) < ∞}` when it is finite and known.
    fn finite_class(&self, _x: Point, _cap: usize) -> Option<Result<Vec<Point>, MetricError>> {
        None
    }
}

/// A shared generalized metric.
#[derive(Clone)]
pub struct GeneralizedMetric(Arc<dyn MetricOracle>);

impl fmt::Debug for GeneralizedMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "metric:{}", self.name())
    }
}

impl GeneralizedMetric {
    pub fn new(oracle: Arc<dyn MetricOracle>) -> Self {
        GeneralizedMetric(oracle)
    }

    pub fn name(&self) -> String {
        self.0.name()
    }

    pub fn value_class(&self) -> ValueClass {
        self.0.value_class()
    }

    pub fn dist(&self, a: Point, b: Point) -> Result<ExtendedDistance, MetricError> {
        self.0.dist(a, b)
    }

    pub fn cmp_dist(&self, a: Point, b: Point, r: &Rational) -> Result<Ordering, MetricError> {
        self.0.cmp_dist(a, b, r)
    }

    pub fn ball(&self, center: Point, r: &Rational, cap: usize) -> Result<Vec<Point>, MetricError> {
        self.0.ball(center, r, cap)
    }

    pub fn uniform_bound(&self, r: &Rational) -> Option<usize> {
        self.0.uniform_bound(r)
    }

    pub fn finite_class(&self, x: Point, cap: usize) -> Option<Result<Vec<Point>, MetricError>> {
        self.0.finite_class(x, cap)
    }

    /// Largest integer `k ≤ d(a, b)`, capped at `2^20`; `None` when `d(a, b) = ∞`.
    pub fn floor_dist(&self, a: Point, b: Point) -> Result<Option<i64>, MetricError> {
        if self.value_class() == ValueClass::RationalValued {
            return Ok(self.dist(a, b)?.finite().map(|r| r.floor().to_integer()));
        }
        let ge = |k: i64| -> Result<bool, MetricError> {
            Ok(self.cmp_dist(a, b, &Rational::from_integer(k))? != Ordering::Less)
        };
        let mut hi = 1;
        while ge(hi)? {
            if hi >= 1 << 20 {
                return Ok(Some(hi));
            }
            hi *= 2;
        }
        let mut lo = 0;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if ge(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(lo))
    }

    /// An upper bound on `d(a, b)`: exact for rational-valued metrics, the
    /// least integer above the distance otherwise.
    pub fn upper_dist(&self, a: Point, b: Point) -> Result<ExtendedDistance, MetricError> {
        if self.value_class() == ValueClass::RationalValued {
            return self.dist(a, b);
        }
        Ok(match self.floor_dist(a, b)? {
            Some(k) if k < 1 << 20 => ExtendedDistance::int(k + 1),
            _ => ExtendedDistance::Infinite,
        })
    }

    pub fn standard_omega() -> Self {
        Self::new(Arc::new(StandardOmega))
    }

    pub fn standard_z() -> Self {
        Self::new(Arc::new(StandardZ))
    }

    pub fn sqrt() -> Self {
        Self::new(Arc::new(Sqrt))
    }

    pub fn ultra_base2() -> Self {
        Self::new(Arc::new(UltraBase2))
    }

    pub fn cayley_z2() -> Self {
        Self::new(Arc::new(CayleyZ2))
    }

    pub fn cayley_f2() -> Self {
        Self::new(Arc::new(CayleyF2))
    }

    /// `d(α, β) = ∞` for `α ≠ β`.
    pub fn discrete() -> Self {
        Self::new(Arc::new(Discrete))
    }

    /// `d(α, β) = 1` for `α ≠ β`; every ball of radius above 1 is infinite.
    pub fn unit() -> Self {
        Self::new(Arc::new(Unit))
    }

    /// Parses `metric:<name>`; see the README for the accepted names.
    pub fn parse(src: &str) -> Result<Self, MetricError> {
        let mut c = Cursor::new(src);
        let m = parse_metric(&mut c)?;
        if !c.at_end() {
            return Err(c.error("unexpected trailing input").into());
        }
        Ok(m)
    }
}

fn parse_metric(c: &mut Cursor) -> Result<GeneralizedMetric, MetricError> {
    c.eat("metric:");
    let at = c.pos;
    let name = c.ident().to_string();
    let m = match name.as_str() {
        "standard-omega" => GeneralizedMetric::standard_omega(),
        "standard-z" => GeneralizedMetric::standard_z(),
        "sqrt" => GeneralizedMetric::sqrt(),
        "ultra-base2" => GeneralizedMetric::ultra_base2(),
        "cayley-z2" => GeneralizedMetric::cayley_z2(),
        "cayley-f2" => GeneralizedMetric::cayley_f2(),
        "discrete" => GeneralizedMetric::discrete(),
        "unit" => GeneralizedMetric::unit(),
        "partition" => {
            c.expect("@")?;
            c.skip_ws();
            let start = c.pos;
            let mut depth = 0i32;
            while let Some(ch) = c.peek() {
                match ch {
                    '(' | '[' => depth += 1,
                    ')' | ']' if depth == 0 => break,
                    ')' | ']' => depth -= 1,
                    ';' | ',' if depth == 0 => break,
                    _ => {}
                }
                c.pos += ch.len_utf8();
            }
            let text = c.src[start..c.pos].trim();
            let a = Partition::parse(text).map_err(|e| MetricError::Parse {
                pos: start,
                msg: e.to_string(),
            })?;
            metric_from_partition(&a).map_err(|e| MetricError::Parse {
                pos: start,
                msg: e.to_string(),
            })?
        }
        "refine" => {
            c.expect("(")?;
            let base = parse_metric(c)?;
            let mut us = Vec::new();
            if c.eat(";") {
                c.expect("U")?;
                c.expect("=")?;
                c.expect("[")?;
                if !c.eat("]") {
                    loop {
                        let mut u = crate::perm::parse_in(c)?;
                        if c.eat("^-1") {
                            u = u.inverse();
                        }
                        us.push(u);
                        if c.eat("]") {
                            break;
                        }
                        c.expect(",")?;
                    }
                }
            }
            c.expect(")")?;
            refine_metric(&base, &us).map_err(|e| MetricError::Parse {
                pos: at,
                msg: e.to_string(),
            })?
        }
        other => {
            return Err(MetricError::Parse {
                pos: at,
                msg: format!("unknown metric `{other}`"),
            })
        }
    };
    Ok(m)
}

/// The metric `d_A`: 0 on the diagonal, 1 within a block, ∞ across blocks.
pub fn metric_from_partition(a: &Partition) -> Result<GeneralizedMetric, MetricError> {
    if !a.has_finite_blocks() {
        return Err(MetricError::Unsupported(format!(
            "{} has an infinite block, so its balls are not finite",
            a.name()
        )));
    }
    Ok(GeneralizedMetric::new(Arc::new(PartitionMetric::new(a.clone()))))
}

/// The largest integer strictly below `r`.
pub(crate) fn int_below(r: &Rational) -> i64 {
    if r.is_integer() {
        r.to_integer() - 1
    } else {
        r.floor().to_integer()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_order() {
        assert!(ExtendedDistance::Infinite > ExtendedDistance::int(1 << 40));
        assert!(ExtendedDistance::int(1) < ExtendedDistance::Finite(Rational::new(3, 2)));
        assert_eq!(ExtendedDistance::int(2).add(ExtendedDistance::Infinite), ExtendedDistance::Infinite);
        assert_eq!(serde_json::to_string(&ExtendedDistance::Finite(Rational::new(3, 2))).unwrap(), "\"3/2\"");
    }

    #[test]
    fn int_below_values() {
        assert_eq!(int_below(&Rational::from_integer(3)), 2);
        assert_eq!(int_below(&Rational::new(7, 2)), 3);
        assert_eq!(int_below(&Rational::new(1, 2)), 0);
    }

    #[test]
    fn parse_names() {
        for s in [
            "metric:standard-omega",
            "metric:standard-z",
            "metric:sqrt",
            "metric:ultra-base2",
            "metric:cayley-f2",
            "metric:cayley-z2",
            "metric:discrete",
            "metric:unit",
            "metric:partition@partition:pairs",
            "metric:partition@intervals-growing",
            "metric:refine(metric:standard-omega;U=[rule:swap-pairs])",
            "metric:refine(metric:partition@partition:pairs;U=[rule:shift-z,cycles:(0 5)])",
        ] {
            GeneralizedMetric::parse(s).unwrap_or_else(|e| panic!("{s}: {e}"));
        }
        match GeneralizedMetric::parse("metric:bogus").unwrap_err() {
            MetricError::Parse { pos, .. } => assert_eq!(pos, 7),
            e => panic!("{e}"),
        }
        assert!(GeneralizedMetric::parse("metric:partition@parity").is_err());
        let r = GeneralizedMetric::parse("metric:refine(metric:standard-omega;U=[rule:swap-pairs])").unwrap();
        assert_eq!(r.name(), "refine(standard-omega;U=[rule:swap-pairs])");
    }

    #[test]
    fn partition_metric_examples() {
        let d = metric_from_partition(&Partition::pairs()).unwrap();
        assert_eq!(d.dist(4, 5).unwrap(), ExtendedDistance::int(1));
        assert_eq!(d.dist(4, 4).unwrap(), ExtendedDistance::zero());
        assert_eq!(d.dist(4, 6).unwrap(), ExtendedDistance::Infinite);
        assert_eq!(d.ball(4, &Rational::from_integer(1), 10).unwrap(), vec![4]);
        assert_eq!(d.ball(4, &Rational::from_integer(100), 10).unwrap(), vec![4, 5]);
        assert_eq!(d.uniform_bound(&Rational::from_integer(5)), Some(2));
        let g = metric_from_partition(&Partition::intervals_growing()).unwrap();
        assert_eq!(g.uniform_bound(&Rational::from_integer(5)), None);
    }
}

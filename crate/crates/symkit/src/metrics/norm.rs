//! Norms `‖g‖_d = sup_α d(α, αg)`, bounded-permutation membership and
//! unbounded witnesses in stabilizers of partitions.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::{ExtendedDistance, GeneralizedMetric, MetricError, ValueClass};
use crate::partitions::Partition;
use crate::perm::{GrowthCertificate, PermError, Permutation, Point, Rule};
use crate::{Rational, Tri};

/// Number of growth-certificate pairs replayed by [`norm`].
const GROWTH_REPLAY: usize = 64;

/// Points scanned when looking for the next block with a far pair.
const BLOCK_HORIZON: Point = 1 << 16;

/// A pair `(a, b)` swapped by a permutation, with `d(a, b) ≥ distance`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessPair {
    pub a: Point,
    pub b: Point,
    pub distance: ExtendedDistance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum NormCertificate {
    CertifiedFinite(#[serde(serialize_with = "super::ser_rational")] Rational),
    CertifiedInfinite(Vec<WitnessPair>),
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormReport {
    /// Largest `d(α, αg)` seen on the window, the support and any replayed witness.
    pub lower_bound: ExtendedDistance,
    pub certificate: NormCertificate,
    pub note: String,
}

/// Distance from below: exact, or the integer floor for comparison-only metrics.
fn floor_distance(d: &GeneralizedMetric, a: Point, b: Point) -> Result<ExtendedDistance, MetricError> {
    if d.value_class() == ValueClass::RationalValued {
        return d.dist(a, b);
    }
    Ok(d.floor_dist(a, b)?.map_or(ExtendedDistance::Infinite, ExtendedDistance::int))
}

/// A certified upper bound on `‖g‖_d` from displacement, block or support
/// certificates, summed over the factors of a word.
pub fn certified_norm_bound(g: &Permutation, d: &GeneralizedMetric) -> Result<Option<ExtendedDistance>, MetricError> {
    let name = d.name();
    if let Some(b) = g.displacement_bound(&name) {
        return Ok(Some(ExtendedDistance::Finite(b)));
    }
    if let Some(part) = name.strip_prefix("partition@") {
        if g.has_block_certificate(part) {
            return Ok(Some(ExtendedDistance::int(1)));
        }
    }
    if g.support_bound().is_some() {
        let mut best = ExtendedDistance::zero();
        for x in g.support()? {
            best = best.max(d.upper_dist(x, g.apply(x)?)?);
        }
        return Ok(Some(best));
    }
    if let Some(fs) = g.factors() {
        let mut total = ExtendedDistance::zero();
        for f in fs {
            match certified_norm_bound(f, d)? {
                Some(b) => total = total.add(b),
                None => return Ok(None),
            }
        }
        return Ok(Some(total));
    }
    Ok(None)
}

fn replay_growth(
    g: &Permutation,
    d: &GeneralizedMetric,
    cert: &GrowthCertificate,
    count: usize,
) -> Result<Vec<WitnessPair>, MetricError> {
    let mut out = Vec::new();
    for j in 1..=count {
        let (a, b) = (cert.pairs)(j)?;
        if g.apply(a)? != b || g.apply(b)? != a {
            return Err(MetricError::NoCertificate(format!("pair {j} ({a}, {b}) is not swapped")));
        }
        if d.cmp_dist(a, b, &Rational::from_integer(j as i64))? == Ordering::Less {
            return Err(MetricError::NoCertificate(format!("pair {j} ({a}, {b}) is closer than {j}")));
        }
        out.push(WitnessPair {
            a,
            b,
            distance: ExtendedDistance::int(j as i64).max(floor_distance(d, a, b)?),
        });
    }
    Ok(out)
}

/// Probes `‖g‖_d` on `[0, window)` and on the support, and attaches whatever
/// certificate `g` carries.
pub fn norm(g: &Permutation, d: &GeneralizedMetric, window: usize) -> NormReport {
    let mut notes = Vec::new();
    let mut lower = ExtendedDistance::zero();
    let mut probe = |x: Point, notes: &mut Vec<String>| -> bool {
        match g.apply(x).map_err(MetricError::from).and_then(|y| floor_distance(d, x, y)) {
            Ok(v) => {
                lower = lower.max(v);
                true
            }
            Err(e) => {
                notes.push(format!("probe stopped at {x}: {e}"));
                false
            }
        }
    };
    for x in 0..window {
        if !probe(x, &mut notes) {
            break;
        }
    }
    if g.support_bound().is_some() {
        if let Ok(s) = g.support() {
            for x in s {
                if !probe(x, &mut notes) {
                    break;
                }
            }
        }
    }
    let mut certificate = NormCertificate::Unknown;
    match certified_norm_bound(g, d) {
        Ok(Some(ExtendedDistance::Finite(b))) => certificate = NormCertificate::CertifiedFinite(b),
        Ok(Some(ExtendedDistance::Infinite)) if g.support_bound().is_some() => {
            let support = g.support().unwrap_or_default();
            for x in support {
                let y = g.apply(x).unwrap_or(x);
                if d.dist(x, y).ok() == Some(ExtendedDistance::Infinite) {
                    certificate = NormCertificate::CertifiedInfinite(vec![WitnessPair {
                        a: x,
                        b: y,
                        distance: ExtendedDistance::Infinite,
                    }]);
                    break;
                }
            }
        }
        Ok(_) => {}
        Err(e) => notes.push(format!("certificate check failed: {e}")),
    }
    if certificate == NormCertificate::Unknown {
        if let Some(cert) = g.growth_certificate().filter(|c| c.metric == d.name()) {
            match replay_growth(g, d, cert, GROWTH_REPLAY) {
                Ok(pairs) => {
                    for p in &pairs {
                        lower = lower.max(p.distance);
                    }
                    certificate = NormCertificate::CertifiedInfinite(pairs);
                }
                Err(e) => notes.push(format!("growth certificate rejected: {e}")),
            }
        }
    }
    NormReport {
        lower_bound: lower,
        certificate,
        note: notes.join("; "),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FnMembership {
    pub answer: Tri,
    pub norm: NormReport,
}

/// Is `‖g‖_d < ∞`?
pub fn fn_contains(g: &Permutation, d: &GeneralizedMetric, window: usize) -> FnMembership {
    let norm = norm(g, d, window);
    let answer = match norm.certificate {
        NormCertificate::CertifiedFinite(_) => Tri::Yes,
        NormCertificate::CertifiedInfinite(_) => Tri::No,
        NormCertificate::Unknown => Tri::Unknown,
    };
    FnMembership { answer, norm }
}

struct SetState {
    found: Vec<Point>,
    next: Point,
}

/// An enumerable set of points `Σ` with a membership predicate, scanned in
/// increasing order below a probe limit.
#[derive(Clone)]
pub struct PointSet {
    name: String,
    pred: Arc<dyn Fn(Point) -> bool + Send + Sync>,
    limit: Point,
    state: Arc<Mutex<SetState>>,
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointSet({})", self.name)
    }
}

impl PointSet {
    pub fn new(name: &str, pred: impl Fn(Point) -> bool + Send + Sync + 'static, limit: Point) -> Self {
        PointSet {
            name: name.into(),
            pred: Arc::new(pred),
            limit,
            state: Arc::new(Mutex::new(SetState { found: Vec::new(), next: 0 })),
        }
    }

    /// All of ℕ below `limit`.
    pub fn all(limit: Point) -> Self {
        Self::new("all", |_| true, limit)
    }

    pub fn from_points(points: &[Point]) -> Self {
        let set: BTreeSet<Point> = points.iter().copied().collect();
        let limit = set.last().map_or(0, |m| m + 1);
        Self::new(&format!("{points:?}"), move |x| set.contains(&x), limit)
    }

    /// The block of `a` with id `block`, probed below `limit`.
    pub fn block(a: &Partition, block: Point, limit: Point) -> Self {
        let a2 = a.clone();
        Self::new(&format!("block {block} of {}", a.name()), move |x| a2.block_of(x) == block, limit)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn contains(&self, x: Point) -> bool {
        (self.pred)(x)
    }

    /// The `i`-th member in increasing order, if it lies below the limit.
    pub fn nth(&self, i: usize) -> Option<Point> {
        let mut st = self.state.lock().unwrap();
        while st.found.len() <= i && st.next < self.limit {
            let x = st.next;
            st.next += 1;
            if (self.pred)(x) {
                st.found.push(x);
            }
        }
        st.found.get(i).copied()
    }
}

/// Chooses `α_j` as the least unused point of `Σ` and `β_j` as the least
/// unused point of `Σ` with `d(α_j, β_j) ≥ j`.
fn next_pair(
    d: &GeneralizedMetric,
    sigma: &PointSet,
    used: &BTreeSet<Point>,
    j: usize,
) -> Result<Option<(Point, Point)>, MetricError> {
    let mut i = 0;
    let alpha = loop {
        match sigma.nth(i) {
            None => return Ok(None),
            Some(x) if !used.contains(&x) => break x,
            Some(_) => i += 1,
        }
    };
    let r = Rational::from_integer(j as i64);
    let mut i = 0;
    while let Some(y) = sigma.nth(i) {
        if y != alpha && !used.contains(&y) && d.cmp_dist(alpha, y, &r)? != Ordering::Less {
            return Ok(Some((alpha, y)));
        }
        i += 1;
    }
    Ok(None)
}

/// The finite-support permutation swapping `J` pairs `(α_j, β_j)` of `Σ`
/// with `d(α_j, β_j) ≥ j`.
pub fn unbounded_witness(d: &GeneralizedMetric, sigma: &PointSet, j_max: usize) -> Result<Permutation, MetricError> {
    let mut used = BTreeSet::new();
    let mut cycles = Vec::new();
    for j in 1..=j_max {
        let Some((a, b)) = next_pair(d, sigma, &used, j)? else {
            return Err(MetricError::InsufficientSet {
                found: j - 1,
                needed: j_max,
            });
        };
        used.insert(a);
        used.insert(b);
        cycles.push(vec![a, b]);
    }
    Ok(Permutation::from_cycles(&cycles)?)
}

/// For each `j ≤ J`, swaps the least point of the next block of `A` with the
/// least point of the same block at distance at least `j`. The result lies
/// in `S_(A)` and has norm at least `J` for any metric with finite balls
/// when `A` has blocks of unbounded size.
pub fn unbounded_witness_blockwise(
    d: &GeneralizedMetric,
    a: &Partition,
    j_max: usize,
) -> Result<Permutation, MetricError> {
    let mut cycles = Vec::new();
    let mut id = 0;
    for j in 1..=j_max {
        let r = Rational::from_integer(j as i64);
        let pair = loop {
            if id >= BLOCK_HORIZON {
                return Err(MetricError::InsufficientSet {
                    found: j - 1,
                    needed: j_max,
                });
            }
            let start = id;
            id += 1;
            if a.block_of(start) != start {
                continue;
            }
            let members = a.block_members(start)?;
            let mut hit = None;
            for &y in &members[1..] {
                if d.cmp_dist(start, y, &r)? != Ordering::Less {
                    hit = Some(y);
                    break;
                }
            }
            if let Some(y) = hit {
                break (start, y);
            }
        };
        cycles.push(vec![pair.0, pair.1]);
    }
    let mut p = Permutation::from_cycles(&cycles)?;
    if a.name().starts_with("partition:") {
        p = p.with_block_certificate(a.name());
    }
    Ok(p)
}

struct WitnessState {
    used: BTreeSet<Point>,
    pairs: Vec<(Point, Point)>,
    partner: HashMap<Point, Point>,
}

struct WitnessRule {
    d: GeneralizedMetric,
    sigma: PointSet,
    state: Mutex<WitnessState>,
}

impl WitnessRule {
    fn extend(&self, st: &mut WitnessState) -> Result<(), PermError> {
        let j = st.pairs.len() + 1;
        let undefined = |point| PermError::Undefined {
            rule: format!("unbounded-witness({})", self.sigma.name()),
            point,
        };
        match next_pair(&self.d, &self.sigma, &st.used, j) {
            Ok(Some((a, b))) => {
                st.used.insert(a);
                st.used.insert(b);
                st.pairs.push((a, b));
                st.partner.insert(a, b);
                st.partner.insert(b, a);
                Ok(())
            }
            Ok(None) | Err(_) => Err(undefined(j)),
        }
    }

    fn pair(&self, j: usize) -> Result<(Point, Point), PermError> {
        let mut st = self.state.lock().unwrap();
        while st.pairs.len() < j {
            self.extend(&mut st)?;
        }
        Ok(st.pairs[j - 1])
    }

    fn swap(&self, x: Point) -> Result<Point, PermError> {
        if !self.sigma.contains(x) {
            return Ok(x);
        }
        let mut st = self.state.lock().unwrap();
        while !st.partner.contains_key(&x) {
            if st.pairs.len() > self.sigma.limit {
                return Err(PermError::Undefined {
                    rule: format!("unbounded-witness({})", self.sigma.name()),
                    point: x,
                });
            }
            self.extend(&mut st)?;
        }
        Ok(st.partner[&x])
    }
}

struct WitnessHandle(Arc<WitnessRule>);

impl Rule for WitnessHandle {
    fn name(&self) -> String {
        format!("unbounded-witness({})", self.0.sigma.name())
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        self.0.swap(x)
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        self.0.swap(x)
    }
}

/// The infinite version of [`unbounded_witness`]: an involution of `Σ`
/// swapping `(α_j, β_j)` for every `j ≥ 1`, carrying a growth certificate.
pub fn unbounded_witness_rule(d: &GeneralizedMetric, sigma: &PointSet) -> Permutation {
    let rule = Arc::new(WitnessRule {
        d: d.clone(),
        sigma: sigma.clone(),
        state: Mutex::new(WitnessState {
            used: BTreeSet::new(),
            pairs: Vec::new(),
            partner: HashMap::new(),
        }),
    });
    let pairs = rule.clone();
    Permutation::from_rule(Arc::new(WitnessHandle(rule))).with_growth(GrowthCertificate {
        metric: d.name(),
        pairs: Arc::new(move |j| pairs.pair(j)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::metric_from_partition;
    use crate::partitions::stabilizer_membership;
    use crate::perm::parse_perm;

    #[test]
    fn identity_and_transposition() {
        let d = GeneralizedMetric::standard_omega();
        let r = norm(&Permutation::identity(), &d, 100);
        assert_eq!(r.lower_bound, ExtendedDistance::zero());
        assert_eq!(r.certificate, NormCertificate::CertifiedFinite(Rational::from_integer(0)));
        let t = parse_perm("cycles:(0 5)").unwrap();
        let r = norm(&t, &d, 3);
        assert_eq!(r.lower_bound, ExtendedDistance::int(5));
        assert_eq!(r.certificate, NormCertificate::CertifiedFinite(Rational::from_integer(5)));
        let disc = norm(&t, &GeneralizedMetric::discrete(), 10);
        assert!(matches!(disc.certificate, NormCertificate::CertifiedInfinite(_)));
        assert_eq!(fn_contains(&t, &GeneralizedMetric::discrete(), 10).answer, Tri::No);
    }

    #[test]
    fn rule_certificates() {
        let d = GeneralizedMetric::standard_omega();
        let sw = parse_perm("rule:swap-pairs").unwrap();
        assert_eq!(fn_contains(&sw, &d, 100).answer, Tri::Yes);
        let w = parse_perm("word:[rule:swap-pairs,rule:block-rotate;size=3;shift=1]").unwrap();
        let r = norm(&w, &d, 100);
        assert_eq!(r.certificate, NormCertificate::CertifiedFinite(Rational::from_integer(3)));
        assert!(r.lower_bound <= ExtendedDistance::int(3));
        let z = parse_perm("rule:shift-z").unwrap();
        assert_eq!(fn_contains(&z, &d, 100).answer, Tri::Unknown);
        assert_eq!(fn_contains(&z, &GeneralizedMetric::standard_z(), 100).answer, Tri::Yes);
        let pairs = metric_from_partition(&Partition::pairs()).unwrap();
        assert_eq!(fn_contains(&sw, &pairs, 100).answer, Tri::Yes);
    }

    #[test]
    fn witness_on_omega() {
        let d = GeneralizedMetric::standard_omega();
        assert!(unbounded_witness(&d, &PointSet::all(1000), 0)
            .unwrap()
            .agrees_on(&Permutation::identity(), 100)
            .unwrap());
        let f = unbounded_witness(&d, &PointSet::all(1000), 3).unwrap();
        let cycles = f.cycles().unwrap();
        assert_eq!(cycles.len(), 3);
        for (j, c) in cycles.iter().enumerate() {
            assert!(d.dist(c[0], c[1]).unwrap() >= ExtendedDistance::int(j as i64 + 1));
        }
        for j in 0..=32 {
            let f = unbounded_witness(&d, &PointSet::all(10_000), j).unwrap();
            assert!(norm(&f, &d, 10).lower_bound >= ExtendedDistance::int(j as i64));
        }
    }

    #[test]
    fn small_block_is_insufficient() {
        let a = Partition::explicit("partition:explicit@one", vec![vec![0, 1]], None).unwrap();
        let d = metric_from_partition(&a).unwrap();
        let sigma = PointSet::block(&a, 0, 100);
        assert!(unbounded_witness(&d, &sigma, 1).is_ok());
        assert_eq!(
            unbounded_witness(&d, &sigma, 2).unwrap_err(),
            MetricError::InsufficientSet { found: 1, needed: 2 }
        );
    }

    #[test]
    fn blockwise_witness_stays_in_blocks() {
        let a = Partition::intervals_growing();
        for (d, top) in [
            (GeneralizedMetric::standard_omega(), 32),
            (metric_from_partition(&Partition::pairs()).unwrap(), 32),
            (GeneralizedMetric::ultra_base2(), 8),
        ] {
            for j in [1, 5, top] {
                let f = unbounded_witness_blockwise(&d, &a, j).unwrap();
                assert!(norm(&f, &d, 10).lower_bound >= ExtendedDistance::int(j as i64));
                assert_eq!(stabilizer_membership(&f, &a, 0).unwrap().answer, Tri::Yes);
            }
        }
    }

    #[test]
    fn rule_form_has_growing_witness() {
        let parity = Partition::parity();
        let d = metric_from_partition(&Partition::intervals_growing()).unwrap();
        let sigma = PointSet::block(&parity, 0, 1 << 20);
        let f = unbounded_witness_rule(&d, &sigma);
        assert!(f.verify_window(200).passed);
        let m = fn_contains(&f, &d, 100);
        assert_eq!(m.answer, Tri::No);
        match m.norm.certificate {
            NormCertificate::CertifiedInfinite(pairs) => assert_eq!(pairs.len(), GROWTH_REPLAY),
            c => panic!("{c:?}"),
        }
        assert_eq!(f.apply(1).unwrap(), 1);
        let d2 = GeneralizedMetric::standard_omega();
        let g = unbounded_witness_rule(&d2, &PointSet::all(1 << 20));
        let m = fn_contains(&g, &d2, 100);
        assert_eq!(m.answer, Tri::No);
        assert!(m.norm.lower_bound >= ExtendedDistance::int(GROWTH_REPLAY as i64));
    }
}

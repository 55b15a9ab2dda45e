use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};

use super::{int_below, ExtendedDistance, MetricError, MetricOracle, ValueClass};
use crate::partitions::{Partition, PartitionError};
use crate::perm::{Point, ZEmbedding};
use crate::Rational;

fn too_big(center: Point, r: &Rational, cap: usize) -> MetricError {
    MetricError::NotUncrowded {
        center,
        radius: *r,
        cap,
    }
}

/// Sorted points of the integer window `[c - k, c + k]` mapped through `code`.
fn interval_ball(
    center: i64,
    r: &Rational,
    cap: usize,
    code: impl Fn(i64) -> Option<Point>,
    at: Point,
) -> Result<Vec<Point>, MetricError> {
    let k = int_below(r);
    if k < 0 {
        return Ok(Vec::new());
    }
    if (2 * k + 1) as u128 > cap as u128 {
        return Err(too_big(at, r, cap));
    }
    let mut out: Vec<Point> = (center - k..=center + k).filter_map(code).collect();
    out.sort_unstable();
    Ok(out)
}

/// `|α - β|` on ω.
#[derive(Debug, Clone, Copy)]
pub struct StandardOmega;

impl MetricOracle for StandardOmega {
    fn name(&self) -> String {
        "standard-omega".into()
    }
    fn dist(&self, a: Point, b: Point) -> Result<ExtendedDistance, MetricError> {
        Ok(ExtendedDistance::int(a.abs_diff(b) as i64))
    }
    fn ball(&self, c: Point, r: &Rational, cap: usize) -> Result<Vec<Point>, MetricError> {
        interval_ball(c as i64, r, cap, |z| (z >= 0).then_some(z as Point), c)
    }
    fn uniform_bound(&self, r: &Rational) -> Option<usize> {
        Some((2 * int_below(r) + 1).max(0) as usize)
    }
}

/// `|m - n|` on ℤ, coded into ℕ by [`ZEmbedding`].
#[derive(Debug, Clone, Copy)]
pub struct StandardZ;

impl MetricOracle for StandardZ {
    fn name(&self) -> String {
        "standard-z".into()
    }
    fn dist(&self, a: Point, b: Point) -> Result<ExtendedDistance, MetricError> {
        Ok(ExtendedDistance::int((ZEmbedding::decode(a) - ZEmbedding::decode(b)).abs()))
    }
    fn ball(&self, c: Point, r: &Rational, cap: usize) -> Result<Vec<Point>, MetricError> {
        interval_ball(ZEmbedding::decode(c), r, cap, |z| Some(ZEmbedding::encode(z)), c)
    }
    fn uniform_bound(&self, r: &Rational) -> Option<usize> {
        Some((2 * int_below(r) + 1).max(0) as usize)
    }
}

/// `|√α - √β|`, compared exactly against rational thresholds.
#[derive(Debug, Clone, Copy)]
pub struct Sqrt;

impl MetricOracle for Sqrt {
    fn name(&self) -> String {
        "sqrt".into()
    }
    fn value_class(&self) -> ValueClass {
        ValueClass::ComparisonOnly
    }
    fn dist(&self, _a: Point, _b: Point) -> Result<ExtendedDistance, MetricError> {
        Err(MetricError::ComparisonOnly(self.name()))
    }
    fn cmp_dist(&self, a: Point, b: Point, r: &Rational) -> Result<Ordering, MetricError> {
        // With a ≤ b and r = p/q: √b - √a vs r  ⇔  q²(b - a) - p² vs 2pq√a.
        let (a, b) = (a.min(b) as i128, a.max(b) as i128);
        let (p, q) = (*r.numer() as i128, *r.denom() as i128);
        if p < 0 {
            return Ok(Ordering::Greater);
        }
        let overflow = || MetricError::Unsupported("sqrt comparison overflows 128-bit arithmetic".into());
        let l = q
            .checked_mul(q)
            .and_then(|q2| q2.checked_mul(b - a))
            .and_then(|x| x.checked_sub(p * p))
            .ok_or_else(overflow)?;
        if l < 0 {
            return Ok(Ordering::Less);
        }
        let lhs = l.checked_mul(l).ok_or_else(overflow)?;
        let rhs = (4 * p * p)
            .checked_mul(q * q)
            .and_then(|x| x.checked_mul(a))
            .ok_or_else(overflow)?;
        Ok(lhs.cmp(&rhs))
    }
    fn ball(&self, c: Point, r: &Rational, cap: usize) -> Result<Vec<Point>, MetricError> {
        if *r <= Rational::from_integer(0) {
            return Ok(Vec::new());
        }
        let mut out = vec![c];
        let mut y = c;
        while y > 0 && self.cmp_dist(c, y - 1, r)? == Ordering::Less {
            y -= 1;
            out.push(y);
            if out.len() > cap {
                return Err(too_big(c, r, cap));
            }
        }
        let mut y = c;
        while self.cmp_dist(c, y + 1, r)? == Ordering::Less {
            y += 1;
            out.push(y);
            if out.len() > cap {
                return Err(too_big(c, r, cap));
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// The position of the highest binary digit in which two points differ,
/// counting the units digit as 1.
#[derive(Debug, Clone, Copy)]
pub struct UltraBase2;

impl MetricOracle for UltraBase2 {
    fn name(&self) -> String {
        "ultra-base2".into()
    }
    fn dist(&self, a: Point, b: Point) -> Result<ExtendedDistance, MetricError> {
        Ok(ExtendedDistance::int((Point::BITS - (a ^ b).leading_zeros()) as i64))
    }
    fn ball(&self, c: Point, r: &Rational, cap: usize) -> Result<Vec<Point>, MetricError> {
        let k = int_below(r);
        if k < 0 {
            return Ok(Vec::new());
        }
        if k >= 40 || (1usize << k) > cap {
            return Err(too_big(c, r, cap));
        }
        let base = c & !((1usize << k) - 1);
        Ok((base..base + (1 << k)).collect())
    }
    fn uniform_bound(&self, r: &Rational) -> Option<usize> {
        let k = int_below(r);
        if k < 0 {
            Some(0)
        } else {
            1usize.checked_shl(k.min(63) as u32)
        }
    }
}

fn unpair(p: Point) -> (Point, Point) {
    let w = ((8 * p + 1).isqrt() - 1) / 2;
    let t = w * (w + 1) / 2;
    let v = p - t;
    (w - v, v)
}

fn pair(u: Point, v: Point) -> Point {
    (u + v) * (u + v + 1) / 2 + v
}

/// The word metric of ℤ² with the standard generators; a point `p` is the
/// lattice point whose ZEmbedding codes are the Cantor unpairing of `p`.
#[derive(Debug, Clone, Copy)]
pub struct CayleyZ2;

impl CayleyZ2 {
    pub fn decode(p: Point) -> (i64, i64) {
        let (u, v) = unpair(p);
        (ZEmbedding::decode(u), ZEmbedding::decode(v))
    }

    pub fn encode(x: i64, y: i64) -> Point {
        pair(ZEmbedding::encode(x), ZEmbedding::encode(y))
    }
}

impl MetricOracle for CayleyZ2 {
    fn name(&self) -> String {
        "cayley-z2".into()
    }
    fn dist(&self, a: Point, b: Point) -> Result<ExtendedDistance, MetricError> {
        let ((x1, y1), (x2, y2)) = (Self::decode(a), Self::decode(b));
        Ok(ExtendedDistance::int((x1 - x2).abs() + (y1 - y2).abs()))
    }
    fn ball(&self, c: Point, r: &Rational, cap: usize) -> Result<Vec<Point>, MetricError> {
        let k = int_below(r);
        if k < 0 {
            return Ok(Vec::new());
        }
        if (2 * k * k + 2 * k + 1) as u128 > cap as u128 {
            return Err(too_big(c, r, cap));
        }
        let (x, y) = Self::decode(c);
        let mut out = Vec::new();
        for dx in -k..=k {
            let rem = k - dx.abs();
            for dy in -rem..=rem {
                out.push(Self::encode(x + dx, y + dy));
            }
        }
        out.sort_unstable();
        Ok(out)
    }
    fn uniform_bound(&self, r: &Rational) -> Option<usize> {
        let k = int_below(r);
        Some(if k < 0 { 0 } else { (2 * k * k + 2 * k + 1) as usize })
    }
}

/// The word metric of the free group on `a, b`; point `n` is the `n`-th
/// reduced word in shortlex order with letters ordered `a < a⁻¹ < b < b⁻¹`.
#[derive(Debug, Clone, Copy)]
pub struct CayleyF2;

/// Letters `0..4` are `a, a⁻¹, b, b⁻¹`; the inverse of `x` is `x ^ 1`.
type Letter = u8;

impl CayleyF2 {
    /// Number of reduced words of length `l`.
    fn count(l: u32) -> Point {
        if l == 0 {
            1
        } else {
            4 * 3usize.pow(l - 1)
        }
    }

    pub fn decode(mut n: Point) -> Vec<Letter> {
        let mut l = 0;
        while n >= Self::count(l) {
            n -= Self::count(l);
            l += 1;
        }
        let mut word: Vec<Letter> = Vec::with_capacity(l as usize);
        for i in 0..l {
            let rest = 3usize.pow(l - 1 - i);
            let digit = (n / rest) as u8;
            n %= rest;
            let letter = match word.last() {
                None => digit,
                Some(&prev) => (0..4u8).filter(|&x| x != prev ^ 1).nth(digit as usize).unwrap(),
            };
            word.push(letter);
        }
        word
    }

    pub fn encode(word: &[Letter]) -> Point {
        let l = word.len() as u32;
        let offset: Point = (0..l).map(Self::count).sum();
        let mut rank = 0;
        for (i, &x) in word.iter().enumerate() {
            let digit = if i == 0 {
                x as Point
            } else {
                (0..4u8).filter(|&y| y != word[i - 1] ^ 1).position(|y| y == x).unwrap()
            };
            rank = rank * if i == 0 { 1 } else { 3 } + digit;
        }
        offset + rank
    }
}

impl MetricOracle for CayleyF2 {
    fn name(&self) -> String {
        "cayley-f2".into()
    }
    fn dist(&self, a: Point, b: Point) -> Result<ExtendedDistance, MetricError> {
        let (u, v) = (Self::decode(a), Self::decode(b));
        let lcp = u.iter().zip(&v).take_while(|(x, y)| x == y).count();
        Ok(ExtendedDistance::int((u.len() + v.len() - 2 * lcp) as i64))
    }
    fn ball(&self, c: Point, r: &Rational, cap: usize) -> Result<Vec<Point>, MetricError> {
        let k = int_below(r);
        if k < 0 {
            return Ok(Vec::new());
        }
        if self.uniform_bound(r).is_none_or(|b| b > cap) {
            return Err(too_big(c, r, cap));
        }
        let mut seen = BTreeSet::from([c]);
        let mut queue = VecDeque::from([(Self::decode(c), 0)]);
        while let Some((w, depth)) = queue.pop_front() {
            if depth == k {
                continue;
            }
            for x in 0..4u8 {
                let mut next = w.clone();
                if next.last() == Some(&(x ^ 1)) {
                    next.pop();
                } else {
                    next.push(x);
                }
                if seen.insert(Self::encode(&next)) {
                    queue.push_back((next, depth + 1));
                }
            }
        }
        Ok(seen.into_iter().collect())
    }
    fn uniform_bound(&self, r: &Rational) -> Option<usize> {
        let k = int_below(r);
        if k < 0 {
            return Some(0);
        }
        3usize.checked_pow(k as u32).map(|p| 2 * p - 1)
    }
}

/// `d(α, β) = ∞` for `α ≠ β`.
#[derive(Debug, Clone, Copy)]
pub struct Discrete;

impl MetricOracle for Discrete {
    fn name(&self) -> String {
        "discrete".into()
    }
    fn dist(&self, a: Point, b: Point) -> Result<ExtendedDistance, MetricError> {
        Ok(if a == b {
            ExtendedDistance::zero()
        } else {
            ExtendedDistance::Infinite
        })
    }
    fn ball(&self, c: Point, r: &Rational, _cap: usize) -> Result<Vec<Point>, MetricError> {
        Ok(if *r > Rational::from_integer(0) { vec![c] } else { Vec::new() })
    }
    fn uniform_bound(&self, _r: &Rational) -> Option<usize> {
        Some(1)
    }
    fn finite_class(&self, x: Point, _cap: usize) -> Option<Result<Vec<Point>, MetricError>> {
        Some(Ok(vec![x]))
    }
}

/// `d(α, β) = 1` for `α ≠ β`. Balls of radius above 1 are declared infinite.
#[derive(Debug, Clone, Copy)]
pub struct Unit;

impl MetricOracle for Unit {
    fn name(&self) -> String {
        "unit".into()
    }
    fn dist(&self, a: Point, b: Point) -> Result<ExtendedDistance, MetricError> {
        Ok(ExtendedDistance::int((a != b) as i64))
    }
    fn ball(&self, c: Point, r: &Rational, cap: usize) -> Result<Vec<Point>, MetricError> {
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        if *r <= zero {
            Ok(Vec::new())
        } else if *r <= one {
            Ok(vec![c])
        } else {
            Err(too_big(c, r, cap))
        }
    }
}

/// `d_A`: 0 on the diagonal, 1 within a block of `A`, ∞ across blocks.
#[derive(Clone)]
pub struct PartitionMetric {
    a: Partition,
}

impl PartitionMetric {
    pub fn new(a: Partition) -> Self {
        PartitionMetric { a }
    }

    pub fn partition(&self) -> &Partition {
        &self.a
    }

    fn block(&self, x: Point, cap: usize, r: &Rational) -> Result<Vec<Point>, MetricError> {
        match self.a.block(x) {
            Ok(b) if b.len() > cap => Err(too_big(x, r, cap)),
            Ok(b) => Ok(b),
            Err(PartitionError::InfiniteBlock(_)) => Err(too_big(x, r, cap)),
            Err(e) => Err(e.into()),
        }
    }
}

impl MetricOracle for PartitionMetric {
    fn name(&self) -> String {
        format!("partition@{}", self.a.name())
    }
    fn dist(&self, a: Point, b: Point) -> Result<ExtendedDistance, MetricError> {
        Ok(if a == b {
            ExtendedDistance::zero()
        } else if self.a.block_of(a) == self.a.block_of(b) {
            ExtendedDistance::int(1)
        } else {
            ExtendedDistance::Infinite
        })
    }
    fn ball(&self, c: Point, r: &Rational, cap: usize) -> Result<Vec<Point>, MetricError> {
        if *r <= Rational::from_integer(0) {
            Ok(Vec::new())
        } else if *r <= Rational::from_integer(1) {
            Ok(vec![c])
        } else {
            self.block(c, cap, r)
        }
    }
    fn uniform_bound(&self, r: &Rational) -> Option<usize> {
        let b = self.a.size_bound()?;
        Some(if *r <= Rational::from_integer(0) {
            0
        } else if *r <= Rational::from_integer(1) {
            1
        } else {
            b
        })
    }
    fn finite_class(&self, x: Point, cap: usize) -> Option<Result<Vec<Point>, MetricError>> {
        Some(self.block(x, cap, &Rational::from_integer(2)))
    }
}

//! Built-in rule permutations.

use std::sync::Arc;

use super::{PermError, Permutation, Point, Rule, ZEmbedding};
use crate::Rational;

/// Translation `n ↦ n + by` on ℤ, carried to ℕ by [`ZEmbedding`].
#[derive(Debug, Clone, Copy)]
pub struct ShiftZ {
    pub by: i64,
}

impl ShiftZ {
    pub fn new(by: i64) -> Self {
        ShiftZ { by }
    }
}

impl Rule for ShiftZ {
    fn name(&self) -> String {
        if self.by == 1 {
            "shift-z".into()
        } else {
            format!("shift-z;by={}", self.by)
        }
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        Ok(ZEmbedding::encode(ZEmbedding::decode(x) + self.by))
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        Ok(ZEmbedding::encode(ZEmbedding::decode(x) - self.by))
    }
}

/// The identity as a named rule.
#[derive(Debug, Clone, Copy)]
pub struct IdentityRule;

impl Rule for IdentityRule {
    fn name(&self) -> String {
        "identity".into()
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        Ok(x)
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        Ok(x)
    }
}

/// Sends `Σ_i = {4e, 4e+1}` onto `Σ_{i+1}` where `e` is the [`ZEmbedding`]
/// code of `i`, fixing every point congruent to 2 or 3 mod 4.
#[derive(Debug, Clone, Copy)]
pub struct BlockShiftZ;

impl BlockShiftZ {
    fn step(x: Point, by: i64) -> Point {
        if x % 4 >= 2 {
            return x;
        }
        4 * ZEmbedding::encode(ZEmbedding::decode(x / 4) + by) + x % 4
    }
}

impl Rule for BlockShiftZ {
    fn name(&self) -> String {
        "block-shift-z".into()
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        Ok(Self::step(x, 1))
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        Ok(Self::step(x, -1))
    }
}

/// Swaps `2k` and `2k+1` for every `k`.
#[derive(Debug, Clone, Copy)]
pub struct SwapPairs;

impl Rule for SwapPairs {
    fn name(&self) -> String {
        "swap-pairs".into()
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        Ok(x ^ 1)
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        Ok(x ^ 1)
    }
}

/// Rotates each block `[qk, qk+k)` by `shift` positions.
#[derive(Debug, Clone, Copy)]
pub struct BlockRotate {
    pub size: usize,
    pub shift: usize,
}

impl BlockRotate {
    pub fn new(size: usize, shift: usize) -> Self {
        assert!(size > 0, "block size must be positive");
        BlockRotate {
            size,
            shift: shift % size,
        }
    }
}

impl Rule for BlockRotate {
    fn name(&self) -> String {
        format!("block-rotate;size={};shift={}", self.size, self.shift)
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        let (q, r) = (x / self.size, x % self.size);
        Ok(q * self.size + (r + self.shift) % self.size)
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        let (q, r) = (x / self.size, x % self.size);
        Ok(q * self.size + (r + self.size - self.shift) % self.size)
    }
}

/// Reverses each block `[qk, qk+k)`.
#[derive(Debug, Clone, Copy)]
pub struct BlockReverse {
    pub size: usize,
}

impl Rule for BlockReverse {
    fn name(&self) -> String {
        format!("block-reverse;size={}", self.size)
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        let (q, r) = (x / self.size, x % self.size);
        Ok(q * self.size + self.size - 1 - r)
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        self.forward(x)
    }
}

type Dir = Arc<dyn Fn(Point) -> Result<Point, PermError> + Send + Sync>;

/// A rule from a pair of closures.
#[derive(Clone)]
pub struct FnRule {
    name: String,
    fwd: Dir,
    bwd: Dir,
}

impl FnRule {
    pub fn new(
        name: &str,
        fwd: impl Fn(Point) -> Result<Point, PermError> + Send + Sync + 'static,
        bwd: impl Fn(Point) -> Result<Point, PermError> + Send + Sync + 'static,
    ) -> Self {
        FnRule {
            name: name.to_string(),
            fwd: Arc::new(fwd),
            bwd: Arc::new(bwd),
        }
    }
}

impl Rule for FnRule {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn forward(&self, x: Point) -> Result<Point, PermError> {
        (self.fwd)(x)
    }
    fn backward(&self, x: Point) -> Result<Point, PermError> {
        (self.bwd)(x)
    }
}

/// Looks up a built-in rule by name and `key=value` parameters.
pub fn builtin_rule(name: &str, params: &[(String, i64)]) -> Result<Arc<dyn Rule>, String> {
    let get = |k: &str| params.iter().find(|(n, _)| n == k).map(|(_, v)| *v);
    let known = |allowed: &[&str]| -> Result<(), String> {
        match params.iter().find(|(n, _)| !allowed.contains(&n.as_str())) {
            Some((n, _)) => Err(format!("unknown parameter `{n}` for rule `{name}`")),
            None => Ok(()),
        }
    };
    let positive = |k: &str, default: i64| -> Result<usize, String> {
        let v = get(k).unwrap_or(default);
        if v <= 0 {
            Err(format!("parameter `{k}` must be positive"))
        } else {
            Ok(v as usize)
        }
    };
    match name {
        "identity" => {
            known(&[])?;
            Ok(Arc::new(IdentityRule))
        }
        "shift-z" => {
            known(&["by"])?;
            Ok(Arc::new(ShiftZ::new(get("by").unwrap_or(1))))
        }
        "swap-pairs" => {
            known(&[])?;
            Ok(Arc::new(SwapPairs))
        }
        "block-shift-z" => {
            known(&[])?;
            Ok(Arc::new(BlockShiftZ))
        }
        "block-rotate" => {
            known(&["size", "shift"])?;
            let size = positive("size", 2)?;
            let shift = get("shift").unwrap_or(1).rem_euclid(size as i64) as usize;
            Ok(Arc::new(BlockRotate::new(size, shift)))
        }
        "block-reverse" => {
            known(&["size"])?;
            Ok(Arc::new(BlockReverse {
                size: positive("size", 2)?,
            }))
        }
        _ => Err(format!("unknown rule `{name}`")),
    }
}

/// Attaches the certificates a built-in rule is known to satisfy.
pub(crate) fn certify(p: Permutation, name: &str, params: &[(String, i64)]) -> Permutation {
    let get = |k: &str| params.iter().find(|(n, _)| n == k).map(|(_, v)| *v);
    match name {
        "identity" => p
            .with_support_bound(0)
            .with_displacement("standard-omega", Rational::from_integer(0))
            .with_displacement("standard-z", Rational::from_integer(0)),
        "shift-z" => {
            p.with_displacement("standard-z", Rational::from_integer(get("by").unwrap_or(1).abs()))
        }
        "swap-pairs" => p
            .with_displacement("standard-omega", Rational::from_integer(1))
            .with_block_certificate("partition:pairs"),
        "block-rotate" | "block-reverse" => {
            let size = get("size").unwrap_or(2);
            p.with_displacement("standard-omega", Rational::from_integer(size - 1))
        }
        _ => p,
    }
}

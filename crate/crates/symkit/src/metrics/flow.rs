//! Bounded permutations of ℤ and ω: net flow across cuts and factorization
//! into two stabilizers of interval partitions.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::sync::Arc;

use serde::Serialize;

use super::{certified_norm_bound, ExtendedDistance, GeneralizedMetric, MetricError};
use crate::local::{decompose_with, FixedStep};
use crate::perm::{Permutation, ZEmbedding};

/// Upward minus downward crossers at each cut; cut `c` separates `c - 1` from `c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowValue {
    pub per_cut: BTreeMap<i64, i64>,
    pub common_value: Option<i64>,
}

fn certified_int_bound(f: &Permutation, d: &GeneralizedMetric) -> Result<i64, MetricError> {
    match certified_norm_bound(f, d)? {
        Some(ExtendedDistance::Finite(b)) => Ok(b.ceil().to_integer()),
        _ => Err(MetricError::NoCertificate(format!(
            "{} has no finite norm certificate under {}",
            f.to_text(),
            d.name()
        ))),
    }
}

/// Net flow of a permutation of ℤ (coded by [`ZEmbedding`]) across each cut.
/// Only points within the certified displacement bound of a cut can cross it.
pub fn net_flow(f: &Permutation, cuts: RangeInclusive<i64>) -> Result<FlowValue, MetricError> {
    let k = certified_int_bound(f, &GeneralizedMetric::standard_z())?;
    let mut per_cut = BTreeMap::new();
    for c in cuts {
        let mut v = 0;
        for z in c - k..c + k {
            let w = ZEmbedding::decode(f.apply(ZEmbedding::encode(z))?);
            if z < c && w >= c {
                v += 1;
            }
            if z >= c && w < c {
                v -= 1;
            }
        }
        per_cut.insert(c, v);
    }
    let mut values = per_cut.values();
    let first = values.next().copied();
    let common_value = first.filter(|&x| values.all(|&y| y == x));
    Ok(FlowValue { per_cut, common_value })
}

/// `f = b1·b2` with `b1` preserving each `Σ_{2i} ∪ Σ_{2i+1}` and `b2` each
/// `Σ_{2i-1} ∪ Σ_{2i}`, where `Σ_i = [n·i, n·(i+1))`.
#[derive(Debug, Clone)]
pub struct OmegaFactors {
    /// The interval length `n`, the certified norm rounded up (at least 1).
    pub step: usize,
    pub b1: Permutation,
    pub b2: Permutation,
}

/// Factors a permutation of ω with a certified finite norm under the standard metric.
pub fn factor_fn_omega(f: &Permutation) -> Result<OmegaFactors, MetricError> {
    let n = certified_int_bound(f, &GeneralizedMetric::standard_omega())?.max(1) as usize;
    let (b1, b2) = decompose_with(f, Arc::new(FixedStep(n)));
    Ok(OmegaFactors { step: n, b1, b2 })
}

//! Discreteness and the compactness criterion for described groups.

use std::collections::BTreeSet;

use serde::Serialize;

use super::classify::{nonsingleton_union, orbit, ProbeRecord, ProbeResult};
use super::{ClassBudget, GroupDescriptor};
use crate::partitions::{Count, Partition, Profile};
use crate::perm::{Permutation, Point};
use crate::Tri;

/// Whether some finite `Γ` has `G_(Γ) = {1}`.
#[derive(Debug, Clone, Serialize)]
pub struct DiscretenessReport {
    pub answer: Tri,
    /// A `Γ` with trivial stabilizer when the answer is yes.
    pub gamma: Option<Vec<Point>>,
    /// Nontrivial elements of `G_(Γ)` for each tested `Γ`.
    #[serde(serialize_with = "witnesses_as_text")]
    pub witnesses: Vec<(Vec<Point>, Permutation)>,
    pub reason: String,
}

/// A subgroup of `Sym(ℕ)` is compact exactly when it is closed and all of
/// its orbits are finite.
#[derive(Debug, Clone, Serialize)]
pub struct CompactnessReport {
    pub answer: Tri,
    pub closed: Tri,
    pub finite_orbits: Tri,
    pub probes: Vec<ProbeRecord>,
    pub reason: String,
}

fn witnesses_as_text<S: serde::Serializer>(w: &[(Vec<Point>, Permutation)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(w.iter().map(|(g, p)| (g, p.to_text())))
}

enum Element {
    Nontrivial(Permutation),
    Trivial,
    Unknown,
}

fn as_set(p: &[Point]) -> BTreeSet<Point> {
    p.iter().copied().collect()
}

/// Whether `A` has an infinite block or infinitely many nonsingleton blocks.
fn partition_nondiscrete(a: &Partition) -> bool {
    match a.profile() {
        Profile::HasInfiniteBlock { .. } | Profile::UnboundedFinite => true,
        Profile::BoundedBy { nonsingletons, bound } => nonsingletons == Count::Infinite && bound >= 2,
    }
}

/// Exact non-discreteness from the descriptor's structure.
fn structurally_nondiscrete(g: &GroupDescriptor) -> Option<bool> {
    match g {
        GroupDescriptor::FullS => Some(true),
        GroupDescriptor::TrivialGroup | GroupDescriptor::FiniteSupportGroup { .. } => Some(false),
        GroupDescriptor::PartitionStabilizer(a) => Some(partition_nondiscrete(a)),
        GroupDescriptor::FnGroup(d) => {
            if let Some(a) = GroupDescriptor::partition_of_metric(d) {
                return Some(partition_nondiscrete(&a));
            }
            match d.name().as_str() {
                "standard-omega" | "standard-z" | "unit" => Some(true),
                "discrete" => Some(false),
                _ => None,
            }
        }
        GroupDescriptor::PointwiseStabilizer { inner, .. } => structurally_nondiscrete(inner),
        GroupDescriptor::OracleGroup(_) => None,
    }
}

/// Candidate sets whose stabilizer the descriptor makes trivial.
fn suggested_gamma(g: &GroupDescriptor) -> Option<Vec<Point>> {
    match g {
        GroupDescriptor::TrivialGroup => Some(Vec::new()),
        GroupDescriptor::FiniteSupportGroup { group, .. } => Some(group.support().to_vec()),
        GroupDescriptor::PartitionStabilizer(a) => nonsingleton_union(a, a.profile()),
        GroupDescriptor::FnGroup(d) => match GroupDescriptor::partition_of_metric(d) {
            Some(a) => nonsingleton_union(&a, a.profile()),
            None => (d.name() == "discrete").then(Vec::new),
        },
        GroupDescriptor::PointwiseStabilizer { inner, gamma } => {
            let mut s = as_set(&suggested_gamma(inner)?);
            s.extend(gamma.iter().copied());
            Some(s.into_iter().collect())
        }
        _ => None,
    }
}

/// Exact triviality of `G_(Γ)`, or a nontrivial element found by probing.
fn element_in(g: &GroupDescriptor, gamma: &[Point], budget: &ClassBudget) -> Element {
    let gset = as_set(gamma);
    if let GroupDescriptor::FiniteSupportGroup { group, .. } = g {
        return match group.nontrivial_in_stabilizer(&gset) {
            Some(p) => Element::Nontrivial(p),
            None => Element::Trivial,
        };
    }
    if let Some(s) = suggested_gamma(g) {
        if s.iter().all(|x| gset.contains(x)) {
            return Element::Trivial;
        }
    }
    let o = g.oracle();
    let top = gamma.iter().max().map_or(0, |m| m + 1) + budget.samples;
    for alpha in (0..top).filter(|x| !gset.contains(x)) {
        let Ok(r) = o.orbit(&gset, alpha, 2) else { continue };
        if let Some(&beta) = r.points().iter().find(|&&b| b != alpha) {
            if let Ok(p) = o.act(&gset, alpha, beta) {
                return Element::Nontrivial(p);
            }
        }
    }
    Element::Unknown
}

/// Decides discreteness from the descriptor, recording nontrivial elements
/// of `G_(Γ)` for every tested `Γ`.
pub fn discreteness(g: &GroupDescriptor, budget: &ClassBudget) -> DiscretenessReport {
    let mut candidates: Vec<Vec<Point>> = (0..=budget.gamma_max).map(|k| (0..k).collect()).collect();
    candidates.extend(suggested_gamma(g));
    let mut witnesses = Vec::new();
    let mut unknown = false;
    for gamma in candidates {
        match element_in(g, &gamma, budget) {
            Element::Trivial => {
                return DiscretenessReport {
                    answer: Tri::Yes,
                    reason: format!("the stabilizer of {gamma:?} is trivial"),
                    gamma: Some(gamma),
                    witnesses,
                }
            }
            Element::Nontrivial(p) => witnesses.push((gamma, p)),
            Element::Unknown => unknown = true,
        }
    }
    let (answer, reason) = match structurally_nondiscrete(g) {
        Some(true) => (
            Tri::No,
            "every finite set misses a moved pair of points, so every pointwise stabilizer is nontrivial".to_string(),
        ),
        Some(false) => (Tri::Unknown, "no trivial stabilizer found within the budget".to_string()),
        None if unknown => (Tri::Unknown, "some stabilizers showed no moved point within the budget".to_string()),
        None => (
            Tri::Unknown,
            format!("nontrivial stabilizers for every initial segment up to {}", budget.gamma_max),
        ),
    };
    DiscretenessReport {
        answer,
        gamma: None,
        witnesses,
        reason,
    }
}

fn closed(g: &GroupDescriptor) -> Tri {
    match g {
        GroupDescriptor::FullS
        | GroupDescriptor::TrivialGroup
        | GroupDescriptor::PartitionStabilizer(_)
        | GroupDescriptor::FiniteSupportGroup { .. } => Tri::Yes,
        GroupDescriptor::PointwiseStabilizer { inner, .. } => closed(inner),
        GroupDescriptor::FnGroup(d) => {
            if GroupDescriptor::partition_of_metric(d).is_some() {
                return Tri::Yes;
            }
            match d.name().as_str() {
                "discrete" | "unit" => Tri::Yes,
                "standard-omega" | "standard-z" => Tri::No,
                _ => Tri::Unknown,
            }
        }
        GroupDescriptor::OracleGroup(o) => {
            if o.closed() {
                Tri::Yes
            } else {
                Tri::Unknown
            }
        }
    }
}

fn profile_orbits(p: Profile) -> Tri {
    match p {
        Profile::HasInfiniteBlock { .. } => Tri::No,
        _ => Tri::Yes,
    }
}

/// Finite orbits from structure; `None` when only probing can tell.
fn structural_orbits(g: &GroupDescriptor) -> Option<Tri> {
    match g {
        GroupDescriptor::FullS => Some(Tri::No),
        GroupDescriptor::TrivialGroup | GroupDescriptor::FiniteSupportGroup { .. } => Some(Tri::Yes),
        GroupDescriptor::PartitionStabilizer(a) => Some(profile_orbits(a.profile())),
        GroupDescriptor::FnGroup(d) => {
            if let Some(a) = GroupDescriptor::partition_of_metric(d) {
                return Some(profile_orbits(a.profile()));
            }
            match d.name().as_str() {
                "discrete" => Some(Tri::Yes),
                "unit" | "standard-omega" | "standard-z" => Some(Tri::No),
                _ => None,
            }
        }
        GroupDescriptor::PointwiseStabilizer { inner, .. } => match structural_orbits(inner)? {
            Tri::Yes => Some(Tri::Yes),
            // Every infinite orbit above is cofinite in a block or in ℕ, so it
            // stays infinite after fixing finitely many points.
            other => Some(other),
        },
        GroupDescriptor::OracleGroup(_) => None,
    }
}

/// `G` is compact iff it is closed and all orbits of `G` are finite.
pub fn compactness_criterion(g: &GroupDescriptor, budget: &ClassBudget) -> CompactnessReport {
    let mut probes = Vec::new();
    let mut max = 0;
    for alpha in 0..budget.samples {
        if let Ok(mut r) = orbit(g, &[], alpha, budget.orbit_budget) {
            max = max.max(r.result.size());
            r.max_observed = max;
            probes.push(r);
        }
    }
    let saturated = probes.iter().any(|p| matches!(p.result, ProbeResult::AtLeast(_)));
    let finite_orbits = structural_orbits(g).unwrap_or(if saturated { Tri::No } else { Tri::Unknown });
    let closed = closed(g);
    let answer = match (closed, finite_orbits) {
        (Tri::No, _) | (_, Tri::No) => Tri::No,
        (Tri::Yes, Tri::Yes) => Tri::Yes,
        _ => Tri::Unknown,
    };
    let reason = match answer {
        Tri::Yes => "closed with all orbits finite".to_string(),
        Tri::No if closed == Tri::No => "not closed in Sym(ℕ)".to_string(),
        Tri::No if saturated => format!("an orbit has at least {} points", budget.orbit_budget),
        Tri::No => "some orbit is infinite".to_string(),
        Tri::Unknown => format!("closed: {closed:?}, finite orbits: {finite_orbits:?}"),
    };
    CompactnessReport {
        answer,
        closed,
        finite_orbits,
        probes,
        reason,
    }
}

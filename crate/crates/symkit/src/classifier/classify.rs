//! Orbit probes, the four-class classifier and its evidence checker.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{ClassBudget, ClassLabel, ClassifierError, GroupDescriptor, Label};
use crate::metrics::{classify_metric, GeneralizedMetric, MetricBudget, MetricCase};
use crate::partitions::{classify_partition, ClassTag, Count, Partition, Profile};
use crate::perm::Point;
use crate::trees::{GroupOracle, OrbitResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum ProbeResult {
    /// The complete orbit, sorted.
    FullOrbit(Vec<Point>),
    /// At least this many points.
    AtLeast(usize),
}

impl ProbeResult {
    pub fn size(&self) -> usize {
        match self {
            ProbeResult::FullOrbit(p) => p.len(),
            ProbeResult::AtLeast(n) => *n,
        }
    }

    pub fn is_singleton(&self) -> bool {
        matches!(self, ProbeResult::FullOrbit(p) if p.len() == 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeRecord {
    pub gamma: Vec<Point>,
    pub alpha: Point,
    pub result: ProbeResult,
    /// Largest orbit size seen so far for this `Γ`.
    pub max_observed: usize,
}

pub type OrbitReport = ProbeRecord;

/// The descriptor-level fact a label rests on.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// No certificate; the label is read off the probes.
    Probing,
    /// The group is `Sym(ℕ)`.
    FullGroup,
    Trivial,
    /// `S_(A)` with its checked profile.
    Stabilizer { partition: String, profile: Profile },
    /// Generated by finitely supported permutations; `G_(support) = {1}`.
    FiniteGroup { order: usize, support: Vec<Point> },
    /// An FN group whose class follows from its metric.
    FnRecorded { metric: String, argument: String },
    /// An FN group of a partition metric, equal to the partition's stabilizer.
    FnPartition { partition: String, inner: Box<Evidence> },
    /// `G_(Γ)` has the label of `G`.
    Inherited { inner: Box<Evidence>, inner_label: Label },
    /// Every point below `horizon` is fixed by the group.
    BudgetTrivial { horizon: usize },
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evidence {
    pub descriptor: String,
    pub gamma: Vec<Point>,
    pub probes: Vec<ProbeRecord>,
    pub budgets: ClassBudget,
    pub certified: bool,
    pub qualification: Option<String>,
    pub certificate: Certificate,
    pub metric_case: Option<MetricCase>,
    pub note: String,
}

fn convert(r: OrbitResult) -> ProbeResult {
    match r {
        OrbitResult::Full(mut p) => {
            p.sort_unstable();
            ProbeResult::FullOrbit(p)
        }
        OrbitResult::AtLeast(p) => ProbeResult::AtLeast(p.len()),
    }
}

fn probe_one(o: &dyn GroupOracle, gamma: &[Point], alpha: Point, budget: usize) -> Result<ProbeResult, ClassifierError> {
    let g: BTreeSet<Point> = gamma.iter().copied().collect();
    Ok(convert(o.orbit(&g, alpha, budget)?))
}

/// Probes `alpha` for each `Γ`, tracking the running maximum per `Γ`.
fn probe_all(
    o: &dyn GroupOracle,
    plan: &[(Vec<Point>, Vec<Point>)],
    budget: usize,
) -> Result<Vec<ProbeRecord>, ClassifierError> {
    let mut out = Vec::new();
    for (gamma, alphas) in plan {
        let mut max = 0;
        for &alpha in alphas {
            let result = probe_one(o, gamma, alpha, budget)?;
            max = max.max(result.size());
            out.push(ProbeRecord {
                gamma: gamma.clone(),
                alpha,
                result,
                max_observed: max,
            });
        }
    }
    Ok(out)
}

/// The orbit of `alpha` under `G_(Γ)`, listing at most `budget` points.
pub fn orbit(g: &GroupDescriptor, gamma: &[Point], alpha: Point, budget: usize) -> Result<OrbitReport, ClassifierError> {
    let result = probe_one(g.oracle().as_ref(), gamma, alpha, budget)?;
    Ok(ProbeRecord {
        gamma: gamma.to_vec(),
        alpha,
        max_observed: result.size(),
        result,
    })
}

fn segment(k: usize) -> Vec<Point> {
    (0..k).collect()
}

fn evidence(g: &GroupDescriptor, budget: &ClassBudget, certificate: Certificate) -> Evidence {
    Evidence {
        descriptor: g.to_string(),
        gamma: Vec::new(),
        probes: Vec::new(),
        budgets: *budget,
        certified: true,
        qualification: None,
        certificate,
        metric_case: None,
        note: String::new(),
    }
}

fn finish(label: Label, evidence: Evidence) -> ClassLabel {
    ClassLabel {
        label,
        lambda_case: label.lambda_case(),
        evidence,
    }
}

/// Classifies `g` by its orbit behavior. Descriptors with exact structure
/// receive certified labels; others are probed and qualified by the budget.
pub fn classify_group(g: &GroupDescriptor, budget: &ClassBudget) -> ClassLabel {
    classify_inner(g, budget).unwrap_or_else(|e| {
        let mut ev = evidence(g, budget, Certificate::None);
        ev.certified = false;
        ev.note = format!("probe failed: {e}");
        finish(Label::Unknown, ev)
    })
}

fn classify_inner(g: &GroupDescriptor, b: &ClassBudget) -> Result<ClassLabel, ClassifierError> {
    let o = g.oracle();
    match g {
        GroupDescriptor::FullS => {
            let plan: Vec<_> = (0..=b.gamma_max).map(|k| (segment(k), vec![k])).collect();
            let mut ev = evidence(g, b, Certificate::FullGroup);
            ev.probes = probe_all(o.as_ref(), &plan, b.orbit_budget)?;
            ev.gamma = segment(b.gamma_max);
            ev.note = "G_(Γ) moves every point outside Γ to every other such point".into();
            Ok(finish(Label::CS, ev))
        }
        GroupDescriptor::TrivialGroup => {
            let mut ev = evidence(g, b, Certificate::Trivial);
            ev.probes = probe_all(o.as_ref(), &[(Vec::new(), segment(b.samples))], b.orbit_budget)?;
            ev.note = "G = {1} with Γ = ∅".into();
            Ok(finish(Label::C1, ev))
        }
        GroupDescriptor::PartitionStabilizer(a) => stabilizer_label(g, a, b),
        GroupDescriptor::FiniteSupportGroup { group, .. } => {
            let support = group.support().to_vec();
            let mut ev = evidence(
                g,
                b,
                Certificate::FiniteGroup {
                    order: group.order(),
                    support: support.clone(),
                },
            );
            ev.probes = probe_all(o.as_ref(), &[(support.clone(), support.clone())], b.orbit_budget)?;
            ev.note = format!("every element moves only points of the generator supports; order {}", group.order());
            ev.gamma = support;
            Ok(finish(Label::C1, ev))
        }
        GroupDescriptor::FnGroup(d) => fn_label(g, d, b),
        GroupDescriptor::PointwiseStabilizer { inner, gamma } => {
            let inner_label = classify_inner(inner, b)?;
            let gamma: Vec<Point> = gamma.iter().copied().collect();
            if inner_label.evidence.certified && inner_label.label == Label::C1 {
                return Ok(inherited(g, b, inner_label, &gamma));
            }
            let probes = probe_all(o.as_ref(), &[(Vec::new(), segment(b.samples))], b.orbit_budget)?;
            if probes.iter().all(|p| p.result.is_singleton()) {
                let mut ev = evidence(g, b, Certificate::BudgetTrivial { horizon: b.samples });
                ev.certified = false;
                ev.qualification = Some(format!(
                    "budget-certified: G_(Γ) fixes every point below {}",
                    b.samples
                ));
                ev.probes = probes;
                ev.gamma = gamma;
                ev.note = format!(
                    "the inner group is labelled {}; within the probe budget its stabilizer of Γ acts trivially",
                    inner_label.label.as_str()
                );
                return Ok(finish(Label::C1, ev));
            }
            if inner_label.evidence.certified {
                return Ok(inherited(g, b, inner_label, &gamma));
            }
            probing(g, b)
        }
        GroupDescriptor::OracleGroup(_) => probing(g, b),
    }
}

fn inherited(g: &GroupDescriptor, b: &ClassBudget, inner: ClassLabel, gamma: &[Point]) -> ClassLabel {
    let label = inner.label;
    let mut all: BTreeSet<Point> = inner.evidence.gamma.iter().copied().collect();
    all.extend(gamma.iter().copied());
    let mut ev = evidence(
        g,
        b,
        Certificate::Inherited {
            inner: Box::new(inner.evidence),
            inner_label: label,
        },
    );
    ev.gamma = all.into_iter().collect();
    ev.note = "(G_(Γ₀))_(Γ) = G_(Γ₀ ∪ Γ), so each of the four conditions passes between G and G_(Γ₀)".into();
    finish(label, ev)
}

/// The label a partition's declared profile determines.
fn label_of_profile(p: Profile) -> Label {
    match p {
        Profile::HasInfiniteBlock { .. } => Label::CS,
        Profile::UnboundedFinite => Label::CP,
        Profile::BoundedBy {
            bound,
            nonsingletons: Count::Infinite,
        } if bound >= 2 => Label::CQ,
        Profile::BoundedBy { .. } => Label::C1,
    }
}

fn stabilizer_label(g: &GroupDescriptor, a: &Partition, b: &ClassBudget) -> Result<ClassLabel, ClassifierError> {
    let o = g.oracle();
    let profile = a.profile();
    let mut ev = evidence(
        g,
        b,
        Certificate::Stabilizer {
            partition: a.name().to_string(),
            profile,
        },
    );
    let tag = match classify_partition(a) {
        Ok(t) => t,
        Err(e) => {
            ev.certified = false;
            ev.certificate = Certificate::None;
            ev.note = format!("declared profile failed its check: {e}");
            return Ok(finish(Label::Unknown, ev));
        }
    };
    let label = match tag.tag {
        ClassTag::InP => Label::CP,
        ClassTag::InQ => Label::CQ,
        ClassTag::Neither => label_of_profile(profile),
    };
    let plan = [(Vec::new(), segment(b.samples)), (segment(b.gamma_max), segment(b.samples))];
    ev.probes = probe_all(o.as_ref(), &plan, b.orbit_budget)?;
    ev.gamma = match label {
        Label::CS => segment(b.gamma_max),
        Label::C1 => nonsingleton_union(a, profile).unwrap_or_default(),
        _ => Vec::new(),
    };
    ev.note = tag.reason;
    Ok(finish(label, ev))
}

/// The union of all blocks of size above one, when there are finitely many
/// and all of them lie below the scan horizon.
pub(crate) fn nonsingleton_union(a: &Partition, profile: Profile) -> Option<Vec<Point>> {
    let Profile::BoundedBy {
        nonsingletons: Count::Finite(n),
        ..
    } = profile
    else {
        return None;
    };
    let mut found = 0;
    let mut pts = Vec::new();
    for id in a.block_ids_in(0, 1 << 16) {
        if found == n {
            break;
        }
        let m = a.block_members(id).ok()?;
        if m.len() > 1 {
            found += 1;
            pts.extend(m);
        }
    }
    (found == n).then_some(pts)
}

/// Metrics whose FN group has a recorded class, with the argument.
fn recorded_fn(name: &str) -> Option<(Label, &'static str)> {
    match name {
        "standard-omega" | "standard-z" => Some((
            Label::CQ,
            "FN(d) is a product of conjugates of the stabilizer of a partition into pairs, by the explicit factorization",
        )),
        "discrete" => Some((Label::C1, "distinct points are at infinite distance, so FN(d) = {1}")),
        "unit" => Some((Label::CS, "all distances are at most 1, so FN(d) = Sym(ℕ)")),
        _ => None,
    }
}

fn fn_label(g: &GroupDescriptor, d: &GeneralizedMetric, b: &ClassBudget) -> Result<ClassLabel, ClassifierError> {
    if let Some(a) = GroupDescriptor::partition_of_metric(d) {
        let inner = stabilizer_label(&GroupDescriptor::PartitionStabilizer(a.clone()), &a, b)?;
        let mut ev = evidence(
            g,
            b,
            Certificate::FnPartition {
                partition: a.name().to_string(),
                inner: Box::new(inner.evidence.clone()),
            },
        );
        ev.certified = inner.evidence.certified;
        ev.gamma = inner.evidence.gamma.clone();
        ev.note = "a permutation has finite norm under d_A exactly when it preserves every block".into();
        return Ok(finish(inner.label, ev));
    }
    let name = d.name();
    if let Some((label, argument)) = recorded_fn(&name) {
        let mut ev = evidence(
            g,
            b,
            Certificate::FnRecorded {
                metric: name,
                argument: argument.into(),
            },
        );
        let probes = b.samples.min(8);
        ev.probes = probe_all(g.oracle().as_ref(), &[(Vec::new(), segment(probes))], b.orbit_budget)?;
        return Ok(finish(label, ev));
    }
    let case = classify_metric(d, &MetricBudget::default()).case;
    let mut ev = evidence(g, b, Certificate::None);
    ev.certified = false;
    ev.metric_case = Some(case);
    ev.note = format!("no recorded class for FN({name}); its metric falls under {case:?}");
    Ok(finish(Label::Unknown, ev))
}

fn probing(g: &GroupDescriptor, b: &ClassBudget) -> Result<ClassLabel, ClassifierError> {
    let plan: Vec<_> = (0..=b.gamma_max)
        .map(|k| (segment(k), (k..k + b.samples).collect()))
        .collect();
    let probes = probe_all(g.oracle().as_ref(), &plan, b.orbit_budget)?;
    let (label, gamma, note) = decide_from_probes(&probes, b.orbit_budget);
    let mut ev = evidence(g, b, Certificate::Probing);
    ev.certified = false;
    ev.qualification = Some("budget".into());
    ev.probes = probes;
    ev.gamma = gamma;
    ev.note = note;
    Ok(finish(label, ev))
}

/// Reads a label off probe records grouped by `Γ`.
///
/// `C_S` when every `Γ` shows an orbit reaching the orbit budget; otherwise
/// the first `Γ` with only complete orbits decides: all singletons gives
/// `C_1` (checked on every such `Γ` first), orbit sizes rising from the
/// first half of the probed points to the second gives `C_P`, and `C_Q`
/// otherwise.
pub fn decide_from_probes(probes: &[ProbeRecord], orbit_budget: usize) -> (Label, Vec<Point>, String) {
    let mut groups: Vec<(&[Point], Vec<&ProbeRecord>)> = Vec::new();
    for p in probes {
        match groups.last_mut() {
            Some((g, v)) if *g == p.gamma.as_slice() => v.push(p),
            _ => groups.push((&p.gamma, vec![p])),
        }
    }
    if groups.is_empty() {
        return (Label::Unknown, Vec::new(), "no probes".into());
    }
    let infinite = |v: &[&ProbeRecord]| {
        v.iter()
            .any(|p| matches!(p.result, ProbeResult::AtLeast(n) if n >= orbit_budget))
    };
    if groups.iter().all(|(_, v)| infinite(v)) {
        let (g, _) = groups.last().unwrap();
        return (
            Label::CS,
            g.to_vec(),
            format!("every probed Γ has an orbit of at least {orbit_budget} points"),
        );
    }
    if let Some((g, _)) = groups.iter().find(|(_, v)| v.iter().all(|p| p.result.is_singleton())) {
        return (Label::C1, g.to_vec(), "all probed orbits are singletons".into());
    }
    let complete = groups
        .iter()
        .find(|(_, v)| v.iter().all(|p| matches!(p.result, ProbeResult::FullOrbit(_))));
    let Some((g, v)) = complete else {
        return (
            Label::Unknown,
            Vec::new(),
            "some Γ has only complete orbits, none reaches the orbit budget everywhere".into(),
        );
    };
    let half = v.len() / 2;
    let first = v[..half].iter().map(|p| p.result.size()).max().unwrap_or(0);
    let second = v[half..].iter().map(|p| p.result.size()).max().unwrap_or(0);
    if second > first {
        (Label::CP, g.to_vec(), format!("orbit sizes rise from {first} to {second} across the probed points"))
    } else {
        (Label::CQ, g.to_vec(), format!("probed orbit sizes stay at most {first}"))
    }
}

/// Replays every probe and re-derives the label from the evidence alone.
pub fn check_evidence(g: &GroupDescriptor, claim: &ClassLabel) -> Result<(), String> {
    if claim.lambda_case != claim.label.lambda_case() {
        return Err("λ case does not match the label".into());
    }
    let derived = derive(g, &claim.evidence)?;
    if derived != claim.label {
        return Err(format!(
            "evidence gives {}, claim is {}",
            derived.as_str(),
            claim.label.as_str()
        ));
    }
    Ok(())
}

fn replay(g: &GroupDescriptor, ev: &Evidence) -> Result<(), String> {
    if ev.descriptor != g.to_string() {
        return Err(format!("evidence is for {}, not {g}", ev.descriptor));
    }
    let o = g.oracle();
    for p in &ev.probes {
        let gamma: BTreeSet<Point> = p.gamma.iter().copied().collect();
        let again = o
            .orbit(&gamma, p.alpha, ev.budgets.orbit_budget)
            .map_err(|e| e.to_string())?;
        let again = match again {
            OrbitResult::Full(mut pts) => {
                pts.sort_unstable();
                ProbeResult::FullOrbit(pts)
            }
            OrbitResult::AtLeast(pts) => ProbeResult::AtLeast(pts.len()),
        };
        if again != p.result {
            return Err(format!("probe of {} with Γ = {:?} does not replay", p.alpha, p.gamma));
        }
    }
    Ok(())
}

fn derive(g: &GroupDescriptor, ev: &Evidence) -> Result<Label, String> {
    replay(g, ev)?;
    let uncertified = matches!(ev.certificate, Certificate::Probing | Certificate::BudgetTrivial { .. } | Certificate::None);
    if uncertified && ev.certified {
        return Err("a probe-based label cannot be certified".into());
    }
    let singles = |ps: &[ProbeRecord]| ps.iter().all(|p| p.result.is_singleton());
    match &ev.certificate {
        Certificate::None => Ok(Label::Unknown),
        Certificate::Probing => Ok(decide_from_probes(&ev.probes, ev.budgets.orbit_budget).0),
        Certificate::FullGroup => {
            if !matches!(g, GroupDescriptor::FullS) {
                return Err("full-group certificate on another descriptor".into());
            }
            for k in 0..=ev.budgets.gamma_max {
                let ok = ev.probes.iter().any(|p| {
                    p.gamma == segment(k) && p.result == ProbeResult::AtLeast(ev.budgets.orbit_budget)
                });
                if !ok {
                    return Err(format!("no saturated orbit recorded for Γ = [0, {k})"));
                }
            }
            Ok(Label::CS)
        }
        Certificate::Trivial => {
            if !matches!(g, GroupDescriptor::TrivialGroup) || !singles(&ev.probes) {
                return Err("trivial certificate not supported by the probes".into());
            }
            Ok(Label::C1)
        }
        Certificate::Stabilizer { partition, profile } => {
            let GroupDescriptor::PartitionStabilizer(a) = g else {
                return Err("stabilizer certificate on another descriptor".into());
            };
            if a.name() != partition || a.profile() != *profile {
                return Err("certificate names a different partition".into());
            }
            let sizes = ev.probes.iter().map(|p| &p.result);
            match *profile {
                Profile::BoundedBy { bound, .. } => {
                    if sizes.clone().any(|r| !matches!(r, ProbeResult::FullOrbit(p) if p.len() <= bound)) {
                        return Err(format!("a probed orbit exceeds the bound {bound}"));
                    }
                }
                Profile::UnboundedFinite => {
                    if sizes.clone().any(|r| matches!(r, ProbeResult::AtLeast(_))) {
                        return Err("a probed orbit is not finite".into());
                    }
                }
                Profile::HasInfiniteBlock { .. } => {
                    if !sizes.clone().any(|r| matches!(r, ProbeResult::AtLeast(_))) {
                        return Err("no probe reaches the infinite block".into());
                    }
                }
            }
            Ok(label_of_profile(*profile))
        }
        Certificate::FiniteGroup { support, .. } => {
            let GroupDescriptor::FiniteSupportGroup { gens, .. } = g else {
                return Err("finite-group certificate on another descriptor".into());
            };
            let mut moved = BTreeSet::new();
            for p in gens {
                moved.extend(p.support().map_err(|e| e.to_string())?);
            }
            if moved.iter().copied().collect::<Vec<_>>() != *support {
                return Err("recorded support differs from the generators".into());
            }
            for &x in support {
                let ok = ev
                    .probes
                    .iter()
                    .any(|p| p.alpha == x && p.gamma == *support && p.result.is_singleton());
                if !ok {
                    return Err(format!("{x} is not shown fixed"));
                }
            }
            Ok(Label::C1)
        }
        Certificate::FnRecorded { metric, .. } => {
            let GroupDescriptor::FnGroup(d) = g else {
                return Err("FN certificate on another descriptor".into());
            };
            if d.name() != *metric {
                return Err("certificate names a different metric".into());
            }
            recorded_fn(metric)
                .map(|(l, _)| l)
                .ok_or_else(|| format!("no recorded class for {metric}"))
        }
        Certificate::FnPartition { partition, inner } => {
            let GroupDescriptor::FnGroup(d) = g else {
                return Err("FN certificate on another descriptor".into());
            };
            let a = GroupDescriptor::partition_of_metric(d).ok_or("metric is not a partition metric")?;
            if a.name() != partition {
                return Err("certificate names a different partition".into());
            }
            derive(&GroupDescriptor::PartitionStabilizer(a), inner)
        }
        Certificate::Inherited { inner, inner_label } => {
            let GroupDescriptor::PointwiseStabilizer { inner: desc, .. } = g else {
                return Err("inherited certificate on a descriptor without Γ".into());
            };
            if !inner.certified {
                return Err("inherited label rests on an uncertified inner label".into());
            }
            let l = derive(desc, inner)?;
            if l != *inner_label {
                return Err("inner evidence gives a different label".into());
            }
            Ok(l)
        }
        Certificate::BudgetTrivial { horizon } => {
            for x in 0..*horizon {
                if !ev.probes.iter().any(|p| p.alpha == x && p.result.is_singleton()) {
                    return Err(format!("{x} is not shown fixed"));
                }
            }
            Ok(Label::C1)
        }
    }
}

//! Four-case detection for generalized metrics from ball sizes.

use serde::Serialize;

use super::{GeneralizedMetric, MetricError};
use crate::perm::Point;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricBudget {
    pub radii: Vec<i64>,
    pub centers: usize,
    pub cap: usize,
}

impl Default for MetricBudget {
    fn default() -> Self {
        MetricBudget {
            radii: vec![1, 2, 4, 8],
            centers: 512,
            cap: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MetricCase {
    /// Some ball is infinite: not uncrowded.
    CaseI,
    /// Balls are finite but their sizes are not bounded by a function of the radius.
    CaseII,
    /// Uniformly uncrowded with infinitely many non-singleton balls.
    CaseIII,
    /// All but finitely many balls of each radius are singletons.
    CaseIV,
    Unknown,
}

/// Ball sizes seen at one radius.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RadiusProbe {
    pub radius: i64,
    pub max_size: usize,
    /// Largest ball over centers in `[0, 1)`, `[1, 2)`, `[2, 4)`, `[4, 8)`, ….
    pub band_max: Vec<usize>,
    pub declared_bound: Option<usize>,
    /// Centers with a ball of more than one point.
    pub nonsingleton_centers: usize,
    /// Such centers in the upper half of the probed range.
    pub nonsingleton_late: usize,
    /// Whether the last three band maxima strictly increase.
    pub growing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricClassification {
    pub metric: String,
    pub case: MetricCase,
    pub budget: MetricBudget,
    pub probes: Vec<RadiusProbe>,
    /// A center and radius whose ball exceeded the cap.
    pub overflow: Option<(Point, i64)>,
    pub note: String,
}

fn band(c: usize) -> usize {
    (usize::BITS - c.leading_zeros()) as usize
}

pub fn classify_metric(d: &GeneralizedMetric, budget: &MetricBudget) -> MetricClassification {
    let mut out = MetricClassification {
        metric: d.name(),
        case: MetricCase::Unknown,
        budget: budget.clone(),
        probes: Vec::new(),
        overflow: None,
        note: String::new(),
    };
    for &r in &budget.radii {
        let rad = Rational::from_integer(r);
        let declared = d.uniform_bound(&rad);
        let mut probe = RadiusProbe {
            radius: r,
            max_size: 0,
            band_max: vec![0; band(budget.centers.saturating_sub(1)) + 1],
            declared_bound: declared,
            nonsingleton_centers: 0,
            nonsingleton_late: 0,
            growing: false,
        };
        for c in 0..budget.centers {
            let size = match d.ball(c, &rad, budget.cap) {
                Ok(b) => b.len(),
                Err(MetricError::NotUncrowded { .. }) => {
                    out.overflow = Some((c, r));
                    out.case = MetricCase::CaseI;
                    out.note = format!("ball around {c} of radius {r} has more than {} points", budget.cap);
                    out.probes.push(probe);
                    return out;
                }
                Err(e) => {
                    out.note = format!("ball around {c} of radius {r} failed: {e}");
                    out.probes.push(probe);
                    return out;
                }
            };
            if declared.is_some_and(|l| size > l) {
                out.note = format!("ball around {c} of radius {r} exceeds the declared bound");
                out.probes.push(probe);
                return out;
            }
            probe.max_size = probe.max_size.max(size);
            let b = band(c);
            probe.band_max[b] = probe.band_max[b].max(size);
            if size > 1 {
                probe.nonsingleton_centers += 1;
                if c >= budget.centers / 2 {
                    probe.nonsingleton_late += 1;
                }
            }
        }
        let m = &probe.band_max;
        probe.growing = m.len() >= 3 && m[m.len() - 3] < m[m.len() - 2] && m[m.len() - 2] < m[m.len() - 1];
        out.probes.push(probe);
    }
    let undeclared = |p: &RadiusProbe| p.declared_bound.is_none();
    if out.probes.iter().any(|p| undeclared(p) && p.growing) {
        out.case = MetricCase::CaseII;
        out.note = "ball sizes keep growing across center bands at a fixed radius".into();
        return out;
    }
    let ambiguous = out.probes.iter().find(|p| {
        let (last, rest) = p.band_max.split_last().unwrap();
        undeclared(p) && *last > rest.iter().copied().max().unwrap_or(0)
    });
    if let Some(p) = ambiguous {
        out.note = format!("ball sizes at radius {} rise in the last band without steady growth", p.radius);
        return out;
    }
    if let Some(p) = out.probes.iter().find(|p| p.nonsingleton_late > 0) {
        out.case = MetricCase::CaseIII;
        out.note = format!(
            "ball sizes bounded{}; {} late centers have non-singleton balls at radius {}",
            if undeclared(p) { " at budget" } else { " by the declared bound" },
            p.nonsingleton_late,
            p.radius
        );
        return out;
    }
    out.case = MetricCase::CaseIV;
    out.note = "no non-singleton ball in the upper half of the probed centers".into();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::metric_from_partition;
    use crate::partitions::Partition;

    fn case(d: &GeneralizedMetric) -> MetricCase {
        classify_metric(d, &MetricBudget::default()).case
    }

    #[test]
    fn worked_examples() {
        assert_eq!(case(&GeneralizedMetric::standard_omega()), MetricCase::CaseIII);
        assert_eq!(case(&GeneralizedMetric::standard_z()), MetricCase::CaseIII);
        assert_eq!(case(&GeneralizedMetric::sqrt()), MetricCase::CaseII);
        assert_eq!(case(&GeneralizedMetric::discrete()), MetricCase::CaseIV);
        let unit = classify_metric(&GeneralizedMetric::unit(), &MetricBudget::default());
        assert_eq!(unit.case, MetricCase::CaseI);
        assert_eq!(unit.overflow, Some((0, 2)));
    }

    #[test]
    fn partition_and_other_metrics() {
        let p = |a: Partition| metric_from_partition(&a).unwrap();
        assert_eq!(case(&p(Partition::pairs())), MetricCase::CaseIII);
        assert_eq!(case(&p(Partition::intervals_growing())), MetricCase::CaseII);
        assert_eq!(case(&p(Partition::singletons())), MetricCase::CaseIV);
        assert_eq!(case(&GeneralizedMetric::ultra_base2()), MetricCase::CaseIII);
        assert_eq!(case(&GeneralizedMetric::cayley_z2()), MetricCase::CaseIII);
        let finitely_many = Partition::explicit("partition:explicit@few", vec![vec![0, 1], vec![5, 9]], None).unwrap();
        assert_eq!(case(&p(finitely_many)), MetricCase::CaseIV);
    }

    #[test]
    fn evidence_lists_budget() {
        let c = classify_metric(&GeneralizedMetric::standard_omega(), &MetricBudget::default());
        assert_eq!(c.probes.len(), 4);
        assert_eq!(c.probes[3].max_size, 15);
        assert_eq!(c.probes[0].band_max.len(), 10);
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json["case"], "CaseIII");
        assert_eq!(json["budget"]["centers"], 512);
    }
}

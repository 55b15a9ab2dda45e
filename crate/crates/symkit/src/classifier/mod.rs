//! Group descriptors, orbit probing, the four-class classifier, and the
//! discreteness and compactness predicates.
//!
//! The four labels follow the least cardinal `λ` such that some finite `Γ`
//! makes every orbit of `G_(Γ)` smaller than `λ`:
//!
//! | label | condition on `G_(Γ)` | `λ` |
//! |-------|----------------------|-----|
//! | `C_S` | an infinite orbit for every finite `Γ` | `ℵ₁` |
//! | `C_P` | some `Γ` with all orbits finite, no common bound | `ℵ₀` |
//! | `C_Q` | some `Γ` with orbit sizes bounded, never trivial | finite, at least 3 |
//! | `C_1` | some `Γ` with `G_(Γ) = {1}` | 2 |
//!
//! Γ is searched over initial segments `{0, …, k-1}` only. Enlarging `Γ`
//! shrinks `G_(Γ)` and its orbits, and every finite set lies in an initial
//! segment, so all four conditions are decided by initial segments.

mod classify;
mod descriptor;
mod predicates;

pub use classify::{check_evidence, classify_group, decide_from_probes, orbit, Certificate, Evidence, OrbitReport, ProbeRecord, ProbeResult};
pub use descriptor::{oracle_by_name, FnOracle, GroupDescriptor};
pub use predicates::{compactness_criterion, discreteness, CompactnessReport, DiscretenessReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trees::TreeError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifierError {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "C_1")]
    C1,
    #[serde(rename = "C_Q")]
    CQ,
    #[serde(rename = "C_P")]
    CP,
    #[serde(rename = "C_S")]
    CS,
    Unknown,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::C1 => "C_1",
            Label::CQ => "C_Q",
            Label::CP => "C_P",
            Label::CS => "C_S",
            Label::Unknown => "Unknown",
        }
    }

    /// Position in the chain `C_1 ≺ C_Q ≺ C_P ≺ C_S`.
    pub fn rank(self) -> Option<u8> {
        match self {
            Label::C1 => Some(0),
            Label::CQ => Some(1),
            Label::CP => Some(2),
            Label::CS => Some(3),
            Label::Unknown => None,
        }
    }

    /// Strict precedence in the chain; `None` when either label is unknown.
    pub fn precedes(self, other: Label) -> Option<bool> {
        Some(self.rank()? < other.rank()?)
    }

    pub fn lambda_case(self) -> LambdaCase {
        match self {
            Label::CS => LambdaCase::Aleph1,
            Label::CP => LambdaCase::Aleph0,
            Label::CQ => LambdaCase::FiniteAtLeast3,
            Label::C1 => LambdaCase::Two,
            Label::Unknown => LambdaCase::Undetermined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaCase {
    #[serde(rename = "aleph1")]
    Aleph1,
    #[serde(rename = "aleph0")]
    Aleph0,
    #[serde(rename = "finite>=3")]
    FiniteAtLeast3,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "undetermined")]
    Undetermined,
}

/// Search budgets: initial segments up to `gamma_max` points, `samples`
/// probed points per `Γ`, and at most `orbit_budget` listed orbit points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassBudget {
    pub gamma_max: usize,
    pub samples: usize,
    pub orbit_budget: usize,
}

impl Default for ClassBudget {
    fn default() -> Self {
        ClassBudget {
            gamma_max: 16,
            samples: 64,
            orbit_budget: 4096,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassLabel {
    pub label: Label,
    pub lambda_case: LambdaCase,
    pub evidence: Evidence,
}

impl ClassLabel {
    /// The JSON evidence record.
    pub fn to_json(&self) -> serde_json::Value {
        let e = &self.evidence;
        serde_json::json!({
            "label": self.label,
            "lambda_case": self.lambda_case,
            "descriptor": e.descriptor,
            "gamma": e.gamma,
            "probes": e.probes,
            "budgets": e.budgets,
            "certified": e.certified,
            "qualification": e.qualification,
            "certificate": e.certificate,
            "metric_case": e.metric_case,
            "note": e.note,
        })
    }
}

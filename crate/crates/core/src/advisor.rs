//! Rule-based paradigm recommendation from graph metrics and a query mix.
//!
//! Rules are evaluated in order and the first match decides the top
//! paradigm:
//!
//! | rule | condition | first |
//! |------|-----------|-------|
//! | R1 | dominant tier is 3 or 4 | graph |
//! | R2 | SR above `sr_graph_min` or CD above `cd_graph_min` | graph |
//! | R3 | SR and CD inside the balanced band, dominant tier 2 | multi-model |
//! | R4 | dominant tier 1, CD below `cd_sparse_max` | document |
//! | R5 | otherwise | multi-model |

use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{round2, MetricsReport};
use crate::workload::Paradigm;

#[derive(Debug, Error, PartialEq)]
pub enum AdvisorError {
    #[error("tier weights must be four comma-separated numbers, got {0:?}")]
    Parse(String),
    #[error("tier weight {0} is negative or not finite")]
    BadWeight(f64),
    #[error("tier weights sum to {0}, expected 1")]
    Sum(f64),
    #[error("{path}: {message}")]
    Rules { path: String, message: String },
}

const SUM_TOLERANCE: f64 = 1e-6;

/// Expected share of each query tier in the workload.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct WorkloadProfile {
    weights: [f64; 4],
}

impl WorkloadProfile {
    pub fn new(weights: [f64; 4]) -> Result<Self, AdvisorError> {
        if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(AdvisorError::BadWeight(w));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(AdvisorError::Sum(sum));
        }
        Ok(WorkloadProfile { weights })
    }

    /// All weight on one tier (1-based).
    pub fn single(tier: u8) -> Self {
        assert!((1..=4).contains(&tier), "tier {tier} out of range");
        let mut weights = [0.0; 4];
        weights[tier as usize - 1] = 1.0;
        WorkloadProfile { weights }
    }

    pub fn weights(&self) -> [f64; 4] {
        self.weights
    }

    /// Tier with the largest weight; ties go to the higher tier.
    pub fn dominant_tier(&self) -> u8 {
        let mut best = 0;
        for i in 1..4 {
            if self.weights[i] >= self.weights[best] {
                best = i;
            }
        }
        best as u8 + 1
    }
}

impl TryFrom<[f64; 4]> for WorkloadProfile {
    type Error = AdvisorError;

    fn try_from(w: [f64; 4]) -> Result<Self, Self::Error> {
        WorkloadProfile::new(w)
    }
}

impl From<WorkloadProfile> for [f64; 4] {
    fn from(p: WorkloadProfile) -> Self {
        p.weights
    }
}

impl std::str::FromStr for WorkloadProfile {
    type Err = AdvisorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| AdvisorError::Parse(s.to_owned()))?;
        let weights: [f64; 4] = parts.try_into().map_err(|_| AdvisorError::Parse(s.to_owned()))?;
        WorkloadProfile::new(weights)
    }
}

/// Thresholds for the rule set. Loadable from a JSON rules file; missing
/// fields keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Rules {
    pub sr_graph_min: f64,
    pub cd_graph_min: f64,
    pub sr_balanced: [f64; 2],
    pub cd_balanced: [f64; 2],
    pub cd_sparse_max: f64,
}

impl Default for Rules {
    fn default() -> Self {
        Rules {
            sr_graph_min: 8.0,
            cd_graph_min: 0.8,
            sr_balanced: [5.0, 10.0],
            cd_balanced: [0.6, 0.85],
            cd_sparse_max: 0.8,
        }
    }
}

impl Rules {
    pub fn load(path: &Path) -> Result<Self, AdvisorError> {
        let err = |message: String| AdvisorError::Rules {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| err(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiredRule {
    pub rule: RuleId,
    pub favors: Paradigm,
    pub condition: String,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub ranking: Vec<Paradigm>,
    /// Rule that put `ranking[0]` first.
    pub decided_by: RuleId,
    /// Every rule whose condition holds, in evaluation order.
    pub fired: Vec<FiredRule>,
    pub profile: WorkloadProfile,
    pub dominant_tier: u8,
    pub metrics: MetricsReport,
    pub rules: Rules,
}

impl Recommendation {
    pub fn first(&self) -> Paradigm {
        self.ranking[0]
    }
}

fn rationale(rule: RuleId) -> &'static str {
    match rule {
        RuleId::R1 => {
            "Multi-join and neighbourhood queries are dominated by adjacency lookups; \
             index-free adjacency keeps their cost proportional to the edges touched."
        }
        RuleId::R2 => {
            "High schema heterogeneity or dense linkage makes joins the common case, \
             which favours native edge storage regardless of the query mix."
        }
        RuleId::R3 => {
            "A moderately rich, moderately connected graph queried mostly through \
             single-hop joins benefits from indexed edge collections next to documents."
        }
        RuleId::R4 => {
            "Attribute filters over sparsely linked data are served by field indexes \
             on a single collection without touching relationships."
        }
        RuleId::R5 => {
            "No rule singled out a specialist, so the paradigm that handles both \
             attribute lookups and traversals acceptably goes first."
        }
    }
}

fn ranking_for(first: Paradigm) -> Vec<Paradigm> {
    use Paradigm::*;
    match first {
        Graph => vec![Graph, MultiModel, Document],
        Document => vec![Document, MultiModel, Graph],
        _ => vec![MultiModel, Graph, Document],
    }
}

fn in_band(x: f64, band: [f64; 2]) -> bool {
    band[0] <= x && x <= band[1]
}

pub fn advise(metrics: &MetricsReport, profile: &WorkloadProfile) -> Recommendation {
    advise_with(metrics, profile, &Rules::default())
}

pub fn advise_with(metrics: &MetricsReport, profile: &WorkloadProfile, rules: &Rules) -> Recommendation {
    let tier = profile.dominant_tier();
    let sr = metrics.semantic_richness;
    let cd = metrics.connectivity_density;
    let checks = [
        (RuleId::R1, Paradigm::Graph, tier >= 3, format!("dominant tier {tier} is 3 or 4")),
        (
            RuleId::R2,
            Paradigm::Graph,
            sr > rules.sr_graph_min || cd > rules.cd_graph_min,
            format!("SR {sr:.2} > {} or CD {cd:.2} > {}", rules.sr_graph_min, rules.cd_graph_min),
        ),
        (
            RuleId::R3,
            Paradigm::MultiModel,
            in_band(sr, rules.sr_balanced) && in_band(cd, rules.cd_balanced) && tier == 2,
            format!(
                "SR {sr:.2} in [{}, {}], CD {cd:.2} in [{}, {}], dominant tier 2",
                rules.sr_balanced[0], rules.sr_balanced[1], rules.cd_balanced[0], rules.cd_balanced[1]
            ),
        ),
        (
            RuleId::R4,
            Paradigm::Document,
            tier == 1 && cd < rules.cd_sparse_max,
            format!("dominant tier 1 and CD {cd:.2} < {}", rules.cd_sparse_max),
        ),
        (RuleId::R5, Paradigm::MultiModel, true, "no earlier rule matched".to_owned()),
    ];
    let fired: Vec<FiredRule> = checks
        .into_iter()
        .filter(|c| c.2)
        .map(|(rule, favors, _, condition)| FiredRule {
            rule,
            favors,
            condition,
            rationale: rationale(rule).to_owned(),
        })
        .collect();
    let decisive = &fired[0];
    Recommendation {
        ranking: ranking_for(decisive.favors),
        decided_by: decisive.rule,
        fired,
        profile: *profile,
        dominant_tier: tier,
        metrics: metrics.clone(),
        rules: rules.clone(),
    }
}

pub fn explain(rec: &Recommendation) -> String {
    let m = &rec.metrics;
    let w = rec.profile.weights();
    let mut out = String::new();
    let _ = writeln!(out, "Inputs");
    let _ = writeln!(out, "  S   = {} ({} nodes, {} edges)", m.scale, m.node_count, m.edge_count);
    let _ = writeln!(out, "  CD  = {:.2}", round2(m.connectivity_density));
    let _ = writeln!(out, "  SR  = {:.2}", round2(m.semantic_richness));
    let _ = writeln!(
        out,
        "  tier weights = {}, {}, {}, {} (dominant tier {})",
        w[0], w[1], w[2], w[3], rec.dominant_tier
    );
    let _ = writeln!(out, "Ranking");
    for (i, p) in rec.ranking.iter().enumerate() {
        let _ = writeln!(out, "  {}. {p}", i + 1);
    }
    let _ = writeln!(out, "Rules");
    for f in &rec.fired {
        let mark = if f.rule == rec.decided_by { "decisive" } else { "also holds" };
        let _ = writeln!(out, "  {} ({mark}, favors {}): {}", f.rule, f.favors, f.condition);
        let _ = writeln!(out, "    {}", f.rationale);
    }
    if rec.decided_by == RuleId::R5 {
        let _ = writeln!(out, "Fallback rule R5 decided the ranking.");
    }
    out
}

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::care::{CareLabel, PostLabels};
use crate::corpus::{AnnotationRecord, Choice};

/// Rater-count condition for an affect to enter the human consensus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "raters", rename_all = "snake_case")]
pub enum Threshold {
    Ge(usize),
    Eq(usize),
}

impl Threshold {
    /// The three rows of the agreement table.
    pub const STANDARD: [Threshold; 3] = [Threshold::Ge(1), Threshold::Ge(2), Threshold::Eq(3)];

    pub fn admits(self, raters: usize) -> bool {
        match self {
            Threshold::Ge(k) => raters >= k,
            Threshold::Eq(k) => raters == k,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Ge(k) => write!(f, ">={k}"),
            Threshold::Eq(k) => write!(f, "={k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub threshold: Threshold,
    pub n_posts: usize,
    /// Percent of posts whose consensus shares at least one CARE label.
    pub any: f64,
    /// Percent of posts whose consensus contains every CARE label.
    pub all: f64,
    /// Percent of posts whose consensus holds a label CARE did not propose.
    pub other: f64,
}

fn percent(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 * 100.0 / d as f64
    }
}

/// Compares human consensus with CARE labels on posts that have both. Both
/// sides live in CARE label space, so the two angered affects are merged.
/// The `other` option is not a taxonomy label and is ignored.
pub fn care_agreement(
    annotations: &[AnnotationRecord],
    care: &PostLabels,
    thresholds: &[Threshold],
) -> Vec<AgreementRow> {
    let mut votes: BTreeMap<&str, BTreeMap<CareLabel, BTreeSet<&str>>> = BTreeMap::new();
    for a in annotations {
        let post = votes.entry(a.post_id.as_str()).or_default();
        for c in &a.selected {
            if let Choice::Affect(affect) = c {
                post.entry(CareLabel::from_affect(*affect)).or_default().insert(a.rater_id.as_str());
            }
        }
    }
    let mut annotated: BTreeSet<&str> = annotations.iter().map(|a| a.post_id.as_str()).collect();
    annotated.retain(|p| care.get(*p).is_some_and(|l| !l.is_empty()));
    thresholds
        .iter()
        .map(|&threshold| {
            let (mut any, mut all, mut other) = (0, 0, 0);
            for post in &annotated {
                let labels = &care[*post];
                let consensus: BTreeSet<CareLabel> = votes
                    .get(post)
                    .map(|v| v.iter().filter(|(_, r)| threshold.admits(r.len())).map(|(l, _)| *l).collect())
                    .unwrap_or_default();
                any += usize::from(!consensus.is_disjoint(labels));
                all += usize::from(labels.is_subset(&consensus));
                other += usize::from(!consensus.is_subset(labels));
            }
            let n = annotated.len();
            AgreementRow { threshold, n_posts: n, any: percent(any, n), all: percent(all, n), other: percent(other, n) }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceStats {
    pub choice: Choice,
    /// Posts where at least one rater chose it.
    pub count_1x: usize,
    /// Posts where at least three raters chose it.
    pub count_3x: usize,
    /// Mean and population deviation of the number of raters choosing it,
    /// over the `count_1x` posts.
    pub support_mean: f64,
    pub support_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationStats {
    pub n_records: usize,
    pub n_posts: usize,
    pub n_raters: usize,
    pub mean_selections: f64,
    pub per_choice: Vec<ChoiceStats>,
}

pub fn annotation_stats(annotations: &[AnnotationRecord]) -> Result<AnnotationStats, AnalysisError> {
    if annotations.is_empty() {
        return Err(AnalysisError::NoAnnotations);
    }
    let mut votes: BTreeMap<&str, BTreeMap<Choice, usize>> = BTreeMap::new();
    for a in annotations {
        let post = votes.entry(a.post_id.as_str()).or_default();
        for &c in &a.selected {
            *post.entry(c).or_default() += 1;
        }
    }
    let per_choice = Choice::all()
        .into_iter()
        .map(|choice| {
            let support: Vec<f64> = votes.values().filter_map(|v| v.get(&choice)).map(|&n| n as f64).collect();
            let n = support.len();
            let mean = if n == 0 { 0.0 } else { support.iter().sum::<f64>() / n as f64 };
            let var = if n == 0 { 0.0 } else { support.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64 };
            ChoiceStats {
                choice,
                count_1x: n,
                count_3x: support.iter().filter(|&&s| s >= 3.0).count(),
                support_mean: mean,
                support_std: var.sqrt(),
            }
        })
        .collect();
    let selections: usize = annotations.iter().map(|a| a.selected.len()).sum();
    Ok(AnnotationStats {
        n_records: annotations.len(),
        n_posts: votes.len(),
        n_raters: annotations.iter().map(|a| a.rater_id.as_str()).collect::<BTreeSet<_>>().len(),
        mean_selections: selections as f64 / annotations.len() as f64,
        per_choice,
    })
}

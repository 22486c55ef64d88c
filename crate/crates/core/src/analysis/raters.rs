use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{pearson, AnalysisError};
use crate::corpus::{AnnotationRecord, Choice};

/// Per post, each rater's judgement vector over the taxonomy options.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RaterMatrix {
    pub options: Vec<String>,
    pub posts: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
}

impl RaterMatrix {
    /// Binary selected/not vectors over the 16 affects and `other`.
    pub fn from_annotations(annotations: &[AnnotationRecord]) -> Self {
        let options = Choice::all();
        let mut m = RaterMatrix { options: options.iter().map(|c| c.to_string()).collect(), posts: BTreeMap::new() };
        for a in annotations {
            let row = options.iter().map(|c| f64::from(a.selected.contains(c))).collect();
            m.posts.entry(a.post_id.clone()).or_default().insert(a.rater_id.clone(), row);
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterraterReport {
    /// Mean over raters with a defined correlation.
    pub mean: f64,
    pub per_rater: BTreeMap<String, Option<f64>>,
    /// Raters left out because their correlation is undefined.
    pub excluded: usize,
}

/// For each rater, Pearson r between their judgements and the mean of the
/// other raters on the same (post, option) items, averaged over raters.
/// Items on posts the rater judged alone are skipped.
pub fn interrater_correlation(matrix: &RaterMatrix) -> Result<InterraterReport, AnalysisError> {
    let mut items: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for raters in matrix.posts.values() {
        for (rater, own) in raters {
            let entry = items.entry(rater.as_str()).or_default();
            if raters.len() < 2 {
                continue;
            }
            for (k, &v) in own.iter().enumerate() {
                let others: f64 = raters.iter().filter(|(r, _)| *r != rater).map(|(_, j)| j[k]).sum();
                entry.0.push(v);
                entry.1.push(others / (raters.len() - 1) as f64);
            }
        }
    }
    let per_rater: BTreeMap<String, Option<f64>> =
        items.iter().map(|(r, (own, rest))| (r.to_string(), pearson(own, rest))).collect();
    let defined: Vec<f64> = per_rater.values().flatten().copied().collect();
    if defined.is_empty() {
        return Err(AnalysisError::AllRatersUndefined(per_rater.len()));
    }
    Ok(InterraterReport {
        mean: defined.iter().sum::<f64>() / defined.len() as f64,
        excluded: per_rater.len() - defined.len(),
        per_rater,
    })
}

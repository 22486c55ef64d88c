//! Training-set construction: engagement labels from a trailing window,
//! personalized affect labels (likers of a labeled post inherit its
//! non-negative affects), balanced per-class sampling and 80/10/10 splits.

mod assemble;
mod classes;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assemble::{assemble, Split, SplitDataset};
pub use classes::{ClassSet, PredictionClass};

use crate::care::{CareLabel, PostLabels};
use crate::corpus::{Affect, AnnotationRecord, Choice, Corpus, EventKind};
use crate::io::{parse_jsonl, to_jsonl, write_atomic};

pub const DAY: i64 = 86_400;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("class `{0}` has no positive rows")]
    InsufficientPositives(String),
    #[error("class `{0}` has no negative rows")]
    InsufficientNegatives(String),
    #[error("per_class_n must be even and positive, got {0}")]
    OddPerClassN(usize),
    #[error("as_of {as_of} precedes the earliest corpus timestamp {min}")]
    AsOfTooEarly { as_of: i64, min: i64 },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Where a row's labels came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Engagement,
    Care,
    Human,
}

/// One training row: a (post, user) pair with one bit per prediction class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub post_id: String,
    pub user_id: String,
    pub labels: Vec<bool>,
    pub sources: BTreeSet<Source>,
}

impl LabeledExample {
    pub fn mask(&self) -> String {
        self.labels.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Positive engagement rows: bit `k` is set on `(p, u)` iff `u` performed
/// kind `k` on `p` within `(as_of - window_days, as_of]`. Kinds outside
/// `classes` are ignored. Rows are ordered by post then user.
pub fn engagement_labels(corpus: &Corpus, classes: &ClassSet, as_of: i64, window_days: i64) -> Vec<LabeledExample> {
    let start = as_of - window_days * DAY;
    let mut rows: BTreeMap<(usize, &str), Vec<bool>> = BTreeMap::new();
    for (p, _) in corpus.posts().iter().enumerate() {
        for e in corpus.events_of(p) {
            if e.at <= start || e.at > as_of {
                continue;
            }
            let Some(k) = classes.index_of(PredictionClass::Engagement(e.kind)) else { continue };
            rows.entry((p, e.user_id.as_str())).or_insert_with(|| vec![false; classes.len()])[k] = true;
        }
    }
    rows.into_iter()
        .map(|((p, u), labels)| LabeledExample {
            post_id: corpus.posts()[p].id.clone(),
            user_id: u.to_string(),
            labels,
            sources: [Source::Engagement].into(),
        })
        .collect()
}

/// Post-level affects selected by at least `k` raters. `other` is dropped.
pub fn consensus(annotations: &[AnnotationRecord], k: usize) -> BTreeMap<String, BTreeSet<Affect>> {
    let mut votes: BTreeMap<&str, BTreeMap<Affect, usize>> = BTreeMap::new();
    for a in annotations {
        let post = votes.entry(a.post_id.as_str()).or_default();
        for choice in &a.selected {
            if let Choice::Affect(affect) = choice {
                *post.entry(*affect).or_default() += 1;
            }
        }
    }
    votes
        .into_iter()
        .filter_map(|(post, counts)| {
            let set: BTreeSet<Affect> = counts.into_iter().filter(|&(_, n)| n >= k.max(1)).map(|(a, _)| a).collect();
            (!set.is_empty()).then(|| (post.to_string(), set))
        })
        .collect()
}

/// CARE labels as taxonomy affects. The unsplit angered label has no
/// trainable counterpart and is dropped.
pub fn care_affects(labels: &PostLabels) -> BTreeMap<String, BTreeSet<Affect>> {
    labels
        .iter()
        .filter_map(|(post, ls)| {
            let set: BTreeSet<Affect> = ls.iter().filter_map(|l| CareLabel::affect(*l)).collect();
            (!set.is_empty()).then(|| (post.clone(), set))
        })
        .collect()
}

/// One row per (post, liker) for every labeled post, with a bit set for
/// each of the post's affects that is a prediction class. Negative affects
/// never personalize.
pub fn personalize(
    affect_labels: &BTreeMap<String, BTreeSet<Affect>>,
    corpus: &Corpus,
    classes: &ClassSet,
    source: Source,
) -> Vec<LabeledExample> {
    let mut rows = Vec::new();
    for (post_id, affects) in affect_labels {
        let bits: Vec<usize> = affects
            .iter()
            .filter(|a| !a.is_negative())
            .filter_map(|&a| classes.index_of(PredictionClass::Affect(a)))
            .collect();
        let Some(p) = corpus.post_position(post_id) else { continue };
        if bits.is_empty() {
            continue;
        }
        for user in corpus.likers_of(p) {
            let mut labels = vec![false; classes.len()];
            for &k in &bits {
                labels[k] = true;
            }
            rows.push(LabeledExample {
                post_id: post_id.clone(),
                user_id: user.to_string(),
                labels,
                sources: [source].into(),
            });
        }
    }
    rows
}

/// Collapses rows sharing a (post, user) pair: labels are OR-ed and sources
/// unioned. Output is ordered by (post, user).
pub fn merge_rows(rows: impl IntoIterator<Item = LabeledExample>) -> Vec<LabeledExample> {
    let mut merged: BTreeMap<(String, String), LabeledExample> = BTreeMap::new();
    for row in rows {
        match merged.entry((row.post_id.clone(), row.user_id.clone())) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(row);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let existing = o.get_mut();
                for (a, b) in existing.labels.iter_mut().zip(&row.labels) {
                    *a |= *b;
                }
                existing.sources.extend(row.sources);
            }
        }
    }
    merged.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub window_days: i64,
    /// Defaults to the corpus's latest timestamp.
    pub as_of: Option<i64>,
    pub consensus_k: usize,
    pub per_class_n: usize,
    pub include_snooze: bool,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { window_days: 90, as_of: None, consensus_k: 3, per_class_n: 2000, include_snooze: false, seed: 0 }
    }
}

/// Engagement, CARE and human rows merged, then balanced and split.
pub fn build_dataset(
    corpus: &Corpus,
    care_labels: Option<&PostLabels>,
    config: &DatasetConfig,
) -> Result<SplitDataset, DatasetError> {
    let rows = labeled_rows(corpus, care_labels, config)?;
    assemble(&rows, &ClassSet::new(config.include_snooze), config.per_class_n, config.seed)
}

/// The merged row pool that [`build_dataset`] samples from.
pub fn labeled_rows(
    corpus: &Corpus,
    care_labels: Option<&PostLabels>,
    config: &DatasetConfig,
) -> Result<Vec<LabeledExample>, DatasetError> {
    let classes = ClassSet::new(config.include_snooze);
    let min = corpus.min_timestamp().unwrap_or(0);
    let as_of = config.as_of.or(corpus.max_timestamp()).unwrap_or(0);
    if as_of < min {
        return Err(DatasetError::AsOfTooEarly { as_of, min });
    }
    let mut rows = engagement_labels(corpus, &classes, as_of, config.window_days);
    if let Some(care) = care_labels {
        rows.extend(personalize(&care_affects(care), corpus, &classes, Source::Care));
    }
    rows.extend(personalize(&consensus(corpus.annotations(), config.consensus_k), corpus, &classes, Source::Human));
    Ok(merge_rows(rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RowRecord {
    post_id: String,
    user_id: String,
    mask: String,
    sources: Vec<Source>,
    split: Split,
}

/// Writes `classes.json`, `dataset.jsonl` and `summary.csv` into `dir`.
pub fn write_dataset(data: &SplitDataset, dir: &Path) -> Result<(), DatasetError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| DatasetError::Io { path, source }
    };
    let classes: Vec<String> = data.classes.iter().map(|c| c.to_string()).collect();
    let path = dir.join("classes.json");
    let mut json = serde_json::to_vec_pretty(&classes).expect("strings serialize");
    json.push(b'\n');
    write_atomic(&path, &json).map_err(io_err(&path))?;

    let records: Vec<RowRecord> = data
        .iter_splits()
        .flat_map(|(split, rows)| {
            rows.iter().map(move |r| RowRecord {
                post_id: r.post_id.clone(),
                user_id: r.user_id.clone(),
                mask: r.mask(),
                sources: r.sources.iter().copied().collect(),
                split,
            })
        })
        .collect();
    let path = dir.join("dataset.jsonl");
    write_atomic(&path, &to_jsonl(&records)).map_err(io_err(&path))?;
    let path = dir.join("summary.csv");
    write_atomic(&path, data.summary_csv().as_bytes()).map_err(io_err(&path))?;
    Ok(())
}

/// Reads a directory written by [`write_dataset`]. Warnings are not stored
/// and come back empty; the seed is not stored either and reads as 0.
pub fn load_dataset(dir: &Path) -> Result<SplitDataset, DatasetError> {
    let read = |name: &str| {
        let path = dir.join(name);
        std::fs::read_to_string(&path).map_err(|source| DatasetError::Io { path: path.display().to_string(), source })
    };
    let fmt =
        |name: &str, message: String| DatasetError::Format { path: dir.join(name).display().to_string(), message };
    let names: Vec<String> =
        serde_json::from_str(&read("classes.json")?).map_err(|e| fmt("classes.json", e.to_string()))?;
    let classes = ClassSet::from_names(&names).map_err(|e| fmt("classes.json", e.to_string()))?;
    let records: Vec<RowRecord> = parse_jsonl(&read("dataset.jsonl")?)
        .map_err(|e| fmt("dataset.jsonl", format!("line {}: {}", e.line, e.message)))?;
    let mut data = SplitDataset::empty(classes);
    for (i, r) in records.into_iter().enumerate() {
        if r.mask.len() != data.classes.len() || !r.mask.chars().all(|c| c == '0' || c == '1') {
            return Err(fmt("dataset.jsonl", format!("line {}: mask must be {} bits", i + 1, data.classes.len())));
        }
        let row = LabeledExample {
            post_id: r.post_id,
            user_id: r.user_id,
            labels: r.mask.chars().map(|c| c == '1').collect(),
            sources: r.sources.into_iter().collect(),
        };
        data.split_mut(r.split).push(row);
    }
    Ok(data)
}

/// True when every positive engagement bit of `row` is witnessed by an
/// event of that kind inside the window.
pub fn engagement_witnessed(
    corpus: &Corpus,
    classes: &ClassSet,
    row: &LabeledExample,
    as_of: i64,
    window_days: i64,
) -> bool {
    let start = as_of - window_days * DAY;
    let Some(p) = corpus.post_position(&row.post_id) else { return false };
    classes.iter().enumerate().all(|(k, class)| match class {
        PredictionClass::Engagement(kind) if row.labels[k] && row.sources.contains(&Source::Engagement) => {
            corpus.events_of(p).any(|e| e.user_id == row.user_id && e.kind == kind && e.at > start && e.at <= as_of)
        }
        _ => true,
    })
}

/// Engagement kinds the default class set leaves out.
pub fn excluded_kinds(classes: &ClassSet) -> Vec<EventKind> {
    EventKind::ALL.into_iter().filter(|k| classes.index_of(PredictionClass::Engagement(*k)).is_none()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EngagementEvent, Post, User};

    fn user(id: &str) -> User {
        User { id: id.into(), bio_text: String::new(), interests: vec![], network_stats: vec![] }
    }

    fn post(id: &str) -> Post {
        Post {
            id: id.into(),
            title: String::new(),
            body: String::new(),
            ocr_text: None,
            author_id: "u0".into(),
            created_at: 0,
            violating: false,
            dense_features: vec![],
            feeling: None,
        }
    }

    fn event(p: &str, u: &str, kind: EventKind, at: i64) -> EngagementEvent {
        EngagementEvent { post_id: p.into(), user_id: u.into(), kind, at }
    }

    fn corpus(events: Vec<EngagementEvent>) -> Corpus {
        Corpus::new(
            vec![post("p1"), post("p2")],
            vec![user("u0"), user("u1"), user("u2"), user("u3")],
            vec![],
            events,
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn window_membership() {
        let as_of = 200 * DAY;
        let c = corpus(vec![
            event("p1", "u1", EventKind::Haha, as_of - DAY),
            event("p1", "u2", EventKind::Like, as_of - 91 * DAY),
            event("p2", "u2", EventKind::Like, as_of - 90 * DAY),
            event("p2", "u3", EventKind::Snooze, as_of - DAY),
        ]);
        let classes = ClassSet::default();
        let rows = engagement_labels(&c, &classes, as_of, 90);
        assert_eq!(rows.len(), 1, "boundary day and snooze excluded: {rows:?}");
        assert_eq!(rows[0].user_id, "u1");
        let haha = classes.index_of(PredictionClass::Engagement(EventKind::Haha)).unwrap();
        assert!(rows[0].labels[haha]);
        assert_eq!(rows[0].labels.iter().filter(|b| **b).count(), 1);
    }

    #[test]
    fn personalize_positive_and_negative() {
        let c = corpus(vec![
            event("p1", "u1", EventKind::Like, 10),
            event("p1", "u2", EventKind::Love, 10),
            event("p1", "u3", EventKind::Haha, 10),
        ]);
        let classes = ClassSet::default();
        let labels = BTreeMap::from([("p1".to_string(), BTreeSet::from([Affect::Inspired]))]);
        let rows = personalize(&labels, &c, &classes, Source::Human);
        let users: Vec<&str> = rows.iter().map(|r| r.user_id.as_str()).collect();
        assert_eq!(users, vec!["u1", "u2"]);
        let k = classes.index_of(PredictionClass::Affect(Affect::Inspired)).unwrap();
        assert!(rows.iter().all(|r| r.labels[k]));

        let sad = BTreeMap::from([("p1".to_string(), BTreeSet::from([Affect::Saddened]))]);
        assert!(personalize(&sad, &c, &classes, Source::Human).is_empty());
        let unliked = BTreeMap::from([("p2".to_string(), BTreeSet::from([Affect::Inspired]))]);
        assert!(personalize(&unliked, &c, &classes, Source::Human).is_empty());
    }

    fn ann(post: &str, rater: &str, sel: &[Choice]) -> AnnotationRecord {
        AnnotationRecord { post_id: post.into(), rater_id: rater.into(), selected: sel.iter().copied().collect() }
    }

    #[test]
    fn consensus_thresholds() {
        let inf = Choice::Affect(Affect::Informed);
        let tou = Choice::Affect(Affect::Touched);
        let anns = vec![
            ann("p", "r1", &[inf]),
            ann("p", "r2", &[inf, tou]),
            ann("p", "r3", &[inf]),
            ann("p", "r4", &[Choice::Other]),
            ann("p", "r5", &[Choice::Other]),
        ];
        assert_eq!(consensus(&anns, 3)["p"], BTreeSet::from([Affect::Informed]));
        assert_eq!(consensus(&anns, 1)["p"], BTreeSet::from([Affect::Informed, Affect::Touched]));
        assert!(consensus(&anns, 6).is_empty());
    }

    #[test]
    fn merge_ors_labels_and_unions_sources() {
        let a = LabeledExample {
            post_id: "p".into(),
            user_id: "u".into(),
            labels: vec![true, false],
            sources: [Source::Engagement].into(),
        };
        let b = LabeledExample {
            post_id: "p".into(),
            user_id: "u".into(),
            labels: vec![false, true],
            sources: [Source::Care].into(),
        };
        let m = merge_rows([a, b]);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].labels, vec![true, true]);
        assert_eq!(m[0].sources, [Source::Engagement, Source::Care].into());
    }

    #[test]
    fn angered_care_label_is_not_trainable() {
        let labels = PostLabels::from([("p".to_string(), BTreeSet::from([CareLabel::Angered]))]);
        assert!(care_affects(&labels).is_empty());
    }
}

use std::collections::{BTreeMap, BTreeSet};

use super::AnalysisError;
use crate::corpus::{Affect, AnnotationRecord, Choice, Corpus, EventKind};

/// Pearson r; `None` when fewer than two points or either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Per-post values for a set of named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabelTable {
    pub columns: Vec<String>,
    pub rows: BTreeMap<String, Vec<f64>>,
}

impl LabelTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: BTreeMap::new() }
    }

    pub fn insert(&mut self, post: impl Into<String>, values: Vec<f64>) -> Result<(), AnalysisError> {
        let post = post.into();
        if values.len() != self.columns.len() {
            return Err(AnalysisError::RowWidth { post, got: values.len(), expected: self.columns.len() });
        }
        self.rows.insert(post, values);
        Ok(())
    }
}

/// Row labels × column labels; `None` marks an undefined cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    /// Posts both tables have in common.
    pub n_posts: usize,
}

impl CorrelationMatrix {
    pub fn get(&self, row: &str, column: &str) -> Option<f64> {
        let i = self.rows.iter().position(|r| r == row)?;
        let j = self.columns.iter().position(|c| c == column)?;
        self.values[i][j]
    }

    /// CSV with a header row; undefined cells are empty fields.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("label").chain(self.columns.iter().map(String::as_str)).collect();
        w.write_record(&header).expect("in-memory write");
        for (name, row) in self.rows.iter().zip(&self.values) {
            let cells =
                std::iter::once(name.clone()).chain(row.iter().map(|v| v.map_or(String::new(), |r| r.to_string())));
            w.write_record(cells).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }
}

/// Pearson r for every (column of `a`, column of `b`) pair over the posts
/// present in both tables.
pub fn pearson_matrix(a: &LabelTable, b: &LabelTable) -> Result<CorrelationMatrix, AnalysisError> {
    let shared: Vec<(&Vec<f64>, &Vec<f64>)> =
        a.rows.iter().filter_map(|(post, ra)| b.rows.get(post).map(|rb| (ra, rb))).collect();
    if shared.is_empty() {
        return Err(AnalysisError::NoOverlap);
    }
    let column = |rows: &[&Vec<f64>], j: usize| -> Vec<f64> { rows.iter().map(|r| r[j]).collect() };
    let (ra, rb): (Vec<&Vec<f64>>, Vec<&Vec<f64>>) = shared.into_iter().unzip();
    let cols_b: Vec<Vec<f64>> = (0..b.columns.len()).map(|j| column(&rb, j)).collect();
    let values = (0..a.columns.len())
        .map(|i| {
            let x = column(&ra, i);
            cols_b.iter().map(|y| pearson(&x, y)).collect()
        })
        .collect();
    Ok(CorrelationMatrix { rows: a.columns.clone(), columns: b.columns.clone(), values, n_posts: ra.len() })
}

fn votes(annotations: &[AnnotationRecord]) -> BTreeMap<&str, BTreeMap<Choice, usize>> {
    let mut out: BTreeMap<&str, BTreeMap<Choice, usize>> = BTreeMap::new();
    for a in annotations {
        let post = out.entry(a.post_id.as_str()).or_default();
        for &c in &a.selected {
            *post.entry(c).or_default() += 1;
        }
    }
    out
}

/// One binary column per affect: selected by at least `min_raters` raters.
pub fn human_label_table(annotations: &[AnnotationRecord], min_raters: usize) -> LabelTable {
    let mut t = LabelTable::new(Affect::ALL.iter().map(|a| a.to_string()).collect());
    for (post, counts) in votes(annotations) {
        let row = Affect::ALL
            .iter()
            .map(|a| f64::from(counts.get(&Choice::Affect(*a)).copied().unwrap_or(0) >= min_raters.max(1)))
            .collect();
        t.rows.insert(post.to_string(), row);
    }
    t
}

/// Event kinds grouped for normalization: reactions, behaviors and
/// negative feedback.
pub const ENGAGEMENT_GROUPS: [&[EventKind]; 3] = [
    &[
        EventKind::Like,
        EventKind::Love,
        EventKind::Care,
        EventKind::Haha,
        EventKind::Wow,
        EventKind::Sad,
        EventKind::Angry,
    ],
    &[EventKind::Share, EventKind::OutboundClick],
    &[EventKind::Hide, EventKind::Snooze, EventKind::Unfollow, EventKind::Report],
];

/// Per post, each event kind's count divided by the post's total within
/// the kind's group (zero when the group is empty).
pub fn engagement_table(corpus: &Corpus) -> LabelTable {
    let kinds: Vec<EventKind> = ENGAGEMENT_GROUPS.iter().flat_map(|g| g.iter().copied()).collect();
    let mut t = LabelTable::new(kinds.iter().map(|k| k.to_string()).collect());
    for (i, post) in corpus.posts().iter().enumerate() {
        let mut counts: BTreeMap<EventKind, f64> = BTreeMap::new();
        for e in corpus.events_of(i) {
            *counts.entry(e.kind).or_default() += 1.0;
        }
        let mut row = Vec::with_capacity(kinds.len());
        for group in ENGAGEMENT_GROUPS {
            let total: f64 = group.iter().map(|k| counts.get(k).copied().unwrap_or(0.0)).sum();
            row.extend(
                group.iter().map(|k| if total > 0.0 { counts.get(k).copied().unwrap_or(0.0) / total } else { 0.0 }),
            );
        }
        t.rows.insert(post.id.clone(), row);
    }
    t
}

/// One-hot poster feelings over posts that carry one, keeping feelings seen
/// on at least `min_count` posts.
pub fn feeling_table(corpus: &Corpus, min_count: usize) -> LabelTable {
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for f in corpus.posts().iter().filter_map(|p| p.feeling.as_deref()) {
        *freq.entry(f).or_default() += 1;
    }
    let kept: BTreeSet<&str> = freq.into_iter().filter(|&(_, n)| n >= min_count).map(|(f, _)| f).collect();
    let columns: Vec<&str> = kept.iter().copied().collect();
    let mut t = LabelTable::new(columns.iter().map(|f| format!("feeling_{f}")).collect());
    for p in corpus.posts() {
        if let Some(f) = p.feeling.as_deref().filter(|f| kept.contains(f)) {
            t.rows.insert(p.id.clone(), columns.iter().map(|c| f64::from(*c == f)).collect());
        }
    }
    t
}

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ngram::mine_tokenized;
use super::pattern::aggregate;
use super::{
    expand, label_count, match_tokens, CareError, ChangelogEntry, Lexicon, PatternSet, PostLabels, Thresholds,
};
use crate::corpus::Corpus;
use crate::text::tokenize;

/// When to stop bootstrapping. A fixpoint (no additions) always stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopCondition {
    pub max_iters: usize,
    /// Stop once the total number of (post, label) pairs reaches this.
    pub target_labels: Option<usize>,
}

impl Default for StopCondition {
    fn default() -> Self {
        Self { max_iters: 5, target_labels: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIters,
    TargetReached,
    Fixpoint,
}

/// Snapshot after an iteration. Iteration 0 is the seed labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: usize,
    pub patterns: usize,
    pub keywords: usize,
    pub labeled_posts: usize,
    pub labels: usize,
    pub patterns_added: usize,
    pub keywords_added: usize,
    pub conflicts: usize,
}

#[derive(Debug, Clone)]
pub struct CareRun {
    pub labels: PostLabels,
    pub patterns: PatternSet,
    pub lexicon: Lexicon,
    pub reports: Vec<IterationReport>,
    pub changelog: Vec<ChangelogEntry>,
    pub stop_reason: StopReason,
}

struct Tokenized<'a> {
    post_ids: Vec<&'a str>,
    comments: Vec<Vec<Vec<String>>>,
}

impl<'a> Tokenized<'a> {
    fn new(corpus: &'a Corpus) -> Self {
        let post_ids = corpus.posts().iter().map(|p| p.id.as_str()).collect();
        let comments =
            (0..corpus.posts().len()).map(|i| corpus.comments_of(i).map(|c| tokenize(&c.text)).collect()).collect();
        Self { post_ids, comments }
    }

    fn label(&self, patterns: &PatternSet, lexicon: &Lexicon, min_support: usize) -> PostLabels {
        self.post_ids
            .iter()
            .zip(&self.comments)
            .filter_map(|(id, comments)| {
                let labels = aggregate(comments.iter().map(|t| match_tokens(t, patterns, lexicon)), min_support);
                (!labels.is_empty()).then(|| (id.to_string(), labels))
            })
            .collect()
    }
}

/// Labels every post of the corpus from its comments.
pub fn label_corpus(corpus: &Corpus, patterns: &PatternSet, lexicon: &Lexicon, min_support: usize) -> PostLabels {
    Tokenized::new(corpus).label(patterns, lexicon, min_support)
}

/// Seeds, labels, then alternates mining and expansion until a stop
/// condition holds. Labels never shrink between iterations because
/// patterns and lexicon only grow.
pub fn run_care(
    corpus: &Corpus,
    seed_patterns: &PatternSet,
    seed_lexicon: &Lexicon,
    thresholds: &Thresholds,
    stop: &StopCondition,
) -> Result<CareRun, CareError> {
    if seed_patterns.is_empty() || seed_lexicon.is_empty() {
        return Err(CareError::EmptySeeds);
    }
    thresholds.validate()?;
    let tokenized = Tokenized::new(corpus);
    let mut patterns = seed_patterns.clone();
    let mut lexicon = seed_lexicon.clone();
    let mut labels = tokenized.label(&patterns, &lexicon, thresholds.min_support);
    let mut changelog = Vec::new();
    let mut reports = vec![report(0, &patterns, &lexicon, &labels, &[])];

    let target_hit = |labels: &PostLabels| stop.target_labels.is_some_and(|t| label_count(labels) >= t);
    let mut stop_reason = StopReason::MaxIters;
    for iteration in 1..=stop.max_iters {
        if target_hit(&labels) {
            stop_reason = StopReason::TargetReached;
            break;
        }
        let empty = BTreeSet::new();
        let stats = mine_tokenized(
            tokenized
                .post_ids
                .iter()
                .zip(&tokenized.comments)
                .map(|(id, c)| (labels.get(*id).unwrap_or(&empty), c.as_slice())),
            &patterns,
            &lexicon,
            thresholds.n_max,
        );
        let mut expansion = expand(&patterns, &lexicon, &stats, thresholds)?;
        for entry in &mut expansion.changelog {
            entry.iteration = iteration;
        }
        let additions = expansion.additions();
        let next_report_log = expansion.changelog.clone();
        changelog.append(&mut expansion.changelog);
        if additions == 0 {
            reports.push(report(iteration, &patterns, &lexicon, &labels, &next_report_log));
            stop_reason = StopReason::Fixpoint;
            break;
        }
        patterns = expansion.patterns;
        lexicon = expansion.lexicon;
        let next = tokenized.label(&patterns, &lexicon, thresholds.min_support);
        debug_assert!(labels.iter().all(|(p, ls)| next.get(p).is_some_and(|n| n.is_superset(ls))));
        labels = next;
        reports.push(report(iteration, &patterns, &lexicon, &labels, &next_report_log));
    }
    if stop_reason == StopReason::MaxIters && target_hit(&labels) {
        stop_reason = StopReason::TargetReached;
    }
    Ok(CareRun { labels, patterns, lexicon, reports, changelog, stop_reason })
}

fn report(
    iteration: usize,
    patterns: &PatternSet,
    lexicon: &Lexicon,
    labels: &PostLabels,
    log: &[ChangelogEntry],
) -> IterationReport {
    use super::ChangeKind::*;
    let count = |k| log.iter().filter(|e| e.kind == k).count();
    IterationReport {
        iteration,
        patterns: patterns.len(),
        keywords: lexicon.len(),
        labeled_posts: labels.len(),
        labels: label_count(labels),
        patterns_added: count(PatternAdded),
        keywords_added: count(KeywordAdded),
        conflicts: count(Conflict),
    }
}

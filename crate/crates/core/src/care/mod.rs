//! CARE weak labeling: comment patterns with a keyword slot, a keyword to
//! affect lexicon, post-level aggregation, and bootstrap expansion of both
//! from frequent n-grams in comments of already-labeled posts.
//!
//! Labels are derived from comment text only. Post content never enters the
//! matcher, so a model trained on post content does not inherit the
//! matcher's expressions.

mod bootstrap;
mod expand;
mod lexicon;
mod ngram;
mod pattern;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use bootstrap::{label_corpus, run_care, CareRun, IterationReport, StopCondition, StopReason};
pub use expand::{expand, ChangeKind, ChangelogEntry, Expansion, Thresholds};
pub use lexicon::{CareLabel, Lexicon};
pub use ngram::{mine_ngrams, NgramStats};
pub use pattern::{label_post, match_comment, match_tokens, CarePattern, PatternMatch, PatternSet, SLOT};

#[allow(unused_imports)]
pub(crate) use ngram::{consumed_positions, count_into};

/// Shipped seed patterns, one `pattern_id<TAB>template` per line.
pub const SEED_PATTERNS: &str = include_str!("../../data/seed_patterns.tsv");
/// Shipped seed lexicon, one `keyword<TAB>affect[,affect...]` per line.
pub const SEED_LEXICON: &str = include_str!("../../data/seed_lexicon.tsv");

/// Post id to CARE labels. Posts without labels are absent.
pub type PostLabels = BTreeMap<String, BTreeSet<CareLabel>>;

#[derive(Debug, Error)]
pub enum CareError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
    #[error("invalid keyword `{0}`")]
    InvalidKeyword(String),
    #[error("duplicate keyword `{0}`")]
    DuplicateKeyword(String),
    #[error("duplicate pattern `{0}`")]
    DuplicatePattern(String),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("seed patterns and lexicon must be non-empty")]
    EmptySeeds,
}

/// Total number of (post, label) pairs.
pub fn label_count(labels: &PostLabels) -> usize {
    labels.values().map(BTreeSet::len).sum()
}

/// Serializes post labels as `post_id<TAB>label[,label...]` lines.
pub fn labels_to_tsv(labels: &PostLabels) -> String {
    let mut out = String::from("# post_id\tlabels\n");
    for (post, ls) in labels {
        let ls: Vec<String> = ls.iter().map(|l| l.to_string()).collect();
        out.push_str(&format!("{post}\t{}\n", ls.join(",")));
    }
    out
}

pub fn labels_from_tsv(text: &str) -> Result<PostLabels, CareError> {
    let mut out = PostLabels::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| CareError::Parse { line: idx + 1, message };
        let (post, ls) = line.split_once('\t').ok_or_else(|| err("expected `post_id<TAB>labels`".into()))?;
        let ls = ls
            .split(',')
            .filter(|s| !s.is_empty())
            .map(str::parse::<CareLabel>)
            .collect::<Result<BTreeSet<_>, _>>()
            .map_err(|e| err(e.to_string()))?;
        if !ls.is_empty() && out.insert(post.to_string(), ls).is_some() {
            return Err(err(format!("post `{post}` listed twice")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Affect;

    #[test]
    fn post_labels_round_trip() {
        let mut labels = PostLabels::new();
        labels.insert("p1".into(), [CareLabel::Angered, CareLabel::Affect(Affect::Scared)].into());
        labels.insert("p2".into(), [CareLabel::Affect(Affect::Adoring)].into());
        assert_eq!(labels_from_tsv(&labels_to_tsv(&labels)).unwrap(), labels);
        assert_eq!(label_count(&labels), 3);
        assert!(labels_from_tsv("p1\tgrumpy\n").is_err());
    }
}

use std::collections::{BTreeMap, BTreeSet};

use super::{match_tokens, CareLabel, Lexicon, PatternSet, PostLabels};
use crate::corpus::Corpus;
use crate::text::tokenize;

/// Per-label n-gram counts. Keys are space-joined lowercase tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NgramStats {
    pub n_max: usize,
    pub counts: BTreeMap<CareLabel, BTreeMap<String, u64>>,
}

impl NgramStats {
    pub fn is_empty(&self) -> bool {
        self.counts.values().all(BTreeMap::is_empty)
    }

    pub fn count(&self, label: CareLabel, ngram: &str) -> u64 {
        self.counts.get(&label).and_then(|m| m.get(ngram)).copied().unwrap_or(0)
    }

    /// Per-label counts of one n-gram, omitting zeros.
    pub fn evidence(&self, ngram: &str) -> BTreeMap<CareLabel, u64> {
        self.counts.iter().filter_map(|(label, m)| m.get(ngram).map(|&n| (*label, n))).collect()
    }

    /// Every distinct n-gram over all labels.
    pub fn ngrams(&self) -> BTreeSet<&str> {
        self.counts.values().flat_map(|m| m.keys().map(String::as_str)).collect()
    }
}

/// Token positions consumed by the literal part of any pattern occurrence.
/// Keyword slots stay visible so that unknown keywords can be mined.
pub(crate) fn consumed_positions(tokens: &[String], patterns: &PatternSet) -> Vec<bool> {
    let mut mask = vec![false; tokens.len()];
    for pattern in patterns {
        for m in pattern.find_matches(tokens) {
            for (i, slot) in mask.iter_mut().enumerate().take(m.end).skip(m.start) {
                if i != m.keyword {
                    *slot = true;
                }
            }
        }
    }
    mask
}

/// Adds every 1..=n_max gram of `tokens` that avoids masked positions.
pub(crate) fn count_into(tokens: &[String], mask: &[bool], n_max: usize, out: &mut BTreeMap<String, u64>) {
    for start in 0..tokens.len() {
        for end in start + 1..=(start + n_max).min(tokens.len()) {
            if mask[end - 1] {
                break;
            }
            *out.entry(tokens[start..end].join(" ")).or_default() += 1;
        }
    }
}

/// Counts n-grams per label over the unlabeled comments of labeled posts.
/// A comment is unlabeled when no pattern occurrence in it extracts a known
/// keyword; literal tokens of pattern occurrences are excluded from counts.
pub(crate) fn mine_tokenized<'a, I>(posts: I, patterns: &PatternSet, lexicon: &Lexicon, n_max: usize) -> NgramStats
where
    I: IntoIterator<Item = (&'a BTreeSet<CareLabel>, &'a [Vec<String>])>,
{
    let n_max = n_max.max(1);
    let mut stats = NgramStats { n_max, counts: BTreeMap::new() };
    let mut per_comment = BTreeMap::new();
    for (labels, comments) in posts {
        if labels.is_empty() {
            continue;
        }
        for tokens in comments {
            if !match_tokens(tokens, patterns, lexicon).is_empty() {
                continue;
            }
            per_comment.clear();
            let mask = consumed_positions(tokens, patterns);
            count_into(tokens, &mask, n_max, &mut per_comment);
            for label in labels {
                let slot = stats.counts.entry(*label).or_default();
                for (gram, n) in &per_comment {
                    *slot.entry(gram.clone()).or_default() += n;
                }
            }
        }
    }
    stats
}

/// N-gram statistics for the posts in `labels`.
pub fn mine_ngrams(
    corpus: &Corpus,
    labels: &PostLabels,
    patterns: &PatternSet,
    lexicon: &Lexicon,
    n_max: usize,
) -> NgramStats {
    let tokenized: Vec<(&BTreeSet<CareLabel>, Vec<Vec<String>>)> = corpus
        .posts()
        .iter()
        .enumerate()
        .filter_map(|(i, p)| labels.get(&p.id).map(|l| (i, l)))
        .map(|(i, l)| (l, corpus.comments_of(i).map(|c| tokenize(&c.text)).collect()))
        .collect();
    mine_tokenized(tokenized.iter().map(|(l, c)| (*l, c.as_slice())), patterns, lexicon, n_max)
}

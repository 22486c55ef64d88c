use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CareError, CareLabel, CarePattern, Lexicon, NgramStats, PatternSet};

/// Knobs for labeling and expansion. None of these have published values;
/// the defaults are declared here and exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Comments that must carry a label before the post gets it.
    pub min_support: usize,
    /// Minimum per-label count for an n-gram to count as frequent.
    pub min_freq: u64,
    /// Labels in which an n-gram must be frequent to become a pattern.
    pub min_classes_for_pattern: usize,
    /// Fraction of a unigram's mass that one label must hold to become a
    /// keyword for that label.
    pub purity_for_keyword: f64,
    /// Longest n-gram mined.
    pub n_max: usize,
    /// Shortest n-gram accepted as a new pattern.
    pub min_pattern_tokens: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            min_support: 2,
            min_freq: 20,
            min_classes_for_pattern: 2,
            purity_for_keyword: 0.8,
            n_max: 3,
            min_pattern_tokens: 2,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), CareError> {
        let bad = |m: &str| Err(CareError::InvalidThresholds(m.to_string()));
        if self.min_support == 0 {
            return bad("min_support must be >= 1");
        }
        if self.min_freq == 0 || self.min_classes_for_pattern == 0 {
            return bad("min_freq and min_classes_for_pattern must be positive");
        }
        if !(self.purity_for_keyword > 0.5 && self.purity_for_keyword <= 1.0) {
            return bad("purity_for_keyword must lie in (0.5, 1.0]");
        }
        if self.n_max == 0 || self.min_pattern_tokens == 0 {
            return bad("n_max and min_pattern_tokens must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeKind {
    PatternAdded,
    KeywordAdded,
    /// The n-gram qualified as a keyword for a label, but the lexicon
    /// already maps it elsewhere. Not applied.
    Conflict,
}

/// One audited expansion decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangelogEntry {
    pub iteration: usize,
    pub kind: ChangeKind,
    pub ngram: String,
    /// Pattern id for additions, label for keywords and conflicts.
    pub target: String,
    /// Per-label counts that justified the decision.
    pub evidence: BTreeMap<CareLabel, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub patterns: PatternSet,
    pub lexicon: Lexicon,
    pub changelog: Vec<ChangelogEntry>,
}

impl Expansion {
    pub fn additions(&self) -> usize {
        self.changelog.iter().filter(|e| e.kind != ChangeKind::Conflict).count()
    }
}

struct Candidate<'a> {
    gram: &'a str,
    tokens: Vec<&'a str>,
    evidence: BTreeMap<CareLabel, u64>,
}

fn contains_run(haystack: &[&str], needle: &[&str]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Grows the pattern set and lexicon from mined n-gram statistics.
///
/// N-grams frequent in several labels become patterns (a keyword slot is
/// appended); unigrams concentrated in one label become keywords. Existing
/// entries are never removed or remapped.
pub fn expand(
    patterns: &PatternSet,
    lexicon: &Lexicon,
    stats: &NgramStats,
    thresholds: &Thresholds,
) -> Result<Expansion, CareError> {
    thresholds.validate()?;
    let mut patterns = patterns.clone();
    let mut lexicon_out = lexicon.clone();
    let mut changelog = Vec::new();
    let ngrams = stats.ngrams();

    let mut candidates: Vec<Candidate> = Vec::new();
    for &gram in &ngrams {
        let tokens: Vec<&str> = gram.split(' ').collect();
        if tokens.len() < thresholds.min_pattern_tokens || tokens.iter().any(|t| lexicon.contains(t)) {
            continue;
        }
        let evidence = stats.evidence(gram);
        let frequent_in = evidence.values().filter(|&&n| n >= thresholds.min_freq).count();
        if frequent_in >= thresholds.min_classes_for_pattern {
            candidates.push(Candidate { gram, tokens, evidence });
        }
    }
    // Keep only closed candidates: drop an n-gram when a longer candidate
    // containing it has identical per-label counts.
    let closed: Vec<&Candidate> = candidates
        .iter()
        .filter(|c| {
            !candidates.iter().any(|d| {
                d.tokens.len() > c.tokens.len() && d.evidence == c.evidence && contains_run(&d.tokens, &c.tokens)
            })
        })
        .collect();
    for c in closed {
        let owned: Vec<String> = c.tokens.iter().map(|t| t.to_string()).collect();
        let base = format!("auto_{}", owned.join("_"));
        let mut id = base.clone();
        let mut k = 1;
        while patterns.iter().any(|p| p.id == id) {
            k += 1;
            id = format!("{base}_{k}");
        }
        let pattern = CarePattern::with_trailing_slot(&id, &owned)?;
        if patterns.contains_shape(&pattern) {
            continue;
        }
        patterns.push(pattern)?;
        changelog.push(ChangelogEntry {
            iteration: 0,
            kind: ChangeKind::PatternAdded,
            ngram: c.gram.to_string(),
            target: id,
            evidence: c.evidence.clone(),
        });
    }

    for &gram in ngrams.iter().filter(|g| !g.contains(' ')) {
        let evidence = stats.evidence(gram);
        let total: u64 = evidence.values().sum();
        // first label wins ties, which keeps the choice deterministic
        let Some((&label, &best)) = evidence.iter().fold(None, |acc: Option<(&CareLabel, &u64)>, kv| match acc {
            Some(a) if a.1 >= kv.1 => Some(a),
            _ => Some(kv),
        }) else {
            continue;
        };
        if best < thresholds.min_freq || (best as f64) < thresholds.purity_for_keyword * total as f64 {
            continue;
        }
        let kind = match lexicon_out.get(gram) {
            None => {
                lexicon_out.insert(gram, [label].into())?;
                ChangeKind::KeywordAdded
            }
            Some(existing) if existing.contains(&label) => continue,
            Some(_) => ChangeKind::Conflict,
        };
        changelog.push(ChangelogEntry {
            iteration: 0,
            kind,
            ngram: gram.to_string(),
            target: label.to_string(),
            evidence,
        });
    }

    Ok(Expansion { patterns, lexicon: lexicon_out, changelog })
}

use std::collections::BTreeSet;

use super::{CareError, CareLabel, Lexicon};
use crate::text::tokenize;

/// Placeholder for the keyword slot in a template.
pub const SLOT: &str = "{kw}";

/// A token template with exactly one keyword slot, e.g. `what a {kw}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarePattern {
    pub id: String,
    prefix: Vec<String>,
    suffix: Vec<String>,
    /// Number of literal tokens that must match around the slot.
    pub min_match_tokens: usize,
}

/// One occurrence of a pattern inside a token sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternMatch {
    pub start: usize,
    pub keyword: usize,
    pub end: usize,
}

impl CarePattern {
    pub fn new(id: &str, template: &str) -> Result<Self, CareError> {
        let invalid = |why: &str| CareError::InvalidTemplate(format!("{id}: `{template}` {why}"));
        if id.is_empty() || id.contains(char::is_whitespace) {
            return Err(invalid("has an empty or whitespace-containing id"));
        }
        let pieces: Vec<&str> = template.split_whitespace().collect();
        let slots = pieces.iter().filter(|p| **p == SLOT).count();
        if slots != 1 {
            return Err(invalid("must contain exactly one {kw} slot"));
        }
        let at = pieces.iter().position(|p| *p == SLOT).unwrap();
        let prefix: Vec<String> = pieces[..at].iter().flat_map(|p| tokenize(p)).collect();
        let suffix: Vec<String> = pieces[at + 1..].iter().flat_map(|p| tokenize(p)).collect();
        if prefix.is_empty() && suffix.is_empty() {
            return Err(invalid("has no literal tokens"));
        }
        let min_match_tokens = prefix.len() + suffix.len();
        Ok(Self { id: id.to_string(), prefix, suffix, min_match_tokens })
    }

    /// Builds `<ngram> {kw}`.
    pub fn with_trailing_slot(id: &str, ngram: &[String]) -> Result<Self, CareError> {
        Self::new(id, &format!("{} {SLOT}", ngram.join(" ")))
    }

    pub fn template(&self) -> String {
        self.prefix
            .iter()
            .map(String::as_str)
            .chain([SLOT])
            .chain(self.suffix.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Token count, slot included. Never zero.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.prefix.len() + 1 + self.suffix.len()
    }

    /// Literal tokens, prefix then suffix.
    pub fn literals(&self) -> impl Iterator<Item = &str> {
        self.prefix.iter().chain(&self.suffix).map(String::as_str)
    }

    fn same_shape(&self, other: &CarePattern) -> bool {
        self.prefix == other.prefix && self.suffix == other.suffix
    }

    /// All occurrences in `tokens`, left to right. Tokens must already be
    /// lowercased (see [`tokenize`]).
    pub fn find_matches(&self, tokens: &[String]) -> Vec<PatternMatch> {
        let len = self.len();
        if tokens.len() < len {
            return Vec::new();
        }
        (0..=tokens.len() - len)
            .filter(|&start| {
                let kw = start + self.prefix.len();
                tokens[start..kw] == self.prefix[..] && tokens[kw + 1..start + len] == self.suffix[..]
            })
            .map(|start| PatternMatch { start, keyword: start + self.prefix.len(), end: start + len })
            .collect()
    }
}

/// An ordered collection of patterns with unique ids and templates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternSet {
    patterns: Vec<CarePattern>,
}

impl PatternSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The patterns shipped in `data/seed_patterns.tsv`.
    pub fn seed() -> Self {
        Self::parse(super::SEED_PATTERNS).expect("shipped seed patterns are valid")
    }

    pub fn push(&mut self, pattern: CarePattern) -> Result<(), CareError> {
        if self.patterns.iter().any(|p| p.id == pattern.id) {
            return Err(CareError::DuplicatePattern(pattern.id));
        }
        if self.contains_shape(&pattern) {
            return Err(CareError::DuplicatePattern(pattern.template()));
        }
        self.patterns.push(pattern);
        Ok(())
    }

    pub fn contains_shape(&self, pattern: &CarePattern) -> bool {
        self.patterns.iter().any(|p| p.same_shape(pattern))
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CarePattern> {
        self.patterns.iter()
    }

    /// Parses `pattern_id<TAB>template` lines; `#` lines are comments.
    pub fn parse(text: &str) -> Result<Self, CareError> {
        let mut set = Self::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| CareError::Parse { line: idx + 1, message };
            let (id, template) =
                line.split_once('\t').ok_or_else(|| parse_err("expected `pattern_id<TAB>template`".into()))?;
            let pattern = CarePattern::new(id, template).map_err(|e| parse_err(e.to_string()))?;
            set.push(pattern).map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(set)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# pattern_id\ttemplate\n");
        for p in &self.patterns {
            out.push_str(&format!("{}\t{}\n", p.id, p.template()));
        }
        out
    }
}

impl<'a> IntoIterator for &'a PatternSet {
    type Item = &'a CarePattern;
    type IntoIter = std::slice::Iter<'a, CarePattern>;

    fn into_iter(self) -> Self::IntoIter {
        self.patterns.iter()
    }
}

/// Labels of one comment: the union, over every pattern occurrence, of the
/// lexicon entry for the extracted keyword.
pub fn match_comment(text: &str, patterns: &PatternSet, lexicon: &Lexicon) -> BTreeSet<CareLabel> {
    match_tokens(&tokenize(text), patterns, lexicon)
}

/// [`match_comment`] over pre-tokenized text.
pub fn match_tokens(tokens: &[String], patterns: &PatternSet, lexicon: &Lexicon) -> BTreeSet<CareLabel> {
    let mut labels = BTreeSet::new();
    for pattern in patterns {
        for m in pattern.find_matches(tokens) {
            if let Some(found) = lexicon.get(&tokens[m.keyword]) {
                labels.extend(found.iter().copied());
            }
        }
    }
    labels
}

/// Post-level labels: a label is kept when at least `min_support` comments
/// carry it.
pub fn label_post<'a, I>(
    comments: I,
    patterns: &PatternSet,
    lexicon: &Lexicon,
    min_support: usize,
) -> BTreeSet<CareLabel>
where
    I: IntoIterator<Item = &'a str>,
{
    aggregate(comments.into_iter().map(|c| match_comment(c, patterns, lexicon)), min_support)
}

pub(crate) fn aggregate<I>(comment_labels: I, min_support: usize) -> BTreeSet<CareLabel>
where
    I: IntoIterator<Item = BTreeSet<CareLabel>>,
{
    let min_support = min_support.max(1);
    let mut support: std::collections::BTreeMap<CareLabel, usize> = Default::default();
    for labels in comment_labels {
        for label in labels {
            *support.entry(label).or_default() += 1;
        }
    }
    support.into_iter().filter(|&(_, n)| n >= min_support).map(|(l, _)| l).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Affect;

    fn lexicon(entries: &[(&str, CareLabel)]) -> Lexicon {
        let mut lex = Lexicon::new();
        for (k, l) in entries {
            lex.insert(k, [*l].into()).unwrap();
        }
        lex
    }

    const ENTERTAINED: CareLabel = CareLabel::Affect(Affect::Entertained);
    const ADORING: CareLabel = CareLabel::Affect(Affect::Adoring);

    #[test]
    fn matches_the_two_reference_expressions() {
        let mut patterns = PatternSet::new();
        patterns.push(CarePattern::new("what_a", "what a {kw}").unwrap()).unwrap();
        patterns.push(CarePattern::new("this_is_so", "this is so {kw}").unwrap()).unwrap();
        let lex = lexicon(&[("hilarious", ENTERTAINED), ("cute", ADORING)]);
        assert_eq!(match_comment("What a hilarious story", &patterns, &lex), [ENTERTAINED].into());
        assert_eq!(match_comment("This is so cute", &patterns, &lex), [ADORING].into());
        assert!(match_comment("meeting at noon", &patterns, &lex).is_empty());
        // keyword outside the lexicon contributes nothing
        assert!(match_comment("what a day", &patterns, &lex).is_empty());
    }

    #[test]
    fn matching_is_position_invariant_and_case_insensitive() {
        let patterns = PatternSet::parse("p\twhat a {kw}\n").unwrap();
        let lex = lexicon(&[("hilarious", ENTERTAINED)]);
        for text in ["WHAT A HILARIOUS", "lol... what a hilarious!", "ok ok ok, What a Hilarious thing"] {
            assert_eq!(match_comment(text, &patterns, &lex), [ENTERTAINED].into(), "{text}");
        }
    }

    #[test]
    fn slot_can_sit_anywhere() {
        let p = CarePattern::new("p", "{kw} post").unwrap();
        let tokens = tokenize("such a cute post and a funny post");
        let kws: Vec<&str> = p.find_matches(&tokens).iter().map(|m| tokens[m.keyword].as_str()).collect();
        assert_eq!(kws, vec!["cute", "funny"]);
        assert_eq!(p.template(), "{kw} post");
        assert_eq!(p.min_match_tokens, 1);
    }

    #[test]
    fn template_validation() {
        assert!(CarePattern::new("a", "what a").is_err());
        assert!(CarePattern::new("a", "{kw} and {kw}").is_err());
        assert!(CarePattern::new("a", "{kw}").is_err());
        assert!(CarePattern::new("", "what {kw}").is_err());
        let mut set = PatternSet::new();
        set.push(CarePattern::new("a", "what a {kw}").unwrap()).unwrap();
        assert!(set.push(CarePattern::new("b", "What  A {kw}").unwrap()).is_err());
        assert!(set.push(CarePattern::new("a", "how {kw}").unwrap()).is_err());
    }

    #[test]
    fn label_post_thresholds_support() {
        let patterns = PatternSet::parse("p\twhat a {kw}\n").unwrap();
        let lex = lexicon(&[("hilarious", ENTERTAINED), ("cute", ADORING)]);
        let comments = ["what a hilarious", "what a hilarious one", "what a cute"];
        assert_eq!(label_post(comments, &patterns, &lex, 2), [ENTERTAINED].into());
        assert_eq!(label_post(comments, &patterns, &lex, 1), [ENTERTAINED, ADORING].into());
        assert!(label_post([], &patterns, &lex, 1).is_empty());
    }

    #[test]
    fn seed_patterns_are_valid() {
        let seed = PatternSet::seed();
        assert!(seed.len() >= 5);
        assert_eq!(PatternSet::parse(&seed.to_tsv()).unwrap(), seed);
    }
}

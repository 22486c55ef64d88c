use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CareError;
use crate::corpus::{Affect, UnknownName};
use crate::text::tokenize;

/// A label CARE can emit for a post.
///
/// Comment expressions of anger do not say which kind of anger the reader
/// felt, so CARE emits a single unsplit `angered` label that covers both
/// angered taxonomy classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CareLabel {
    Affect(Affect),
    Angered,
}

impl CareLabel {
    /// Projects a taxonomy affect into CARE's label space.
    pub fn from_affect(affect: Affect) -> Self {
        match affect {
            Affect::ConstructivelyAngered | Affect::DestructivelyAngered => CareLabel::Angered,
            other => CareLabel::Affect(other),
        }
    }

    /// The taxonomy affect, if this label resolves to exactly one.
    pub fn affect(self) -> Option<Affect> {
        match self {
            CareLabel::Affect(a) => Some(a),
            CareLabel::Angered => None,
        }
    }

    /// Whether `affect` falls under this label.
    pub fn covers(self, affect: Affect) -> bool {
        CareLabel::from_affect(affect) == self
    }
}

impl fmt::Display for CareLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CareLabel::Affect(a) => a.fmt(f),
            CareLabel::Angered => f.write_str("angered"),
        }
    }
}

impl FromStr for CareLabel {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "angered" {
            Ok(CareLabel::Angered)
        } else {
            s.parse().map(CareLabel::Affect)
        }
    }
}

impl TryFrom<String> for CareLabel {
    type Error = UnknownName;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<CareLabel> for String {
    fn from(value: CareLabel) -> Self {
        value.to_string()
    }
}

/// Keyword to label mapping. Keywords are single lowercase tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, BTreeSet<CareLabel>>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// The lexicon shipped in `data/seed_lexicon.tsv`.
    pub fn seed() -> Self {
        Self::parse(super::SEED_LEXICON).expect("shipped seed lexicon is valid")
    }

    /// Adds a keyword. Fails if the keyword is not a single lowercase token
    /// or is already present.
    pub fn insert(&mut self, keyword: &str, labels: BTreeSet<CareLabel>) -> Result<(), CareError> {
        if tokenize(keyword) != [keyword] {
            return Err(CareError::InvalidKeyword(keyword.to_string()));
        }
        if labels.is_empty() {
            return Err(CareError::InvalidKeyword(format!("{keyword} (no labels)")));
        }
        if self.entries.contains_key(keyword) {
            return Err(CareError::DuplicateKeyword(keyword.to_string()));
        }
        self.entries.insert(keyword.to_string(), labels);
        Ok(())
    }

    pub fn get(&self, keyword: &str) -> Option<&BTreeSet<CareLabel>> {
        self.entries.get(keyword)
    }

    pub fn contains(&self, keyword: &str) -> bool {
        self.entries.contains_key(keyword)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<CareLabel>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Keywords mapped to `label`, in sorted order.
    pub fn keywords_for(&self, label: CareLabel) -> Vec<&str> {
        self.iter().filter(|(_, ls)| ls.contains(&label)).map(|(k, _)| k).collect()
    }

    /// Parses `keyword<TAB>label[,label...]` lines. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, CareError> {
        let mut lexicon = Self::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| CareError::Parse { line: idx + 1, message };
            let (keyword, labels) =
                line.split_once('\t').ok_or_else(|| parse_err("expected `keyword<TAB>labels`".into()))?;
            let labels = labels
                .split(',')
                .map(|l| l.trim().parse::<CareLabel>())
                .collect::<Result<BTreeSet<_>, _>>()
                .map_err(|e| parse_err(e.to_string()))?;
            lexicon.insert(keyword, labels).map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(lexicon)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# keyword\taffect[,affect...]\n");
        for (keyword, labels) in &self.entries {
            let labels: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
            out.push_str(&format!("{keyword}\t{}\n", labels.join(",")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lexicon_covers_care_affects() {
        let lexicon = Lexicon::seed();
        assert!(lexicon.len() >= 30);
        for label in [
            CareLabel::Affect(Affect::Adoring),
            CareLabel::Affect(Affect::Entertained),
            CareLabel::Affect(Affect::Excited),
            CareLabel::Affect(Affect::Saddened),
            CareLabel::Affect(Affect::Scared),
            CareLabel::Angered,
            CareLabel::Affect(Affect::Approving),
        ] {
            assert!(lexicon.keywords_for(label).len() >= 5, "{label}");
        }
    }

    #[test]
    fn parse_round_trips_and_rejects_bad_lines() {
        let lexicon = Lexicon::parse("# c\ncute\tadoring\nwow\texcited,surprised\n").unwrap();
        assert_eq!(Lexicon::parse(&lexicon.to_tsv()).unwrap(), lexicon);
        assert_eq!(lexicon.get("wow").unwrap().len(), 2);
        assert!(matches!(Lexicon::parse("cute adoring\n"), Err(CareError::Parse { line: 1, .. })));
        assert!(matches!(Lexicon::parse("cute\tcuteness\n"), Err(CareError::Parse { line: 1, .. })));
        assert!(Lexicon::parse("cute\tadoring\ncute\texcited\n").is_err());
        assert!(Lexicon::parse("so cute\tadoring\n").is_err());
        assert!(Lexicon::parse("Cute\tadoring\n").is_err());
    }

    #[test]
    fn angered_covers_both_kinds() {
        assert!(CareLabel::Angered.covers(Affect::ConstructivelyAngered));
        assert!(CareLabel::Angered.covers(Affect::DestructivelyAngered));
        assert!(!CareLabel::Angered.covers(Affect::Saddened));
        assert_eq!("angered".parse::<CareLabel>().unwrap(), CareLabel::Angered);
    }
}

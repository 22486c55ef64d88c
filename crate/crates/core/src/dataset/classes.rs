use std::fmt;
use std::str::FromStr;

use crate::corpus::{Affect, EventKind, UnknownName};

/// One output of the multi-label model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredictionClass {
    Engagement(EventKind),
    Affect(Affect),
}

impl fmt::Display for PredictionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictionClass::Engagement(k) => k.fmt(f),
            PredictionClass::Affect(a) => a.fmt(f),
        }
    }
}

impl FromStr for PredictionClass {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<EventKind>()
            .map(PredictionClass::Engagement)
            .or_else(|_| s.parse::<Affect>().map(PredictionClass::Affect))
    }
}

/// The ordered list of prediction classes; label vectors index into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSet {
    classes: Vec<PredictionClass>,
}

impl Default for ClassSet {
    /// Twelve engagement kinds (no snooze) and eleven trainable affects.
    fn default() -> Self {
        Self::new(false)
    }
}

impl ClassSet {
    pub fn new(include_snooze: bool) -> Self {
        let engagement = EventKind::ALL
            .into_iter()
            .filter(|k| include_snooze || *k != EventKind::Snooze)
            .map(PredictionClass::Engagement);
        let affects = Affect::ALL.into_iter().filter(|a| !a.excluded_from_training()).map(PredictionClass::Affect);
        Self { classes: engagement.chain(affects).collect() }
    }

    pub fn from_names(names: &[String]) -> Result<Self, UnknownName> {
        let classes = names.iter().map(|n| n.parse()).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { classes })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn index_of(&self, class: PredictionClass) -> Option<usize> {
        self.classes.iter().position(|c| *c == class)
    }

    pub fn get(&self, k: usize) -> Option<PredictionClass> {
        self.classes.get(k).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = PredictionClass> + '_ {
        self.classes.iter().copied()
    }

    pub fn names(&self) -> Vec<String> {
        self.iter().map(|c| c.to_string()).collect()
    }
}

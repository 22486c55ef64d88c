use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The affective-response taxonomy plus `Approving`.
///
/// Declaration order is the canonical column order used in every table and
/// label vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Affect {
    Adoring,
    Connected,
    ConstructivelyAngered,
    DestructivelyAngered,
    Entertained,
    Excited,
    Grateful,
    Informed,
    Inspired,
    Neutral,
    Relaxed,
    Saddened,
    Scared,
    Surprised,
    Touched,
    Approving,
}

impl Affect {
    pub const ALL: [Affect; 16] = [
        Affect::Adoring,
        Affect::Connected,
        Affect::ConstructivelyAngered,
        Affect::DestructivelyAngered,
        Affect::Entertained,
        Affect::Excited,
        Affect::Grateful,
        Affect::Informed,
        Affect::Inspired,
        Affect::Neutral,
        Affect::Relaxed,
        Affect::Saddened,
        Affect::Scared,
        Affect::Surprised,
        Affect::Touched,
        Affect::Approving,
    ];

    /// Affects withheld from the prediction classes.
    pub fn excluded_from_training(self) -> bool {
        matches!(
            self,
            Affect::ConstructivelyAngered
                | Affect::DestructivelyAngered
                | Affect::Saddened
                | Affect::Scared
                | Affect::Neutral
        )
    }

    /// Negative affects: liking such a post says nothing about the liker's
    /// own response, so these are never personalized.
    pub fn is_negative(self) -> bool {
        matches!(self, Affect::ConstructivelyAngered | Affect::DestructivelyAngered | Affect::Saddened | Affect::Scared)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Affect::Adoring => "adoring",
            Affect::Connected => "connected",
            Affect::ConstructivelyAngered => "constructively_angered",
            Affect::DestructivelyAngered => "destructively_angered",
            Affect::Entertained => "entertained",
            Affect::Excited => "excited",
            Affect::Grateful => "grateful",
            Affect::Informed => "informed",
            Affect::Inspired => "inspired",
            Affect::Neutral => "neutral",
            Affect::Relaxed => "relaxed",
            Affect::Saddened => "saddened",
            Affect::Scared => "scared",
            Affect::Surprised => "surprised",
            Affect::Touched => "touched",
            Affect::Approving => "approving",
        }
    }
}

impl fmt::Display for Affect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown value `{0}`")]
pub struct UnknownName(pub String);

impl FromStr for Affect {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Affect::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| UnknownName(s.to_string()))
    }
}

/// One option of the annotation task: a taxonomy affect or the free-form
/// `other` bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Choice {
    Affect(Affect),
    Other,
}

impl Choice {
    /// Every option in column order: the 16 affects, then `other`.
    pub fn all() -> Vec<Choice> {
        Affect::ALL.iter().map(|&a| Choice::Affect(a)).chain([Choice::Other]).collect()
    }

    pub fn index(self) -> usize {
        match self {
            Choice::Affect(a) => a as usize,
            Choice::Other => Affect::ALL.len(),
        }
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Choice::Affect(a) => a.fmt(f),
            Choice::Other => f.write_str("other"),
        }
    }
}

impl FromStr for Choice {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "other" {
            Ok(Choice::Other)
        } else {
            s.parse().map(Choice::Affect)
        }
    }
}

impl TryFrom<String> for Choice {
    type Error = UnknownName;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Choice> for String {
    fn from(value: Choice) -> Self {
        value.to_string()
    }
}

/// The closed set of engagement actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Like,
    Love,
    Care,
    Haha,
    Wow,
    Sad,
    Angry,
    Share,
    OutboundClick,
    Hide,
    Snooze,
    Unfollow,
    Report,
}

impl EventKind {
    pub const ALL: [EventKind; 13] = [
        EventKind::Like,
        EventKind::Love,
        EventKind::Care,
        EventKind::Haha,
        EventKind::Wow,
        EventKind::Sad,
        EventKind::Angry,
        EventKind::Share,
        EventKind::OutboundClick,
        EventKind::Hide,
        EventKind::Snooze,
        EventKind::Unfollow,
        EventKind::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Like => "like",
            EventKind::Love => "love",
            EventKind::Care => "care",
            EventKind::Haha => "haha",
            EventKind::Wow => "wow",
            EventKind::Sad => "sad",
            EventKind::Angry => "angry",
            EventKind::Share => "share",
            EventKind::OutboundClick => "outbound_click",
            EventKind::Hide => "hide",
            EventKind::Snooze => "snooze",
            EventKind::Unfollow => "unfollow",
            EventKind::Report => "report",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Post {
    pub id: String,
    pub title: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ocr_text: Option<String>,
    pub author_id: String,
    pub created_at: i64,
    #[serde(default)]
    pub violating: bool,
    pub dense_features: Vec<f64>,
    /// Poster-annotated feeling ("feeling sad"), when the author set one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feeling: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comment {
    pub post_id: String,
    pub text: String,
    pub author_id: String,
    pub created_at: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct User {
    pub id: String,
    pub bio_text: String,
    pub interests: Vec<String>,
    pub network_stats: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngagementEvent {
    pub post_id: String,
    pub user_id: String,
    pub kind: EventKind,
    pub at: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRecord {
    pub post_id: String,
    pub rater_id: String,
    pub selected: BTreeSet<Choice>,
}

/// Maximum number of options a rater may select for one post.
pub const MAX_SELECTIONS: usize = 3;

/// A user's binary answer to a preference survey about a post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyResponse {
    pub post_id: String,
    pub user_id: String,
    pub answer: bool,
}

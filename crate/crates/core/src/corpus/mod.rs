//! Social-content corpus: records, validation, file ingestion, and the
//! seeded synthetic generator used throughout the test suite.
//!
//! A [`Corpus`] is immutable once built. Construction validates every
//! cross-reference, so downstream stages can index by id without checks.

mod synth;
mod types;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use synth::{
    filler_vocabulary, synth_corpus, synth_survey, AffectPlant, CommentPlant, GroundTruth, PlantSpec, PlantTemplate,
    SynthConfig, CONTENT_CUES, ENGAGEMENT_CUES,
};
pub use types::{
    Affect, AnnotationRecord, Choice, Comment, EngagementEvent, EventKind, Post, SurveyResponse, UnknownName, User,
    MAX_SELECTIONS,
};

use crate::io::{parse_jsonl, to_jsonl, write_atomic};

/// Default length of `Post::dense_features` and `User::network_stats`.
pub const DEFAULT_DENSE_DIM: usize = 8;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: malformed record: {message}")]
    Malformed { file: String, line: usize, message: String },
    #[error("dangling reference: {kind} `{id}` referenced from {from}")]
    DanglingReference { kind: &'static str, id: String, from: String },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("invalid record: {0}")]
    Invalid(String),
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
}

/// A validated, cross-referenced corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    posts: Vec<Post>,
    users: Vec<User>,
    comments: Vec<Comment>,
    events: Vec<EngagementEvent>,
    annotations: Vec<AnnotationRecord>,
    post_index: HashMap<String, usize>,
    user_index: HashMap<String, usize>,
    comments_by_post: Vec<Vec<usize>>,
    events_by_post: Vec<Vec<usize>>,
    annotations_by_post: Vec<Vec<usize>>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.posts == other.posts
            && self.users == other.users
            && self.comments == other.comments
            && self.events == other.events
            && self.annotations == other.annotations
    }
}

impl Corpus {
    pub fn empty() -> Self {
        Self::new(vec![], vec![], vec![], vec![], vec![]).expect("empty corpus is valid")
    }

    /// Validates and indexes the records.
    pub fn new(
        posts: Vec<Post>,
        users: Vec<User>,
        comments: Vec<Comment>,
        events: Vec<EngagementEvent>,
        annotations: Vec<AnnotationRecord>,
    ) -> Result<Self, CorpusError> {
        let mut user_index = HashMap::with_capacity(users.len());
        let mut stats_len = None;
        for (i, user) in users.iter().enumerate() {
            if user_index.insert(user.id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId { kind: "user", id: user.id.clone() });
            }
            check_dim(&mut stats_len, user.network_stats.len(), "network_stats", &user.id)?;
            check_finite(&user.network_stats, "network_stats", &user.id)?;
        }

        let mut post_index = HashMap::with_capacity(posts.len());
        let mut dense_len = None;
        for (i, post) in posts.iter().enumerate() {
            if post_index.insert(post.id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId { kind: "post", id: post.id.clone() });
            }
            if post.created_at < 0 {
                return Err(CorpusError::Invalid(format!("post `{}` has negative created_at", post.id)));
            }
            if !user_index.contains_key(&post.author_id) {
                return Err(dangling("user", &post.author_id, format!("post `{}`", post.id)));
            }
            check_dim(&mut dense_len, post.dense_features.len(), "dense_features", &post.id)?;
            check_finite(&post.dense_features, "dense_features", &post.id)?;
        }

        let mut comments_by_post = vec![Vec::new(); posts.len()];
        for (i, c) in comments.iter().enumerate() {
            let p = *post_index
                .get(&c.post_id)
                .ok_or_else(|| dangling("post", &c.post_id, format!("comment #{}", i + 1)))?;
            if !user_index.contains_key(&c.author_id) {
                return Err(dangling("user", &c.author_id, format!("comment #{}", i + 1)));
            }
            comments_by_post[p].push(i);
        }

        let mut events_by_post = vec![Vec::new(); posts.len()];
        let mut seen_events = HashSet::with_capacity(events.len());
        for (i, e) in events.iter().enumerate() {
            let p =
                *post_index.get(&e.post_id).ok_or_else(|| dangling("post", &e.post_id, format!("event #{}", i + 1)))?;
            if !user_index.contains_key(&e.user_id) {
                return Err(dangling("user", &e.user_id, format!("event #{}", i + 1)));
            }
            if !seen_events.insert((e.post_id.as_str(), e.user_id.as_str(), e.kind, e.at)) {
                return Err(CorpusError::Invalid(format!(
                    "event #{}: ({}, {}, {}) repeated at the same timestamp {}",
                    i + 1,
                    e.post_id,
                    e.user_id,
                    e.kind,
                    e.at
                )));
            }
            events_by_post[p].push(i);
        }

        let mut annotations_by_post = vec![Vec::new(); posts.len()];
        let mut seen_raters = HashSet::new();
        for (i, a) in annotations.iter().enumerate() {
            let p = *post_index
                .get(&a.post_id)
                .ok_or_else(|| dangling("post", &a.post_id, format!("annotation #{}", i + 1)))?;
            if a.selected.is_empty() || a.selected.len() > MAX_SELECTIONS {
                return Err(CorpusError::Invalid(format!(
                    "annotation #{}: {} selections (allowed 1..={MAX_SELECTIONS})",
                    i + 1,
                    a.selected.len()
                )));
            }
            if !seen_raters.insert((a.post_id.as_str(), a.rater_id.as_str())) {
                return Err(CorpusError::Invalid(format!(
                    "annotation #{}: rater `{}` annotated post `{}` twice",
                    i + 1,
                    a.rater_id,
                    a.post_id
                )));
            }
            annotations_by_post[p].push(i);
        }

        Ok(Self {
            posts,
            users,
            comments,
            events,
            annotations,
            post_index,
            user_index,
            comments_by_post,
            events_by_post,
            annotations_by_post,
        })
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn events(&self) -> &[EngagementEvent] {
        &self.events
    }

    pub fn annotations(&self) -> &[AnnotationRecord] {
        &self.annotations
    }

    pub fn post(&self, id: &str) -> Option<&Post> {
        self.post_index.get(id).map(|&i| &self.posts[i])
    }

    pub fn post_position(&self, id: &str) -> Option<usize> {
        self.post_index.get(id).copied()
    }

    pub fn user(&self, id: &str) -> Option<&User> {
        self.user_index.get(id).map(|&i| &self.users[i])
    }

    /// Comments of the post at position `post` in [`Corpus::posts`].
    pub fn comments_of(&self, post: usize) -> impl Iterator<Item = &Comment> + '_ {
        self.comments_by_post[post].iter().map(move |&i| &self.comments[i])
    }

    pub fn events_of(&self, post: usize) -> impl Iterator<Item = &EngagementEvent> + '_ {
        self.events_by_post[post].iter().map(move |&i| &self.events[i])
    }

    pub fn annotations_of(&self, post: usize) -> impl Iterator<Item = &AnnotationRecord> + '_ {
        self.annotations_by_post[post].iter().map(move |&i| &self.annotations[i])
    }

    /// Largest timestamp over posts, comments and events.
    pub fn max_timestamp(&self) -> Option<i64> {
        self.timestamps().max()
    }

    pub fn min_timestamp(&self) -> Option<i64> {
        self.timestamps().min()
    }

    fn timestamps(&self) -> impl Iterator<Item = i64> + '_ {
        self.posts
            .iter()
            .map(|p| p.created_at)
            .chain(self.comments.iter().map(|c| c.created_at))
            .chain(self.events.iter().map(|e| e.at))
    }

    /// Users who liked or loved the post at `post`, deduplicated, in id order.
    pub fn likers_of(&self, post: usize) -> BTreeSet<&str> {
        self.events_of(post)
            .filter(|e| matches!(e.kind, EventKind::Like | EventKind::Love))
            .map(|e| e.user_id.as_str())
            .collect()
    }
}

fn dangling(kind: &'static str, id: &str, from: String) -> CorpusError {
    CorpusError::DanglingReference { kind, id: id.to_string(), from }
}

fn check_dim(expected: &mut Option<usize>, got: usize, field: &str, id: &str) -> Result<(), CorpusError> {
    match *expected {
        None => {
            *expected = Some(got);
            Ok(())
        }
        Some(n) if n == got => Ok(()),
        Some(n) => Err(CorpusError::Invalid(format!("`{id}`: {field} has length {got}, corpus uses {n}"))),
    }
}

fn check_finite(values: &[f64], field: &str, id: &str) -> Result<(), CorpusError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CorpusError::Invalid(format!("`{id}`: {field} contains a non-finite value")))
    }
}

/// Locations of the record files. `annotations` is optional.
#[derive(Debug, Clone)]
pub struct CorpusPaths {
    pub posts: PathBuf,
    pub users: PathBuf,
    pub comments: PathBuf,
    pub events: PathBuf,
    pub annotations: Option<PathBuf>,
}

impl CorpusPaths {
    pub const POSTS: &'static str = "posts.jsonl";
    pub const USERS: &'static str = "users.jsonl";
    pub const COMMENTS: &'static str = "comments.jsonl";
    pub const EVENTS: &'static str = "events.jsonl";
    pub const ANNOTATIONS: &'static str = "annotations.jsonl";

    /// Standard file names inside `dir`. The annotations file is used only
    /// if it exists.
    pub fn in_dir(dir: &Path) -> Self {
        let annotations = dir.join(Self::ANNOTATIONS);
        Self {
            posts: dir.join(Self::POSTS),
            users: dir.join(Self::USERS),
            comments: dir.join(Self::COMMENTS),
            events: dir.join(Self::EVENTS),
            annotations: annotations.exists().then_some(annotations),
        }
    }
}

fn read_records<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    parse_jsonl(&text).map_err(|e| CorpusError::Malformed {
        file: path.display().to_string(),
        line: e.line,
        message: e.message,
    })
}

/// Reads and validates the record files.
pub fn load_corpus(paths: &CorpusPaths) -> Result<Corpus, CorpusError> {
    let posts = read_records(&paths.posts)?;
    let users = read_records(&paths.users)?;
    let comments = read_records(&paths.comments)?;
    let events = read_records(&paths.events)?;
    let annotations = match &paths.annotations {
        Some(p) => read_records(p)?,
        None => Vec::new(),
    };
    Corpus::new(posts, users, comments, events, annotations)
}

/// Writes all record files into `dir` using the standard names.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<(), CorpusError> {
    let write = |name: &str, bytes: Vec<u8>| {
        let path = dir.join(name);
        write_atomic(&path, &bytes).map_err(|source| CorpusError::Io { path, source })
    };
    write(CorpusPaths::POSTS, to_jsonl(&corpus.posts))?;
    write(CorpusPaths::USERS, to_jsonl(&corpus.users))?;
    write(CorpusPaths::COMMENTS, to_jsonl(&corpus.comments))?;
    write(CorpusPaths::EVENTS, to_jsonl(&corpus.events))?;
    write(CorpusPaths::ANNOTATIONS, to_jsonl(&corpus.annotations))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn user(id: &str) -> User {
        User { id: id.into(), bio_text: String::new(), interests: vec![], network_stats: vec![0.0; 8] }
    }

    fn post(id: &str, author: &str) -> Post {
        Post {
            id: id.into(),
            title: "t".into(),
            body: "b".into(),
            ocr_text: None,
            author_id: author.into(),
            created_at: 10,
            violating: false,
            dense_features: vec![0.0; 8],
            feeling: None,
        }
    }

    fn comment(post: &str) -> Comment {
        Comment { post_id: post.into(), text: "nice".into(), author_id: "u1".into(), created_at: 11 }
    }

    fn write_files(dir: &Path, posts: &str, users: &str, comments: &str, events: &str) -> CorpusPaths {
        fs::write(dir.join(CorpusPaths::POSTS), posts).unwrap();
        fs::write(dir.join(CorpusPaths::USERS), users).unwrap();
        fs::write(dir.join(CorpusPaths::COMMENTS), comments).unwrap();
        fs::write(dir.join(CorpusPaths::EVENTS), events).unwrap();
        CorpusPaths::in_dir(dir)
    }

    #[test]
    fn empty_files_give_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_files(dir.path(), "", "", "", "");
        let corpus = load_corpus(&paths).unwrap();
        assert_eq!(corpus, Corpus::empty());
        assert!(corpus.posts().is_empty());
    }

    #[test]
    fn counts_are_preserved() {
        let corpus = Corpus::new(
            vec![post("p1", "u1"), post("p2", "u1")],
            vec![user("u1")],
            vec![comment("p1"), comment("p2"), comment("p2")],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(corpus.posts().len(), 2);
        assert_eq!(corpus.comments().len(), 3);
        assert_eq!(corpus.comments_of(1).count(), 2);
    }

    #[test]
    fn dangling_comment_is_rejected() {
        let err =
            Corpus::new(vec![post("p1", "u1")], vec![user("u1")], vec![comment("p9")], vec![], vec![]).unwrap_err();
        assert!(matches!(err, CorpusError::DanglingReference { kind: "post", .. }), "{err}");
    }

    #[test]
    fn duplicate_ids_and_bad_dims_are_rejected() {
        let err = Corpus::new(vec![post("p1", "u1"), post("p1", "u1")], vec![user("u1")], vec![], vec![], vec![])
            .unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { kind: "post", .. }));
        let mut short = post("p2", "u1");
        short.dense_features.pop();
        let err = Corpus::new(vec![post("p1", "u1"), short], vec![user("u1")], vec![], vec![], vec![]).unwrap_err();
        assert!(matches!(err, CorpusError::Invalid(_)));
    }

    #[test]
    fn event_repeats_need_distinct_timestamps() {
        let ev = |at| EngagementEvent { post_id: "p1".into(), user_id: "u1".into(), kind: EventKind::Like, at };
        let build = |events| Corpus::new(vec![post("p1", "u1")], vec![user("u1")], vec![], events, vec![]);
        assert!(build(vec![ev(20), ev(21)]).is_ok());
        assert!(build(vec![ev(20), ev(20)]).is_err());
    }

    #[test]
    fn annotation_selection_bounds() {
        let ann = |rater: &str, sel: &[Choice]| AnnotationRecord {
            post_id: "p1".into(),
            rater_id: rater.into(),
            selected: sel.iter().copied().collect(),
        };
        let build = |anns| Corpus::new(vec![post("p1", "u1")], vec![user("u1")], vec![], vec![], anns);
        let four = [
            Choice::Affect(Affect::Adoring),
            Choice::Affect(Affect::Excited),
            Choice::Affect(Affect::Informed),
            Choice::Other,
        ];
        assert!(build(vec![ann("r1", &four[..3])]).is_ok());
        assert!(build(vec![ann("r1", &four)]).is_err());
        assert!(build(vec![ann("r1", &[])]).is_err());
        assert!(build(vec![ann("r1", &four[..1]), ann("r1", &four[1..2])]).is_err());
    }

    #[test]
    fn malformed_line_reports_position_and_unknown_enums_fail() {
        let dir = tempfile::tempdir().unwrap();
        let users = "{\"id\":\"u1\",\"bio_text\":\"\",\"interests\":[],\"network_stats\":[]}\n";
        let posts = "{\"id\":\"p1\",\"title\":\"\",\"body\":\"\",\"author_id\":\"u1\",\"created_at\":1,\"dense_features\":[]}\n";
        let events = "{\"post_id\":\"p1\",\"user_id\":\"u1\",\"kind\":\"like\",\"at\":2}\n\
                      {\"post_id\":\"p1\",\"user_id\":\"u1\",\"kind\":\"poke\",\"at\":3}\n";
        let paths = write_files(dir.path(), posts, users, "", events);
        match load_corpus(&paths).unwrap_err() {
            CorpusError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }
}

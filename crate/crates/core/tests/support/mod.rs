//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use affect_signals::corpus::{Corpus, EngagementEvent, EventKind, Post, User};
use affect_signals::ranker::{DiversityConstraints, ScoredPost};
use proptest::prelude::*;

pub const DAY: i64 = 86_400;

/// Raw material for a small ranking corpus.
#[derive(Debug, Clone)]
pub struct FeedWorld {
    /// Interest tags per user, as indices into a three-tag vocabulary.
    pub users: Vec<Vec<u8>>,
    /// (author, created_at, violating)
    pub posts: Vec<(usize, i64, bool)>,
    /// (post, user, at)
    pub events: Vec<(usize, usize, i64)>,
}

const TAGS: [&str; 3] = ["music", "garden", "chess"];

impl FeedWorld {
    pub fn corpus(&self) -> Corpus {
        let users = self
            .users
            .iter()
            .enumerate()
            .map(|(i, tags)| User {
                id: format!("u{i}"),
                bio_text: String::new(),
                interests: tags.iter().map(|&t| TAGS[t as usize].to_string()).collect(),
                network_stats: vec![0.5; 2],
            })
            .collect();
        let posts = self
            .posts
            .iter()
            .enumerate()
            .map(|(i, &(author, at, violating))| Post {
                id: format!("p{i:03}"),
                title: String::new(),
                body: String::new(),
                ocr_text: None,
                author_id: format!("u{author}"),
                created_at: at,
                violating,
                dense_features: vec![0.0; 2],
                feeling: None,
            })
            .collect();
        let mut seen = BTreeSet::new();
        let events = self
            .events
            .iter()
            .filter(|e| seen.insert(**e))
            .map(|&(p, u, at)| EngagementEvent {
                post_id: format!("p{p:03}"),
                user_id: format!("u{u}"),
                kind: EventKind::Like,
                at,
            })
            .collect();
        Corpus::new(posts, users, vec![], events, vec![]).expect("generated corpus is valid")
    }
}

pub fn feed_world(max_posts: usize) -> impl Strategy<Value = FeedWorld> {
    (1usize..6, 0usize..=max_posts).prop_flat_map(|(n_users, n_posts)| {
        let users = prop::collection::vec(prop::collection::vec(0u8..3, 0..3), n_users);
        let posts = prop::collection::vec((0..n_users, 0i64..30 * DAY, prop::bool::weighted(0.2)), n_posts);
        let events = if n_posts == 0 {
            Just(vec![]).boxed()
        } else {
            prop::collection::vec((0..n_posts, 0..n_users, 0i64..40 * DAY), 0..3 * n_posts).boxed()
        };
        (users, posts, events).prop_map(|(users, posts, events)| FeedWorld { users, posts, events })
    })
}

pub fn diversity() -> impl Strategy<Value = DiversityConstraints> {
    (prop::option::of(1usize..4), prop::option::of(1usize..6))
        .prop_map(|(c, cap)| DiversityConstraints { max_consecutive_same_author: c, max_per_author: cap })
}

/// Integrity filter oracle.
pub fn filter_oracle(corpus: &Corpus, pool: &[String]) -> Vec<String> {
    pool.iter().filter(|id| !corpus.post(id).unwrap().violating).cloned().collect()
}

/// Recency with a half-life in days.
pub fn recency_oracle(corpus: &Corpus, post: &str, at: i64, half_life_days: f64) -> f64 {
    let age = (at - corpus.post(post).unwrap().created_at).max(0) as f64 / DAY as f64;
    0.5f64.powf(age / half_life_days)
}

/// Distinct users sharing an interest with `user` who have an event on
/// `post` before `at`, by scanning every event.
pub fn friends_oracle(corpus: &Corpus, post: &str, user: &str, at: i64) -> usize {
    let mine: BTreeSet<&String> = corpus.user(user).unwrap().interests.iter().collect();
    let mut friends = BTreeSet::new();
    for e in corpus.events() {
        if e.post_id != post || e.at >= at || e.user_id == user {
            continue;
        }
        let theirs = &corpus.user(&e.user_id).unwrap().interests;
        if theirs.iter().any(|t| mine.contains(t)) {
            friends.insert(e.user_id.clone());
        }
    }
    friends.len()
}

/// Reduction oracle: full sort by (score desc, id asc), then truncate.
pub fn reduce_oracle(corpus: &Corpus, pool: &[String], user: &str, at: i64, k: usize, half_life: f64) -> Vec<String> {
    let mut scored: Vec<(f64, String)> = pool
        .iter()
        .map(|id| (recency_oracle(corpus, id, at, half_life) + friends_oracle(corpus, id, user, at) as f64, id.clone()))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    scored.into_iter().take(k).map(|(_, id)| id).collect()
}

fn runs_ok(seq: &[&ScoredPost], c: usize) -> bool {
    seq.windows(c + 1).all(|w| w.iter().any(|p| p.author_id != w[0].author_id))
}

/// Every permutation of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Brute-force rerank: split off per-author overflow, then take the
/// lexicographically first (by input rank) permutation whose author runs
/// are all at most `c`; if none exists, keep input order. Returns the
/// ordered ids and whether the run limit was infeasible.
pub fn rerank_oracle(list: &[ScoredPost], d: &DiversityConstraints) -> (Vec<String>, bool) {
    let mut seen = std::collections::BTreeMap::<&str, usize>::new();
    let (mut main, mut overflow) = (Vec::new(), Vec::new());
    for p in list {
        let n = seen.entry(&p.author_id).or_default();
        *n += 1;
        if d.max_per_author.is_some_and(|cap| *n > cap) {
            overflow.push(p);
        } else {
            main.push(p);
        }
    }
    let mut infeasible = false;
    let ordered: Vec<&ScoredPost> = match d.max_consecutive_same_author {
        None => main.clone(),
        Some(c) => {
            let found = permutations(main.len()).into_iter().find(|perm| {
                let seq: Vec<&ScoredPost> = perm.iter().map(|&i| main[i]).collect();
                runs_ok(&seq, c)
            });
            match found {
                Some(perm) => perm.iter().map(|&i| main[i]).collect(),
                None => {
                    infeasible = true;
                    main.clone()
                }
            }
        }
    };
    let ids = ordered.iter().chain(overflow.iter()).map(|p| p.post_id.clone()).collect();
    (ids, infeasible)
}

/// Pearson r from raw sums, `None` for a constant side.
pub fn pearson_sums(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    if vx.abs() < 1e-12 || vy.abs() < 1e-12 {
        return None;
    }
    Some((n * sxy - sx * sy) / (vx * vy).sqrt())
}

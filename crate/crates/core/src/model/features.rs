use std::collections::HashMap;

use super::{ModelConfig, ModelError};
use crate::corpus::{Corpus, Post, User};
use crate::dataset::LabeledExample;
use crate::text::{fnv1a, tokenize};

/// Hashed tokens and dense features for one tower.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TowerInput {
    pub buckets: Vec<u32>,
    pub dense: Vec<f64>,
}

fn bucket(token: &str, hash_dim: usize) -> u32 {
    (fnv1a(token.as_bytes()) % hash_dim as u64) as u32
}

/// Dense vectors are zero-padded or truncated to `dim`.
fn fit(dense: &[f64], dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = dense.iter().take(dim).copied().collect();
    v.resize(dim, 0.0);
    v
}

/// Title, body and OCR tokens plus dense features. Uses nothing else from
/// the post, so the result is independent of any user.
pub fn content_input(post: &Post, hash_dim: usize, dense_dim: usize) -> TowerInput {
    let text = [post.title.as_str(), post.body.as_str(), post.ocr_text.as_deref().unwrap_or("")];
    let buckets = text.iter().flat_map(|t| tokenize(t)).map(|t| bucket(&t, hash_dim)).collect();
    TowerInput { buckets, dense: fit(&post.dense_features, dense_dim) }
}

/// Bio tokens and interest tags (hashed in their own namespace) plus
/// network statistics.
pub fn user_input(user: &User, hash_dim: usize, dense_dim: usize) -> TowerInput {
    let buckets = tokenize(&user.bio_text)
        .iter()
        .map(|t| bucket(t, hash_dim))
        .chain(user.interests.iter().map(|i| bucket(&format!("interest={i}"), hash_dim)))
        .collect();
    TowerInput { buckets, dense: fit(&user.network_stats, dense_dim) }
}

/// A featurized training row.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub content: TowerInput,
    pub user: TowerInput,
    pub labels: Vec<f64>,
}

/// Precomputed tower inputs for every post and user of a corpus.
#[derive(Debug, Clone)]
pub struct FeatureStore {
    posts: HashMap<String, TowerInput>,
    users: HashMap<String, TowerInput>,
}

impl FeatureStore {
    pub fn new(corpus: &Corpus, config: &ModelConfig) -> Self {
        let posts = corpus
            .posts()
            .iter()
            .map(|p| (p.id.clone(), content_input(p, config.content.hash_dim, config.content_dense_dim)))
            .collect();
        let users = corpus
            .users()
            .iter()
            .map(|u| (u.id.clone(), user_input(u, config.user.hash_dim, config.user_dense_dim)))
            .collect();
        Self { posts, users }
    }

    pub fn post(&self, id: &str) -> Option<&TowerInput> {
        self.posts.get(id)
    }

    pub fn user(&self, id: &str) -> Option<&TowerInput> {
        self.users.get(id)
    }

    pub fn examples(&self, rows: &[LabeledExample]) -> Result<Vec<Example>, ModelError> {
        rows.iter()
            .map(|r| {
                let content = self
                    .post(&r.post_id)
                    .ok_or_else(|| ModelError::UnknownId { kind: "post", id: r.post_id.clone() })?;
                let user = self
                    .user(&r.user_id)
                    .ok_or_else(|| ModelError::UnknownId { kind: "user", id: r.user_id.clone() })?;
                Ok(Example {
                    content: content.clone(),
                    user: user.clone(),
                    labels: r.labels.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
                })
            })
            .collect()
    }
}

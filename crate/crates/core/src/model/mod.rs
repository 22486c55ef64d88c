//! Two-tower multi-label affect model.
//!
//! Each tower hashes its text tokens into a learned embedding table, mean
//! pools them, appends the record's dense features and runs a tanh MLP. The
//! fused MLP emits one logit per prediction class. Gradients are derived by
//! hand and verified against central finite differences.

mod checkpoint;
mod features;
mod metrics;
mod network;
mod train;

use thiserror::Error;

pub use checkpoint::{load_model, read_embeddings, save_model, write_embeddings, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use features::{content_input, user_input, Example, FeatureStore, TowerInput};
pub use metrics::{auc_roc, per_class_auc};
pub use network::{ModelConfig, TowerConfig, TwoTowerModel};
pub use train::{
    grad_check, grad_check_against, loss_and_grad, mean_loss, train, EpochMetrics, GradCheckReport, Optimizer,
    TrainConfig, TrainReport,
};

use crate::corpus::Post;

/// Length of the exported content embedding.
pub const EMBEDDING_DIM: usize = 32;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("invalid training config: {0}")]
    InvalidTrainConfig(String),
    #[error("training set is empty")]
    EmptyDataset,
    #[error("unknown {kind} `{id}` in dataset row")]
    UnknownId { kind: &'static str, id: String },
    #[error("label vector has {got} entries, model has {expected} classes")]
    LabelWidth { got: usize, expected: usize },
    #[error("non-finite loss in epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One content embedding per post, in input order.
pub fn export_embedding(model: &TwoTowerModel, posts: &[Post]) -> Vec<(String, Vec<f64>)> {
    let c = model.config();
    posts
        .iter()
        .map(|p| (p.id.clone(), model.encode_content(&content_input(p, c.content.hash_dim, c.content_dense_dim))))
        .collect()
}

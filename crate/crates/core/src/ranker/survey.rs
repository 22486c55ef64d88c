use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{auc_loss_reduction, RankError};
use crate::corpus::{Corpus, SurveyResponse};
use crate::model::{auc_roc, EMBEDDING_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub use_embedding: bool,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        Self { iterations: 500, learning_rate: 0.5, l2: 0.0, use_embedding: false }
    }
}

/// Logistic regression on post dense features, user network stats and,
/// optionally, the post's exported embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyScorer {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub dense_dim: usize,
    pub stats_dim: usize,
    pub uses_embedding: bool,
}

/// Feature row for one (post, user) pair.
pub fn survey_features(
    corpus: &Corpus,
    embeddings: Option<&HashMap<String, Vec<f64>>>,
    post_id: &str,
    user_id: &str,
    use_embedding: bool,
) -> Result<Vec<f64>, RankError> {
    let post = corpus.post(post_id).ok_or_else(|| RankError::UnknownPost(post_id.into()))?;
    let user = corpus.user(user_id).ok_or_else(|| RankError::UnknownUser(user_id.into()))?;
    let mut x = post.dense_features.clone();
    x.extend_from_slice(&user.network_stats);
    if use_embedding {
        let e = embeddings.and_then(|m| m.get(post_id)).ok_or_else(|| RankError::MissingEmbedding(post_id.into()))?;
        x.extend_from_slice(e);
    }
    Ok(x)
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl SurveyScorer {
    pub fn logit(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).fold(self.bias, |acc, (w, v)| acc + w * v)
    }

    pub fn predict(
        &self,
        corpus: &Corpus,
        embeddings: Option<&HashMap<String, Vec<f64>>>,
        post_id: &str,
        user_id: &str,
    ) -> Result<f64, RankError> {
        let x = survey_features(corpus, embeddings, post_id, user_id, self.uses_embedding)?;
        Ok(sigmoid(self.logit(&x)))
    }

    /// Test AUC on labelled responses.
    pub fn auc(
        &self,
        corpus: &Corpus,
        embeddings: Option<&HashMap<String, Vec<f64>>>,
        responses: &[SurveyResponse],
    ) -> Result<f64, RankError> {
        let scores = responses
            .iter()
            .map(|r| {
                let x = survey_features(corpus, embeddings, &r.post_id, &r.user_id, self.uses_embedding)?;
                Ok(self.logit(&x))
            })
            .collect::<Result<Vec<_>, RankError>>()?;
        let labels: Vec<bool> = responses.iter().map(|r| r.answer).collect();
        auc_roc(&scores, &labels).ok_or(RankError::DegenerateSurvey)
    }

    /// Features ranked by absolute weight, largest first.
    pub fn importance(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> =
            self.feature_names.iter().cloned().zip(self.weights.iter().map(|w| w.abs())).collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }
}

/// Full-batch gradient descent from zero weights, so zero iterations gives
/// a constant scorer.
pub fn train_survey_scorer(
    corpus: &Corpus,
    responses: &[SurveyResponse],
    embeddings: Option<&HashMap<String, Vec<f64>>>,
    config: &ScorerConfig,
) -> Result<SurveyScorer, RankError> {
    let positives = responses.iter().filter(|r| r.answer).count();
    if positives == 0 || positives == responses.len() {
        return Err(RankError::DegenerateSurvey);
    }
    let xs = responses
        .iter()
        .map(|r| survey_features(corpus, embeddings, &r.post_id, &r.user_id, config.use_embedding))
        .collect::<Result<Vec<_>, _>>()?;
    let ys: Vec<f64> = responses.iter().map(|r| if r.answer { 1.0 } else { 0.0 }).collect();
    let dense_dim = corpus.posts().first().map_or(0, |p| p.dense_features.len());
    let stats_dim = corpus.users().first().map_or(0, |u| u.network_stats.len());
    let mut feature_names: Vec<String> = (0..dense_dim).map(|i| format!("dense{i}")).collect();
    feature_names.extend((0..stats_dim).map(|i| format!("stat{i}")));
    if config.use_embedding {
        feature_names.extend((0..EMBEDDING_DIM).map(|i| format!("e{i}")));
    }
    let dim = xs[0].len();
    if xs.iter().any(|x| x.len() != dim) || dim != feature_names.len() {
        return Err(RankError::Config(format!("feature rows do not all have {} columns", feature_names.len())));
    }
    let mut scorer = SurveyScorer {
        feature_names,
        weights: vec![0.0; dim],
        bias: 0.0,
        dense_dim,
        stats_dim,
        uses_embedding: config.use_embedding,
    };
    let n = xs.len() as f64;
    let mut gw = vec![0.0; dim];
    for _ in 0..config.iterations {
        gw.iter_mut().for_each(|g| *g = 0.0);
        let mut gb = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            let d = sigmoid(scorer.logit(x)) - y;
            gb += d;
            for (g, v) in gw.iter_mut().zip(x) {
                *g += d * v;
            }
        }
        for (w, g) in scorer.weights.iter_mut().zip(&gw) {
            *w -= config.learning_rate * (g / n + config.l2 * *w);
        }
        scorer.bias -= config.learning_rate * gb / n;
    }
    Ok(scorer)
}

/// Seeded 80/10/10 partition of survey responses.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveySplit {
    pub train: Vec<SurveyResponse>,
    pub validation: Vec<SurveyResponse>,
    pub test: Vec<SurveyResponse>,
}

impl SurveySplit {
    pub fn new(responses: &[SurveyResponse], seed: u64) -> Self {
        let mut rows = responses.to_vec();
        rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_train = (rows.len() as f64 * 0.8).round() as usize;
        let n_val = (rows.len() as f64 * 0.1).round() as usize;
        let test = rows.split_off(n_train + n_val);
        let validation = rows.split_off(n_train);
        Self { train: rows, validation, test }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub seed: u64,
    pub base_auc: f64,
    pub embedding_auc: f64,
    /// Percent of the baseline's AUC loss removed by adding the embedding.
    pub loss_reduction: f64,
    pub base_importance: Vec<(String, f64)>,
    pub embedding_importance: Vec<(String, f64)>,
}

/// Trains the scorer with and without the embedding on one seeded split and
/// compares test AUC.
pub fn ablate(
    corpus: &Corpus,
    responses: &[SurveyResponse],
    embeddings: &HashMap<String, Vec<f64>>,
    config: &ScorerConfig,
    seed: u64,
) -> Result<AblationResult, RankError> {
    let split = SurveySplit::new(responses, seed);
    if split.test.is_empty() {
        return Err(RankError::EmptySplit("test"));
    }
    let base = train_survey_scorer(corpus, &split.train, None, &ScorerConfig { use_embedding: false, ..*config })?;
    let with =
        train_survey_scorer(corpus, &split.train, Some(embeddings), &ScorerConfig { use_embedding: true, ..*config })?;
    let base_auc = base.auc(corpus, None, &split.test)?;
    let embedding_auc = with.auc(corpus, Some(embeddings), &split.test)?;
    Ok(AblationResult {
        seed,
        base_auc,
        embedding_auc,
        loss_reduction: auc_loss_reduction(embedding_auc, base_auc)?,
        base_importance: base.importance(),
        embedding_importance: with.importance(),
    })
}

//! Feed pipeline: integrity filter, candidate reduction, value scoring and
//! diversity reranking, plus the survey scorer used for ablations.

mod pipeline;
mod stages;
mod survey;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Post};
use crate::dataset::{ClassSet, PredictionClass, DAY};
use crate::model::{FeatureStore, TwoTowerModel};

pub use pipeline::{run_feed, FeedAudit, FeedRequest, FeedResult, PipelineConfig, PredictorSpec};
pub use stages::{
    integrity_filter, light_score, longest_author_run, reduce_candidates, rerank_diversity, value_score,
    DiversityConstraints, RerankOutcome, ScoreTerm, ScoredPost, ValueScore,
};
pub use survey::{
    ablate, survey_features, train_survey_scorer, AblationResult, ScorerConfig, SurveyScorer, SurveySplit,
};

#[derive(Debug, thiserror::Error)]
pub enum RankError {
    #[error("unknown post `{0}`")]
    UnknownPost(String),
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error("predictor `{predictor}` returned a non-finite value for post `{post}`")]
    NonFinitePrediction { predictor: String, post: String },
    #[error("{predictors} predictors but {weights} weights")]
    WeightCount { predictors: usize, weights: usize },
    #[error("predictor `{predictor}` needs {needs}, which was not supplied")]
    MissingInput { predictor: String, needs: &'static str },
    #[error("predictor `{predictor}`: unknown class `{class}`")]
    UnknownClass { predictor: String, class: String },
    #[error("no embedding for post `{0}`")]
    MissingEmbedding(String),
    #[error("survey responses contain a single class")]
    DegenerateSurvey,
    #[error("survey split `{0}` is empty")]
    EmptySplit(&'static str),
    #[error("invalid AUC value {0}; expected a number in [0, 1]")]
    InvalidAuc(f64),
    #[error("baseline AUC is 1; loss reduction is undefined")]
    PerfectBaseline,
    #[error("invalid pipeline config: {0}")]
    Config(String),
}

/// Percentage of the baseline's AUC loss `1 - s_base` removed by `s_new`.
pub fn auc_loss_reduction(s_new: f64, s_base: f64) -> Result<f64, RankError> {
    for s in [s_new, s_base] {
        if !(0.0..=1.0).contains(&s) {
            return Err(RankError::InvalidAuc(s));
        }
    }
    if s_base == 1.0 {
        return Err(RankError::PerfectBaseline);
    }
    Ok((s_new - s_base) / (1.0 - s_base) * 100.0)
}

/// A scoring function of (post, user, time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictorKind {
    /// Probability of one model output class, named as in the class set.
    EngagementModel { class: String },
    /// `0.5 ^ (age / half_life)`; uses the context half-life when absent.
    Recency {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        half_life_days: Option<f64>,
    },
    /// Distinct friends who engaged with the post before the request time.
    FriendEngagement,
    /// Survey scorer probability.
    SurveyModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictor {
    pub id: String,
    #[serde(flatten)]
    pub kind: PredictorKind,
}

impl Predictor {
    pub fn new(id: impl Into<String>, kind: PredictorKind) -> Self {
        Self { id: id.into(), kind }
    }

    pub fn evaluate(&self, ctx: &RankContext, post_id: &str, user_id: &str, at: i64) -> Result<f64, RankError> {
        let missing = |needs| RankError::MissingInput { predictor: self.id.clone(), needs };
        match &self.kind {
            PredictorKind::EngagementModel { class } => {
                let (model, features) = ctx.model.ok_or_else(|| missing("a model"))?;
                let unknown = || RankError::UnknownClass { predictor: self.id.clone(), class: class.clone() };
                let k = class
                    .parse::<PredictionClass>()
                    .ok()
                    .and_then(|c| ctx.classes.index_of(c))
                    .filter(|&k| k < model.config().n_classes)
                    .ok_or_else(unknown)?;
                let content = features.post(post_id).ok_or_else(|| RankError::UnknownPost(post_id.into()))?;
                let user = features.user(user_id).ok_or_else(|| RankError::UnknownUser(user_id.into()))?;
                Ok(model.predict(content, user)[k])
            }
            PredictorKind::Recency { half_life_days } => {
                ctx.recency_with(post_id, at, half_life_days.unwrap_or(ctx.half_life_days))
            }
            PredictorKind::FriendEngagement => Ok(ctx.friend_engagement(post_id, user_id, at)? as f64),
            PredictorKind::SurveyModel => {
                let scorer = ctx.scorer.ok_or_else(|| missing("a survey scorer"))?;
                scorer.predict(ctx.corpus, ctx.embeddings, post_id, user_id)
            }
        }
    }
}

/// Everything the stages and predictors read.
pub struct RankContext<'a> {
    pub corpus: &'a Corpus,
    pub classes: ClassSet,
    pub model: Option<(&'a TwoTowerModel, &'a FeatureStore)>,
    pub scorer: Option<&'a SurveyScorer>,
    pub embeddings: Option<&'a HashMap<String, Vec<f64>>>,
    pub half_life_days: f64,
    interests: HashMap<&'a str, BTreeSet<&'a str>>,
}

impl<'a> RankContext<'a> {
    pub fn new(corpus: &'a Corpus) -> Self {
        let interests =
            corpus.users().iter().map(|u| (u.id.as_str(), u.interests.iter().map(String::as_str).collect())).collect();
        Self {
            corpus,
            classes: ClassSet::default(),
            model: None,
            scorer: None,
            embeddings: None,
            half_life_days: 7.0,
            interests,
        }
    }

    pub fn with_model(mut self, model: &'a TwoTowerModel, features: &'a FeatureStore, classes: ClassSet) -> Self {
        self.model = Some((model, features));
        self.classes = classes;
        self
    }

    pub fn with_scorer(mut self, scorer: &'a SurveyScorer, embeddings: Option<&'a HashMap<String, Vec<f64>>>) -> Self {
        self.scorer = Some(scorer);
        self.embeddings = embeddings;
        self
    }

    pub fn post(&self, id: &str) -> Result<&'a Post, RankError> {
        self.corpus.post(id).ok_or_else(|| RankError::UnknownPost(id.into()))
    }

    pub fn recency(&self, post_id: &str, at: i64) -> Result<f64, RankError> {
        self.recency_with(post_id, at, self.half_life_days)
    }

    /// Halves every `half_life_days`; posts from the future count as fresh.
    pub fn recency_with(&self, post_id: &str, at: i64, half_life_days: f64) -> Result<f64, RankError> {
        let age_days = (at - self.post(post_id)?.created_at).max(0) as f64 / DAY as f64;
        Ok(0.5f64.powf(age_days / half_life_days))
    }

    /// Whether two distinct users share an interest tag.
    pub fn are_friends(&self, a: &str, b: &str) -> bool {
        match (self.interests.get(a), self.interests.get(b)) {
            (Some(x), Some(y)) => a != b && !x.is_disjoint(y),
            _ => false,
        }
    }

    /// Distinct friends of `user_id` with an event on the post strictly before `at`.
    pub fn friend_engagement(&self, post_id: &str, user_id: &str, at: i64) -> Result<usize, RankError> {
        if !self.interests.contains_key(user_id) {
            return Err(RankError::UnknownUser(user_id.into()));
        }
        let pos = self.corpus.post_position(post_id).ok_or_else(|| RankError::UnknownPost(post_id.into()))?;
        let friends: BTreeSet<&str> = self
            .corpus
            .events_of(pos)
            .filter(|e| e.at < at && self.are_friends(user_id, &e.user_id))
            .map(|e| e.user_id.as_str())
            .collect();
        Ok(friends.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_reduction_values() {
        assert!((auc_loss_reduction(0.84, 0.80).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(auc_loss_reduction(0.80, 0.80).unwrap(), 0.0);
        assert!(matches!(auc_loss_reduction(0.9, 1.0), Err(RankError::PerfectBaseline)));
        assert!(matches!(auc_loss_reduction(1.2, 0.5), Err(RankError::InvalidAuc(_))));
        assert!(matches!(auc_loss_reduction(0.7, f64::NAN), Err(RankError::InvalidAuc(_))));
    }
}

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{
    integrity_filter, reduce_candidates, rerank_diversity, value_score, DiversityConstraints, Predictor, PredictorKind,
    RankContext, RankError, ScoredPost, ValueScore,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub id: String,
    pub weight: f64,
    #[serde(flatten)]
    pub kind: PredictorKind,
}

/// Stage parameters, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Candidates kept by the reduction stage.
    pub k: usize,
    #[serde(default = "default_half_life")]
    pub half_life_days: f64,
    pub predictors: Vec<PredictorSpec>,
    #[serde(default)]
    pub diversity: DiversityConstraints,
}

fn default_half_life() -> f64 {
    7.0
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, RankError> {
        let config: Self = toml::from_str(text).map_err(|e| RankError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("pipeline config serializes")
    }

    pub fn validate(&self) -> Result<(), RankError> {
        let bad = |m: String| Err(RankError::Config(m));
        if !(self.half_life_days.is_finite() && self.half_life_days > 0.0) {
            return bad(format!("half_life_days must be positive, got {}", self.half_life_days));
        }
        let mut ids = BTreeSet::new();
        for p in &self.predictors {
            if !ids.insert(p.id.as_str()) {
                return bad(format!("duplicate predictor id `{}`", p.id));
            }
            if !p.weight.is_finite() {
                return bad(format!("predictor `{}` has a non-finite weight", p.id));
            }
            if let PredictorKind::Recency { half_life_days: Some(h) } = p.kind {
                if !(h.is_finite() && h > 0.0) {
                    return bad(format!("predictor `{}` has a non-positive half-life", p.id));
                }
            }
        }
        if self.diversity.max_consecutive_same_author == Some(0) || self.diversity.max_per_author == Some(0) {
            return bad("diversity limits must be at least 1".into());
        }
        Ok(())
    }

    pub fn predictors(&self) -> (Vec<Predictor>, Vec<f64>) {
        self.predictors.iter().map(|p| (Predictor::new(p.id.clone(), p.kind.clone()), p.weight)).unzip()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedRequest {
    pub user_id: String,
    pub at: i64,
    pub pool: Vec<String>,
}

/// What each stage did, in stage order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedAudit {
    pub pool_size: usize,
    pub removed: Vec<String>,
    pub reduced: Vec<String>,
    /// Value scores in the order the reranker received them.
    pub scores: Vec<ValueScore>,
    pub rerank_infeasible: bool,
    pub capped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedResult {
    pub user_id: String,
    pub at: i64,
    pub posts: Vec<String>,
    pub audit: FeedAudit,
}

/// Filter, reduce, score and rerank one request.
pub fn run_feed(ctx: &RankContext, request: &FeedRequest, config: &PipelineConfig) -> Result<FeedResult, RankError> {
    if ctx.corpus.user(&request.user_id).is_none() {
        return Err(RankError::UnknownUser(request.user_id.clone()));
    }
    let (kept, removed) = integrity_filter(ctx, &request.pool)?;
    let reduced = reduce_candidates(ctx, &kept, &request.user_id, request.at, config.k)?;
    let (predictors, weights) = config.predictors();
    let mut scores = reduced
        .iter()
        .map(|id| value_score(ctx, id, &request.user_id, request.at, &predictors, &weights))
        .collect::<Result<Vec<_>, _>>()?;
    scores.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.post_id.cmp(&b.post_id)));
    let scored = scores
        .iter()
        .map(|v| {
            Ok(ScoredPost {
                post_id: v.post_id.clone(),
                author_id: ctx.post(&v.post_id)?.author_id.clone(),
                score: v.score,
            })
        })
        .collect::<Result<Vec<_>, RankError>>()?;
    let outcome = rerank_diversity(&scored, &config.diversity);
    Ok(FeedResult {
        user_id: request.user_id.clone(),
        at: request.at,
        posts: outcome.posts.into_iter().map(|p| p.post_id).collect(),
        audit: FeedAudit {
            pool_size: request.pool.len(),
            removed,
            reduced,
            scores,
            rerank_infeasible: outcome.infeasible,
            capped: outcome.capped,
        },
    })
}

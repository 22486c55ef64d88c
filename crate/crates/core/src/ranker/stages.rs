use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Predictor, RankContext, RankError};

/// Pool minus violating posts, order preserved. Returns (kept, removed).
pub fn integrity_filter(ctx: &RankContext, pool: &[String]) -> Result<(Vec<String>, Vec<String>), RankError> {
    let mut kept = Vec::with_capacity(pool.len());
    let mut removed = Vec::new();
    for id in pool {
        if ctx.post(id)?.violating {
            removed.push(id.clone());
        } else {
            kept.push(id.clone());
        }
    }
    Ok((kept, removed))
}

/// Lightweight score: recency in (0, 1] plus the friend-engagement count.
pub fn light_score(ctx: &RankContext, post_id: &str, user_id: &str, at: i64) -> Result<f64, RankError> {
    Ok(ctx.recency(post_id, at)? + ctx.friend_engagement(post_id, user_id, at)? as f64)
}

/// Top `k` posts by lightweight score, ties broken by post id ascending.
pub fn reduce_candidates(
    ctx: &RankContext,
    pool: &[String],
    user_id: &str,
    at: i64,
    k: usize,
) -> Result<Vec<String>, RankError> {
    let mut scored = pool
        .iter()
        .map(|id| Ok((light_score(ctx, id, user_id, at)?, id.clone())))
        .collect::<Result<Vec<_>, RankError>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    scored.truncate(k);
    Ok(scored.into_iter().map(|(_, id)| id).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTerm {
    pub predictor: String,
    pub weight: f64,
    pub prediction: f64,
}

/// A value score with its audit trail. `score` is the left-to-right sum of
/// `weight * prediction` over `terms`, so re-summing reproduces it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueScore {
    pub post_id: String,
    pub user_id: String,
    pub at: i64,
    pub score: f64,
    pub terms: Vec<ScoreTerm>,
}

impl ValueScore {
    pub fn resum(&self) -> f64 {
        self.terms.iter().fold(0.0, |acc, t| acc + t.weight * t.prediction)
    }
}

/// Weighted linear sum of predictor outputs.
pub fn value_score(
    ctx: &RankContext,
    post_id: &str,
    user_id: &str,
    at: i64,
    predictors: &[Predictor],
    weights: &[f64],
) -> Result<ValueScore, RankError> {
    if predictors.len() != weights.len() {
        return Err(RankError::WeightCount { predictors: predictors.len(), weights: weights.len() });
    }
    let mut terms = Vec::with_capacity(predictors.len());
    for (p, &w) in predictors.iter().zip(weights) {
        let prediction = p.evaluate(ctx, post_id, user_id, at)?;
        if !prediction.is_finite() {
            return Err(RankError::NonFinitePrediction { predictor: p.id.clone(), post: post_id.to_string() });
        }
        terms.push(ScoreTerm { predictor: p.id.clone(), weight: w, prediction });
    }
    let mut v = ValueScore { post_id: post_id.into(), user_id: user_id.into(), at, score: 0.0, terms };
    v.score = v.resum();
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiversityConstraints {
    /// Longest allowed run of one author.
    pub max_consecutive_same_author: Option<usize>,
    /// Posts per author beyond this go to the end of the feed.
    pub max_per_author: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPost {
    pub post_id: String,
    pub author_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankOutcome {
    pub posts: Vec<ScoredPost>,
    /// The run constraint could not be met; the tail is in score order.
    pub infeasible: bool,
    /// Posts over the per-author cap, appended at the end.
    pub capped: Vec<String>,
}

/// Whether the remaining counts can be arranged with runs of at most `c`,
/// given the author and run length currently ending the feed. An author
/// with `m` posts needs `m <= c * (others + 1)`, less the room the trailing
/// run has already used when it is that author.
fn feasible(counts: &BTreeMap<&str, usize>, trailing: Option<(&str, usize)>, c: usize) -> bool {
    let total: usize = counts.values().sum();
    counts.iter().all(|(&author, &m)| {
        let others = total - m;
        match trailing {
            Some((t, run)) if t == author => m <= c * others + (c - run.min(c)),
            _ => m <= c * (others + 1),
        }
    })
}

/// Greedy diversity pass over a score-ordered list. Each slot takes the
/// highest-scored remaining post whose placement keeps the rest arrangeable.
/// Output is a permutation of the input.
pub fn rerank_diversity(scored: &[ScoredPost], constraints: &DiversityConstraints) -> RerankOutcome {
    let mut per_author: BTreeMap<&str, usize> = BTreeMap::new();
    let mut main = Vec::with_capacity(scored.len());
    let mut overflow = Vec::new();
    for p in scored {
        let n = per_author.entry(p.author_id.as_str()).or_default();
        *n += 1;
        if constraints.max_per_author.is_some_and(|cap| *n > cap) {
            overflow.push(p.clone());
        } else {
            main.push(p.clone());
        }
    }
    let capped: Vec<String> = overflow.iter().map(|p| p.post_id.clone()).collect();

    let Some(c) = constraints.max_consecutive_same_author.filter(|&c| c > 0) else {
        main.extend(overflow);
        return RerankOutcome { posts: main, infeasible: false, capped };
    };
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &main {
        *counts.entry(p.author_id.as_str()).or_default() += 1;
    }
    let mut remaining: Vec<&ScoredPost> = main.iter().collect();
    let mut out: Vec<ScoredPost> = Vec::with_capacity(scored.len());
    let mut trailing: Option<(&str, usize)> = None;
    let mut infeasible = false;
    while !remaining.is_empty() {
        let pick = remaining.iter().position(|p| {
            let a = p.author_id.as_str();
            let run = match trailing {
                Some((t, r)) if t == a => r + 1,
                _ => 1,
            };
            if run > c {
                return false;
            }
            let mut rest = counts.clone();
            let m = rest.get_mut(a).expect("counted");
            *m -= 1;
            if *m == 0 {
                rest.remove(a);
            }
            feasible(&rest, Some((a, run)), c)
        });
        let Some(i) = pick else {
            infeasible = true;
            out.extend(remaining.drain(..).cloned());
            break;
        };
        let p = remaining.remove(i);
        let a = p.author_id.as_str();
        trailing = Some(match trailing {
            Some((t, r)) if t == a => (a, r + 1),
            _ => (a, 1),
        });
        let m = counts.get_mut(a).expect("counted");
        *m -= 1;
        if *m == 0 {
            counts.remove(a);
        }
        out.push(p.clone());
    }
    out.extend(overflow);
    RerankOutcome { posts: out, infeasible, capped }
}

/// Longest run of consecutive posts by one author.
pub fn longest_author_run(posts: &[ScoredPost]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for (i, p) in posts.iter().enumerate() {
        run = if i > 0 && posts[i - 1].author_id == p.author_id { run + 1 } else { 1 };
        best = best.max(run);
    }
    best
}

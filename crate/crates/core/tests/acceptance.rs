//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always print.

mod support;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use affect_signals::analysis::{
    care_agreement, interrater_correlation, pearson_matrix, LabelTable, RaterMatrix, Threshold,
};
use affect_signals::care::{
    label_corpus, match_tokens, run_care, CareLabel, ChangelogEntry, Lexicon, PatternSet, PostLabels, StopCondition,
    Thresholds,
};
use affect_signals::cli::grad_check_config;
use affect_signals::corpus::{
    synth_corpus, synth_survey, Affect, AnnotationRecord, Choice, Corpus, GroundTruth, SynthConfig,
};
use affect_signals::dataset::{build_dataset, DatasetConfig, Split, SplitDataset};
use affect_signals::model::{
    content_input, export_embedding, grad_check, grad_check_against, loss_and_grad, per_class_auc, train, user_input,
    Example, FeatureStore, ModelConfig, TrainConfig, TwoTowerModel,
};
use affect_signals::ranker::{
    ablate, auc_loss_reduction, integrity_filter, reduce_candidates, rerank_diversity, run_feed, value_score,
    FeedRequest, PipelineConfig, PredictorKind, PredictorSpec, RankContext, RankError, ScoredPost, ScorerConfig,
};
use affect_signals::text::tokenize;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn big_corpus() -> (Corpus, GroundTruth) {
    synth_corpus(1, &SynthConfig { n_posts: 10_000, n_users: 2000, ..SynthConfig::default() }).unwrap()
}

fn care_precision() -> Verdict {
    let (corpus, truth) = big_corpus();
    let start = Instant::now();
    let run =
        run_care(&corpus, &PatternSet::seed(), &Lexicon::seed(), &Thresholds::default(), &StopCondition::default())
            .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (mut correct, mut total) = (0usize, 0usize);
    for (post, labels) in &run.labels {
        let planted = truth.affects_of(post).cloned().unwrap_or_default();
        for label in labels {
            total += 1;
            correct += usize::from(planted.iter().any(|a| label.covers(*a)));
        }
    }
    let precision = correct as f64 / total as f64;
    check(
        total > 0 && precision >= 0.95 && elapsed < Duration::from_secs(30),
        format!("precision {precision:.4} over {total} labels, {:.2}s", elapsed.as_secs_f64()),
    )
}

/// Per-label n-gram counts recomputed by scanning every comment window.
fn recount(
    corpus: &Corpus,
    labels: &PostLabels,
    patterns: &PatternSet,
    lexicon: &Lexicon,
    gram: &str,
) -> BTreeMap<CareLabel, u64> {
    let needle: Vec<&str> = gram.split(' ').collect();
    let mut out = BTreeMap::new();
    for (i, post) in corpus.posts().iter().enumerate() {
        let Some(post_labels) = labels.get(&post.id) else { continue };
        let mut n = 0u64;
        for c in corpus.comments_of(i) {
            let tokens = tokenize(&c.text);
            if !match_tokens(&tokens, patterns, lexicon).is_empty() {
                continue;
            }
            let mut literal = vec![false; tokens.len()];
            for p in patterns.iter() {
                for m in p.find_matches(&tokens) {
                    (m.start..m.end).filter(|&j| j != m.keyword).for_each(|j| literal[j] = true);
                }
            }
            for s in 0..tokens.len() {
                let e = s + needle.len();
                if e <= tokens.len()
                    && tokens[s..e].iter().zip(&needle).all(|(a, b)| a == b)
                    && !literal[s..e].contains(&true)
                {
                    n += 1;
                }
            }
        }
        if n > 0 {
            for l in post_labels {
                *out.entry(*l).or_default() += n;
            }
        }
    }
    out
}

fn bootstrap_recovery() -> Verdict {
    let (corpus, truth) = big_corpus();
    if truth.held_out_keywords.values().any(|k| k.len() < 5) {
        return Err("fewer than 5 held-out keywords for some affect".into());
    }
    let thresholds = Thresholds::default();
    let stop = StopCondition { max_iters: 2, target_labels: None };
    let run =
        run_care(&corpus, &PatternSet::seed(), &Lexicon::seed(), &thresholds, &stop).map_err(|e| e.to_string())?;
    let (mut hit, mut total) = (0, 0);
    for (affect, words) in &truth.held_out_keywords {
        for w in words {
            total += 1;
            hit += usize::from(run.lexicon.get(w).is_some_and(|l| l.contains(&CareLabel::from_affect(*affect))));
        }
    }
    let rate = hit as f64 / total as f64;

    // State entering each iteration, rebuilt from shorter runs.
    let mut mismatches = 0;
    let mut checked = 0;
    let by_iter: BTreeMap<usize, Vec<&ChangelogEntry>> = run.changelog.iter().fold(BTreeMap::new(), |mut m, e| {
        m.entry(e.iteration).or_insert_with(Vec::new).push(e);
        m
    });
    for (&iteration, entries) in &by_iter {
        let (labels, patterns, lexicon) = if iteration == 1 {
            let (p, l) = (PatternSet::seed(), Lexicon::seed());
            (label_corpus(&corpus, &p, &l, thresholds.min_support), p, l)
        } else {
            let prev = run_care(
                &corpus,
                &PatternSet::seed(),
                &Lexicon::seed(),
                &thresholds,
                &StopCondition { max_iters: iteration - 1, target_labels: None },
            )
            .map_err(|e| e.to_string())?;
            (prev.labels, prev.patterns, prev.lexicon)
        };
        for e in entries {
            checked += 1;
            if recount(&corpus, &labels, &patterns, &lexicon, &e.ngram) != e.evidence {
                mismatches += 1;
            }
        }
    }
    check(
        rate >= 0.8 && mismatches == 0 && checked > 0,
        format!("{hit}/{total} held-out keywords recovered ({:.0}%), {checked} changelog entries recounted, {mismatches} mismatches", rate * 100.0),
    )
}

fn table2_semantics() -> Verdict {
    let affects = [Affect::Informed, Affect::Excited, Affect::Saddened, Affect::DestructivelyAngered, Affect::Touched];
    let mut exact = Vec::new();
    let mut annotations = Vec::new();
    let mut same = PostLabels::new();
    let mut disjoint = PostLabels::new();
    for (i, &a) in affects.iter().enumerate() {
        let post = format!("p{i}");
        let b = affects[(i + 1) % affects.len()];
        for r in 0..5 {
            // three raters agree on `a`, two pick Other
            let chosen: Vec<Choice> = if r < 3 { vec![Choice::Affect(a)] } else { vec![Choice::Other] };
            exact.push(AnnotationRecord {
                post_id: post.clone(),
                rater_id: format!("r{r}"),
                selected: chosen.iter().copied().collect(),
            });
            let noisy = if r == 0 { vec![Choice::Affect(a), Choice::Affect(b)] } else { chosen };
            annotations.push(AnnotationRecord {
                post_id: post.clone(),
                rater_id: format!("r{r}"),
                selected: noisy.into_iter().collect(),
            });
        }
        same.insert(post.clone(), [CareLabel::from_affect(a)].into());
        disjoint.insert(post, [CareLabel::Affect(Affect::Grateful)].into());
    }
    let rows = care_agreement(&exact, &same, &Threshold::STANDARD);
    let identical = rows.iter().all(|r| r.any == 100.0 && r.all == 100.0 && r.n_posts == affects.len());
    let rows_disjoint = care_agreement(&annotations, &disjoint, &Threshold::STANDARD);
    let zero = rows_disjoint.iter().all(|r| r.any == 0.0);
    let summary: Vec<String> = rows.iter().map(|r| format!("{} any {} all {}", r.threshold, r.any, r.all)).collect();
    check(identical && zero, format!("identical: {}; disjoint any = 0: {zero}", summary.join(", ")))
}

fn grad_batch(seed: u64) -> (TwoTowerModel, Vec<Example>) {
    let (corpus, _) = synth_corpus(seed, &SynthConfig { n_posts: 8, n_users: 40, ..SynthConfig::default() }).unwrap();
    let config = grad_check_config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batch = corpus
        .posts()
        .iter()
        .zip(corpus.users().iter().cycle())
        .map(|(p, u)| Example {
            content: content_input(p, config.content.hash_dim, config.content_dense_dim),
            user: user_input(u, config.user.hash_dim, config.user_dense_dim),
            labels: (0..config.n_classes).map(|_| f64::from(rng.gen_bool(0.3))).collect(),
        })
        .collect();
    (TwoTowerModel::new(config, seed), batch)
}

fn gradient_correctness() -> Verdict {
    let config = grad_check_config();
    let two_layers = config.content.hidden.len() + 1 == 2 && config.user.hidden.len() + 1 == 2;
    let (model, batch) = grad_batch(4);
    let clean = grad_check(&model, &batch, 1e-5);
    let (_, mut g) = loss_and_grad(&model, &batch);
    let i = (0..g.len()).max_by(|&a, &b| g[a].abs().total_cmp(&g[b].abs())).unwrap();
    g[i] *= 1.5;
    let corrupt = grad_check_against(&model, &batch, 1e-5, &g);
    check(
        two_layers && batch.len() == 8 && clean.max_relative_error < 1e-4 && corrupt.max_relative_error > 1e-2,
        format!(
            "clean {:.2e} over {} params, corrupted {:.2e}",
            clean.max_relative_error, clean.checked, corrupt.max_relative_error
        ),
    )
}

fn examples(features: &FeatureStore, data: &SplitDataset, split: Split) -> Vec<Example> {
    features.examples(data.split(split)).unwrap()
}

fn fit_and_score(corpus: &Corpus, data: &SplitDataset) -> Vec<f64> {
    let config = ModelConfig { n_classes: data.classes.len(), ..ModelConfig::default() };
    let features = FeatureStore::new(corpus, &config);
    let mut model = TwoTowerModel::new(config, 1);
    train(
        &mut model,
        &examples(&features, data, Split::Train),
        &examples(&features, data, Split::Validation),
        &TrainConfig::default(),
    )
    .unwrap();
    per_class_auc(&model, &examples(&features, data, Split::Test)).into_iter().map(|a| a.unwrap_or(f64::NAN)).collect()
}

fn model_learns() -> Verdict {
    let start = Instant::now();
    let (corpus, _) = big_corpus();
    let run =
        run_care(&corpus, &PatternSet::seed(), &Lexicon::seed(), &Thresholds::default(), &StopCondition::default())
            .map_err(|e| e.to_string())?;
    let config = DatasetConfig { per_class_n: 2000, seed: 1, ..DatasetConfig::default() };
    let data = build_dataset(&corpus, Some(&run.labels), &config).map_err(|e| e.to_string())?;
    let train_config = TrainConfig::default();
    let recipe = train_config.epochs == 3 && train_config.learning_rate == 0.0007 && data.classes.len() == 23;
    let aucs = fit_and_score(&corpus, &data);
    let min = aucs.iter().copied().fold(f64::INFINITY, f64::min);

    // Same rows with label vectors permuted across all splits.
    let mut shuffled = data.clone();
    let mut labels: Vec<Vec<bool>> =
        shuffled.iter_splits().flat_map(|(_, rows)| rows.iter().map(|r| r.labels.clone())).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(99));
    let mut it = labels.into_iter();
    for split in Split::ALL {
        for row in shuffled.split_mut(split).iter_mut() {
            row.labels = it.next().unwrap();
        }
    }
    let null = fit_and_score(&corpus, &shuffled);
    let worst_null = null.iter().map(|a| (a - 0.5).abs()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    check(
        recipe && min >= 0.9 && worst_null <= 0.05 && elapsed < Duration::from_secs(300),
        format!(
            "min per-class test AUC {min:.4} over {} classes; shuffled labels max |AUC - 0.5| {worst_null:.4}; {:.1}s",
            aucs.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn ablation_direction() -> Verdict {
    let (corpus, truth) =
        synth_corpus(1, &SynthConfig { n_posts: 3000, n_users: 600, ..SynthConfig::default() }).unwrap();
    let run =
        run_care(&corpus, &PatternSet::seed(), &Lexicon::seed(), &Thresholds::default(), &StopCondition::default())
            .map_err(|e| e.to_string())?;
    let data =
        build_dataset(&corpus, Some(&run.labels), &DatasetConfig { per_class_n: 500, ..DatasetConfig::default() })
            .map_err(|e| e.to_string())?;
    let config = ModelConfig::default();
    let features = FeatureStore::new(&corpus, &config);
    let mut model = TwoTowerModel::new(config, 1);
    train(
        &mut model,
        &examples(&features, &data, Split::Train),
        &examples(&features, &data, Split::Validation),
        &TrainConfig::default(),
    )
    .unwrap();
    let embeddings: HashMap<String, Vec<f64>> = export_embedding(&model, corpus.posts()).into_iter().collect();
    let dim_ok = embeddings.values().all(|e| e.len() == 32);
    let survey = synth_survey(&corpus, &truth, 7, 4000);
    let mut parts = Vec::new();
    let mut ok = dim_ok;
    for seed in 0..3 {
        let r = ablate(&corpus, &survey, &embeddings, &ScorerConfig::default(), seed).map_err(|e| e.to_string())?;
        ok &= r.loss_reduction > 0.0;
        parts.push(format!("seed {seed}: {:.4} -> {:.4} ({:+.2}%)", r.base_auc, r.embedding_auc, r.loss_reduction));
    }
    check(ok, parts.join("; "))
}

fn formula_exactness() -> Verdict {
    let a = auc_loss_reduction(0.84, 0.80).map_err(|e| e.to_string())?;
    let b = auc_loss_reduction(0.80, 0.80).map_err(|e| e.to_string())?;
    let c = auc_loss_reduction(0.9, 1.0);
    check(
        (a - 20.0).abs() < 1e-9 && b == 0.0 && matches!(c, Err(RankError::PerfectBaseline)),
        format!(
            "(0.84, 0.80) -> {a}; (0.80, 0.80) -> {b}; s_base = 1 -> {}",
            c.map_or_else(|e| e.to_string(), |v| v.to_string())
        ),
    )
}

fn pipeline_config(k: usize, w: (f64, f64), diversity: affect_signals::ranker::DiversityConstraints) -> PipelineConfig {
    PipelineConfig {
        k,
        half_life_days: 7.0,
        predictors: vec![
            PredictorSpec { id: "recency".into(), weight: w.0, kind: PredictorKind::Recency { half_life_days: None } },
            PredictorSpec { id: "friends".into(), weight: w.1, kind: PredictorKind::FriendEngagement },
        ],
        diversity,
    }
}

fn pipeline_invariants() -> Verdict {
    let cases = 1000;
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    let strategy = (
        feed_world(200),
        0usize..60,
        -3.0f64..3.0,
        -3.0f64..3.0,
        diversity(),
        0i64..45 * DAY,
        any::<prop::sample::Index>(),
    );
    let feed = runner.run(&strategy, |(world, k, a, b, d, at, user)| {
        let corpus = world.corpus();
        let ctx = RankContext::new(&corpus);
        let user = corpus.users()[user.index(corpus.users().len())].id.clone();
        let pool: Vec<String> = corpus.posts().iter().map(|p| p.id.clone()).collect();
        let config = pipeline_config(k, (a, b), d);
        let out = run_feed(&ctx, &FeedRequest { user_id: user.clone(), at, pool: pool.clone() }, &config).unwrap();

        prop_assert!(out.posts.iter().all(|id| !corpus.post(id).unwrap().violating));
        prop_assert!(out.posts.len() <= k);

        let kept = filter_oracle(&corpus, &pool);
        prop_assert_eq!(&integrity_filter(&ctx, &pool).unwrap().0, &kept);
        let reduced = reduce_oracle(&corpus, &kept, &user, at, k, 7.0);
        prop_assert_eq!(&out.audit.reduced, &reduced);
        prop_assert_eq!(&reduce_candidates(&ctx, &kept, &user, at, k).unwrap(), &reduced);

        let mut before: Vec<&String> = reduced.iter().collect();
        let mut after: Vec<&String> = out.posts.iter().collect();
        before.sort();
        after.sort();
        prop_assert_eq!(before, after);

        let (preds, _) = config.predictors();
        for v in &out.audit.scores {
            let expected = a * recency_oracle(&corpus, &v.post_id, at, 7.0)
                + b * friends_oracle(&corpus, &v.post_id, &user, at) as f64;
            prop_assert!((v.score - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
            prop_assert_eq!(v.score, v.resum());
            let only_a = value_score(&ctx, &v.post_id, &user, at, &preds, &[a, 0.0]).unwrap();
            let only_b = value_score(&ctx, &v.post_id, &user, at, &preds, &[0.0, b]).unwrap();
            prop_assert_eq!(only_a.score + only_b.score, v.score);
        }

        let scored: Vec<ScoredPost> = out
            .audit
            .scores
            .iter()
            .map(|v| ScoredPost {
                post_id: v.post_id.clone(),
                author_id: corpus.post(&v.post_id).unwrap().author_id.clone(),
                score: v.score,
            })
            .collect();
        prop_assert!(scored
            .windows(2)
            .all(|w| w[0].score > w[1].score || (w[0].score == w[1].score && w[0].post_id < w[1].post_id)));
        let rr = rerank_diversity(&scored, &d);
        prop_assert_eq!(rr.posts.iter().map(|p| p.post_id.clone()).collect::<Vec<_>>(), out.posts.clone());
        prop_assert_eq!(rr.infeasible, out.audit.rerank_infeasible);
        Ok(())
    });

    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    let small = (prop::collection::vec((0usize..3, -5i32..5), 0..=8), diversity());
    let rerank = runner.run(&small, |(items, d)| {
        let list: Vec<ScoredPost> = items
            .iter()
            .enumerate()
            .map(|(i, &(author, s))| ScoredPost {
                post_id: format!("p{i}"),
                author_id: format!("a{author}"),
                score: s as f64,
            })
            .collect();
        let got = rerank_diversity(&list, &d);
        let (ids, infeasible) = rerank_oracle(&list, &d);
        prop_assert_eq!(got.posts.iter().map(|p| p.post_id.clone()).collect::<Vec<_>>(), ids);
        prop_assert_eq!(got.infeasible, infeasible);
        Ok(())
    });
    let failures: Vec<String> =
        [("feed", feed.map_err(|e| e.to_string())), ("rerank oracle", rerank.map_err(|e| e.to_string()))]
            .into_iter()
            .filter_map(|(name, r)| r.err().map(|e| format!("{name}: {e}")))
            .collect();
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{cases} feed cases and {cases} rerank-oracle cases")
        } else {
            failures.join("; ")
        },
    )
}

fn interrater_brute(m: &RaterMatrix) -> BTreeMap<String, Option<f64>> {
    let raters: std::collections::BTreeSet<&String> = m.posts.values().flat_map(|r| r.keys()).collect();
    raters
        .into_iter()
        .map(|rater| {
            let (mut own, mut rest) = (Vec::new(), Vec::new());
            for judged in m.posts.values() {
                let Some(mine) = judged.get(rater) else { continue };
                let others: Vec<&Vec<f64>> = judged.iter().filter(|(r, _)| *r != rater).map(|(_, v)| v).collect();
                if others.is_empty() {
                    continue;
                }
                for k in 0..mine.len() {
                    own.push(mine[k]);
                    rest.push(others.iter().map(|v| v[k]).sum::<f64>() / others.len() as f64);
                }
            }
            (rater.clone(), pearson_sums(&own, &rest))
        })
        .collect()
}

fn metric_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    let mut undefined_mismatch = 0;
    for &(rows, cols) in &[(3usize, 4usize), (5, 10)] {
        for _ in 0..200 {
            // interrater: `rows` raters judging `cols` options on one post, then on two posts
            let mut m = RaterMatrix { options: (0..cols).map(|k| format!("o{k}")).collect(), posts: BTreeMap::new() };
            for post in 0..2 {
                let judged = m.posts.entry(format!("p{post}")).or_default();
                for r in 0..rows {
                    judged.insert(format!("r{r}"), (0..cols).map(|_| f64::from(rng.gen_bool(0.4))).collect());
                }
            }
            let brute = interrater_brute(&m);
            match interrater_correlation(&m) {
                Ok(report) => {
                    for (r, v) in &report.per_rater {
                        match (v, brute[r]) {
                            (Some(a), Some(b)) => {
                                worst = worst.max((a - b).abs());
                                compared += 1;
                            }
                            (None, None) => {}
                            _ => undefined_mismatch += 1,
                        }
                    }
                    let defined: Vec<f64> = brute.values().flatten().copied().collect();
                    worst = worst.max((report.mean - defined.iter().sum::<f64>() / defined.len() as f64).abs());
                }
                Err(_) => undefined_mismatch += usize::from(brute.values().any(Option::is_some)),
            }

            // pearson_matrix: `rows` posts by `cols` columns against itself and a second table
            let table = |rng: &mut ChaCha8Rng, binary: bool| {
                let mut t = LabelTable::new((0..cols).map(|k| format!("c{k}")).collect());
                for p in 0..rows {
                    let v = (0..cols)
                        .map(|_| if binary { f64::from(rng.gen_bool(0.5)) } else { rng.gen_range(-1.0..1.0) })
                        .collect();
                    t.insert(format!("p{p}"), v).unwrap();
                }
                t
            };
            let a = table(&mut rng, true);
            let b = table(&mut rng, false);
            for (x, y) in [(&a, &a), (&a, &b)] {
                let got = pearson_matrix(x, y).unwrap();
                let col = |t: &LabelTable, j: usize| -> Vec<f64> { t.rows.values().map(|r| r[j]).collect() };
                for i in 0..cols {
                    for j in 0..cols {
                        match (got.values[i][j], pearson_sums(&col(x, i), &col(y, j))) {
                            (Some(g), Some(e)) => {
                                worst = worst.max((g - e).abs());
                                compared += 1;
                            }
                            (None, None) => {}
                            _ => undefined_mismatch += 1,
                        }
                    }
                }
            }
        }
    }
    check(
        worst < 1e-12 && undefined_mismatch == 0,
        format!(
            "{compared} values compared, max deviation {worst:.2e}, {undefined_mismatch} undefined-cell mismatches"
        ),
    )
}

fn affect(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out =
        Command::new(env!("CARGO_BIN_EXE_affect")).args(args).current_dir(dir).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("affect {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
    }
}

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Verdict {
    let small = serde_json::json!({
        "content": { "hash_dim": 512, "embed_dim": 16, "hidden": [32], "output_dim": 32 },
        "user": { "hash_dim": 512, "embed_dim": 16, "hidden": [32], "output_dim": 16 },
        "fusion_hidden": [32],
        "n_classes": 23,
        "content_dense_dim": 8,
        "user_dense_dim": 8
    });
    let pipeline = include_str!("../data/pipeline.toml");
    let mut snaps = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let d = dir.path();
        std::fs::write(d.join("model.json"), small.to_string()).unwrap();
        std::fs::write(d.join("pipeline.toml"), pipeline).unwrap();
        affect(
            d,
            &["synth", "--seed", "11", "--posts", "1500", "--users", "300", "--survey", "500", "--out", "corpus"],
        )?;
        affect(d, &["care-label", "--corpus", "corpus", "--out", "care"])?;
        affect(
            d,
            &[
                "build-dataset",
                "--corpus",
                "corpus",
                "--care-labels",
                "care/labels.tsv",
                "--seed",
                "3",
                "--per-class-n",
                "150",
                "--out",
                "data",
            ],
        )?;
        affect(
            d,
            &[
                "train",
                "--corpus",
                "corpus",
                "--dataset",
                "data",
                "--seed",
                "3",
                "--epochs",
                "1",
                "--model-config",
                "model.json",
                "--out",
                "model",
            ],
        )?;
        affect(
            d,
            &[
                "rank",
                "--corpus",
                "corpus",
                "--config",
                "pipeline.toml",
                "--model",
                "model/model.bin",
                "--n-users",
                "4",
                "--out",
                "feeds",
            ],
        )?;
        snaps.push(snapshot(d));
    }
    let differing: Vec<&String> =
        snaps[0].iter().filter(|(k, v)| snaps[1].get(*k) != Some(v)).map(|(k, _)| k).collect();
    let required = ["corpus/posts.jsonl", "data/dataset.jsonl", "model/model.bin", "feeds/feeds.jsonl"];
    let present = required.iter().all(|f| snaps[0].contains_key(*f));
    check(
        present && differing.is_empty() && snaps[0].len() == snaps[1].len(),
        format!("{} files compared across two runs, differing: {differing:?}", snaps[0].len()),
    )
}

type Criterion = (u8, &'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "CARE precision", care_precision),
        (2, "bootstrap recovery", bootstrap_recovery),
        (3, "agreement table semantics", table2_semantics),
        (4, "gradient correctness", gradient_correctness),
        (5, "model learns", model_learns),
        (6, "ablation direction", ablation_direction),
        (7, "loss-reduction formula", formula_exactness),
        (8, "pipeline invariants", pipeline_invariants),
        (9, "metric oracles", metric_oracles),
        (10, "determinism", determinism),
    ];
    let results: Vec<(u8, &str, Verdict, Duration)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(n, name, f)| {
                s.spawn(move || {
                    let start = Instant::now();
                    let verdict = std::panic::catch_unwind(f).unwrap_or_else(|p| {
                        Err(p
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_else(|| "panicked".into()))
                    });
                    (n, name, verdict, start.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (n, name, verdict, t) in &results {
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n:>2} {tag} {name}: {detail} [{:.1}s]", t.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Runs the staged feed pipeline for one user with the shipped pipeline
//! config: integrity filter, candidate reduction, value model, diversity pass.

use affect_signals::care::{run_care, Lexicon, PatternSet, StopCondition, Thresholds};
use affect_signals::corpus::{synth_corpus, SynthConfig};
use affect_signals::dataset::{build_dataset, DatasetConfig};
use affect_signals::model::{train, FeatureStore, ModelConfig, TrainConfig, TwoTowerModel};
use affect_signals::ranker::{run_feed, FeedRequest, PipelineConfig, RankContext};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (corpus, _) = synth_corpus(2, &SynthConfig { n_posts: 1500, n_users: 300, ..SynthConfig::default() })?;
    let care =
        run_care(&corpus, &PatternSet::seed(), &Lexicon::seed(), &Thresholds::default(), &StopCondition::default())?;
    let data =
        build_dataset(&corpus, Some(&care.labels), &DatasetConfig { per_class_n: 150, ..DatasetConfig::default() })?;
    let model_config = ModelConfig::default();
    let features = FeatureStore::new(&corpus, &model_config);
    let mut model = TwoTowerModel::new(model_config, 2);
    let train_cfg = TrainConfig { epochs: 1, ..TrainConfig::default() };
    train(&mut model, &features.examples(&data.train)?, &features.examples(&data.validation)?, &train_cfg)?;

    let mut config = PipelineConfig::from_toml(include_str!("../data/pipeline.toml"))?;
    config.k = 40;
    let mut ctx = RankContext::new(&corpus).with_model(&model, &features, data.classes.clone());
    ctx.half_life_days = config.half_life_days;

    let user = corpus.users()[0].id.clone();
    let at = corpus.max_timestamp().unwrap_or(0);
    let pool = corpus.posts().iter().map(|p| p.id.clone()).collect();
    let feed = run_feed(&ctx, &FeedRequest { user_id: user.clone(), at, pool }, &config)?;
    println!(
        "user {user}: pool {}, {} removed by integrity, {} after reduction, rerank infeasible: {}",
        feed.audit.pool_size,
        feed.audit.removed.len(),
        feed.audit.reduced.len(),
        feed.audit.rerank_infeasible
    );
    for (rank, id) in feed.posts.iter().take(10).enumerate() {
        let v = feed.audit.scores.iter().find(|s| &s.post_id == id).expect("scored");
        let author = &corpus.post(id).expect("known").author_id;
        println!("{:>2}. {id} by {author}  value {:+.4}", rank + 1, v.score);
    }
    Ok(())
}

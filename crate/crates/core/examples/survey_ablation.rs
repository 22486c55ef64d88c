//! Does adding the affect embedding help predict survey answers? Trains the
//! survey scorer with and without it and reports the AUC loss reduction.

use std::collections::HashMap;

use affect_signals::care::{run_care, Lexicon, PatternSet, StopCondition, Thresholds};
use affect_signals::corpus::{synth_corpus, synth_survey, SynthConfig};
use affect_signals::dataset::{build_dataset, DatasetConfig};
use affect_signals::model::{export_embedding, train, FeatureStore, ModelConfig, TrainConfig, TwoTowerModel};
use affect_signals::ranker::{ablate, ScorerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (corpus, truth) = synth_corpus(1, &SynthConfig { n_posts: 3000, n_users: 600, ..SynthConfig::default() })?;
    let care =
        run_care(&corpus, &PatternSet::seed(), &Lexicon::seed(), &Thresholds::default(), &StopCondition::default())?;
    let data =
        build_dataset(&corpus, Some(&care.labels), &DatasetConfig { per_class_n: 500, ..DatasetConfig::default() })?;
    let config = ModelConfig::default();
    let features = FeatureStore::new(&corpus, &config);
    let mut model = TwoTowerModel::new(config, 1);
    train(
        &mut model,
        &features.examples(&data.train)?,
        &features.examples(&data.validation)?,
        &TrainConfig::default(),
    )?;
    let embeddings: HashMap<String, Vec<f64>> = export_embedding(&model, corpus.posts()).into_iter().collect();

    let survey = synth_survey(&corpus, &truth, 7, 4000);
    for seed in 0..3 {
        let r = ablate(&corpus, &survey, &embeddings, &ScorerConfig::default(), seed)?;
        println!(
            "seed {seed}: AUC {:.4} -> {:.4}, loss reduction {:.2}%",
            r.base_auc, r.embedding_auc, r.loss_reduction
        );
    }
    Ok(())
}

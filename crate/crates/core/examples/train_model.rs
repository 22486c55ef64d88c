//! Trains a small two-tower model, checks its gradient numerically and
//! exports content-tower embeddings.

use affect_signals::care::{run_care, Lexicon, PatternSet, StopCondition, Thresholds};
use affect_signals::corpus::{synth_corpus, SynthConfig};
use affect_signals::dataset::{build_dataset, DatasetConfig};
use affect_signals::model::{
    export_embedding, grad_check, per_class_auc, train, FeatureStore, ModelConfig, TrainConfig, TwoTowerModel,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (corpus, _) = synth_corpus(1, &SynthConfig { n_posts: 3000, n_users: 600, ..SynthConfig::default() })?;
    let care =
        run_care(&corpus, &PatternSet::seed(), &Lexicon::seed(), &Thresholds::default(), &StopCondition::default())?;
    let data =
        build_dataset(&corpus, Some(&care.labels), &DatasetConfig { per_class_n: 300, ..DatasetConfig::default() })?;

    let config = ModelConfig::default();
    let features = FeatureStore::new(&corpus, &config);
    let train_rows = features.examples(&data.train)?;
    let validation = features.examples(&data.validation)?;
    let test = features.examples(&data.test)?;

    let mut model = TwoTowerModel::new(config, 1);
    let check = grad_check(&model, &train_rows[..8], 1e-5);
    println!("gradient check: max relative error {:.2e} over {} parameters", check.max_relative_error, check.checked);

    let report = train(&mut model, &train_rows, &validation, &TrainConfig::default())?;
    for e in &report.epochs {
        println!("{e:?}");
    }
    for (class, auc) in data.classes.iter().zip(per_class_auc(&model, &test)) {
        println!("{class:>24}  test AUC {}", auc.map_or("n/a".into(), |a| format!("{a:.3}")));
    }

    let embeddings = export_embedding(&model, corpus.posts());
    let (id, e) = &embeddings[0];
    println!("{} embeddings of width {}; {id}: [{:.3}, {:.3}, ...]", embeddings.len(), e.len(), e[0], e[1]);
    Ok(())
}

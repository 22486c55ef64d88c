//! Joins engagement events, human consensus and CARE labels into a
//! class-balanced train/validation/test split.

use affect_signals::care::{run_care, Lexicon, PatternSet, StopCondition, Thresholds};
use affect_signals::corpus::{synth_corpus, SynthConfig};
use affect_signals::dataset::{build_dataset, DatasetConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (corpus, _) = synth_corpus(3, &SynthConfig { n_posts: 2000, n_users: 400, ..SynthConfig::default() })?;
    let care =
        run_care(&corpus, &PatternSet::seed(), &Lexicon::seed(), &Thresholds::default(), &StopCondition::default())?;
    let config = DatasetConfig { per_class_n: 200, seed: 3, ..DatasetConfig::default() };
    let data = build_dataset(&corpus, Some(&care.labels), &config)?;
    println!(
        "{} classes, {} train / {} validation / {} test",
        data.classes.len(),
        data.train.len(),
        data.validation.len(),
        data.test.len()
    );
    print!("{}", data.summary_csv());
    for w in &data.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

//! Weak labels from comment patterns: seed matching, then bootstrapped
//! pattern and keyword expansion, scored against the planted affects.

use affect_signals::care::{label_corpus, label_count, run_care, Lexicon, PatternSet, StopCondition, Thresholds};
use affect_signals::corpus::{synth_corpus, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (corpus, truth) = synth_corpus(1, &SynthConfig { n_posts: 3000, n_users: 600, ..SynthConfig::default() })?;
    let thresholds = Thresholds::default();

    let seed = label_corpus(&corpus, &PatternSet::seed(), &Lexicon::seed(), thresholds.min_support);
    println!("seed patterns label {} posts ({} labels)", seed.len(), label_count(&seed));

    let run = run_care(&corpus, &PatternSet::seed(), &Lexicon::seed(), &thresholds, &StopCondition::default())?;
    for r in &run.reports {
        println!(
            "iteration {}: {} patterns (+{}), {} keywords (+{}), {} posts labeled",
            r.iteration, r.patterns, r.patterns_added, r.keywords, r.keywords_added, r.labeled_posts
        );
    }
    println!("stopped: {:?}", run.stop_reason);
    for e in run.changelog.iter().take(8) {
        println!("  {:?} `{}` -> {} {:?}", e.kind, e.ngram, e.target, e.evidence);
    }

    let (mut correct, mut total) = (0, 0);
    for (post, labels) in &run.labels {
        let planted = truth.affects_of(post).cloned().unwrap_or_default();
        for l in labels {
            total += 1;
            correct += usize::from(planted.iter().any(|a| l.covers(*a)));
        }
    }
    println!("precision {:.4} over {total} labels", correct as f64 / total as f64);
    Ok(())
}

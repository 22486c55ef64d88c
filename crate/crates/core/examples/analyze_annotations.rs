//! Human annotation analysis: inter-rater agreement, agreement between CARE
//! and the rater consensus, and affect/engagement correlations.

use affect_signals::analysis::{
    annotation_stats, care_agreement, engagement_table, human_label_table, interrater_correlation, pearson_matrix,
    RaterMatrix, Threshold,
};
use affect_signals::care::{run_care, Lexicon, PatternSet, StopCondition, Thresholds};
use affect_signals::corpus::{synth_corpus, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (corpus, _) = synth_corpus(5, &SynthConfig { n_posts: 3000, n_users: 600, ..SynthConfig::default() })?;
    let annotations = corpus.annotations();

    let stats = annotation_stats(annotations)?;
    println!("{} records on {} posts from {} raters", stats.n_records, stats.n_posts, stats.n_raters);

    let report = interrater_correlation(&RaterMatrix::from_annotations(annotations))?;
    println!("inter-rater correlation {:.3} ({} raters excluded)", report.mean, report.excluded);

    let care =
        run_care(&corpus, &PatternSet::seed(), &Lexicon::seed(), &Thresholds::default(), &StopCondition::default())?;
    for row in care_agreement(annotations, &care.labels, &Threshold::STANDARD) {
        println!(
            "raters {:<3} posts {:>4}  any {:5.1}  all {:5.1}",
            row.threshold.to_string(),
            row.n_posts,
            row.any,
            row.all
        );
    }

    let matrix = pearson_matrix(&human_label_table(annotations, 1), &engagement_table(&corpus))?;
    println!("affect x engagement correlations over {} posts:", matrix.n_posts);
    print!("{}", matrix.to_csv().lines().take(5).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}

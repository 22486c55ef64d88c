//! Generates a small synthetic corpus, writes it to a directory and reloads it.
//!
//! `cargo run --example synth_corpus [out_dir]`

use affect_signals::corpus::{load_corpus, synth_corpus, write_corpus, CorpusPaths, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SynthConfig { n_posts: 500, n_users: 100, ..SynthConfig::default() };
    let (corpus, truth) = synth_corpus(7, &config)?;
    println!(
        "{} posts, {} users, {} comments, {} events, {} annotations",
        corpus.posts().len(),
        corpus.users().len(),
        corpus.comments().len(),
        corpus.events().len(),
        corpus.annotations().len()
    );
    for (affect, words) in truth.held_out_keywords.iter().take(3) {
        println!("held out for {affect}: {}", words.join(", "));
    }

    let dir = match std::env::args().nth(1) {
        Some(d) => std::path::PathBuf::from(d),
        None => std::env::temp_dir().join("affect-synth-example"),
    };
    write_corpus(&corpus, &dir)?;
    let back = load_corpus(&CorpusPaths::in_dir(&dir))?;
    assert_eq!(back.posts(), corpus.posts());
    println!("wrote and reloaded {}", dir.display());
    Ok(())
}

//! Command-line front end. Every subcommand reads files, calls one library
//! stage and writes its outputs atomically alongside a `run_config.json`
//! holding the fully resolved arguments.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    annotation_stats, care_agreement, engagement_table, feeling_table, human_label_table, interrater_correlation,
    pearson_matrix, AnalysisError, RaterMatrix, Threshold,
};
use crate::care::{
    label_corpus, labels_from_tsv, labels_to_tsv, run_care, CareError, Lexicon, PatternSet, PostLabels, StopCondition,
    Thresholds,
};
use crate::corpus::{
    load_corpus, synth_corpus, synth_survey, write_corpus, Corpus, CorpusError, CorpusPaths, SurveyResponse,
    SynthConfig,
};
use crate::dataset::{build_dataset, load_dataset, write_dataset, ClassSet, DatasetConfig, DatasetError, Split};
use crate::io::{parse_jsonl, to_jsonl, write_atomic};
use crate::model::{
    content_input, export_embedding, grad_check, grad_check_against, load_model, loss_and_grad, per_class_auc,
    read_embeddings, save_model, train, user_input, write_embeddings, Example, FeatureStore, ModelConfig, ModelError,
    Optimizer, TowerConfig, TrainConfig, TwoTowerModel,
};
use crate::ranker::{
    ablate, run_feed, train_survey_scorer, FeedRequest, PipelineConfig, RankContext, RankError, ScorerConfig,
    SurveyScorer, SurveySplit,
};

pub const RUN_CONFIG: &str = "run_config.json";
pub const SURVEY_FILE: &str = "survey.jsonl";
pub const TRUTH_FILE: &str = "truth.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("CorpusError: {0}")]
    Corpus(#[from] CorpusError),
    #[error("CareError: {0}")]
    Care(#[from] CareError),
    #[error("DatasetError: {0}")]
    Dataset(#[from] DatasetError),
    #[error("ModelError: {0}")]
    Model(#[from] ModelError),
    #[error("RankError: {0}")]
    Rank(#[from] RankError),
    #[error("AnalysisError: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("gradient check failed: max relative error {error:e} exceeds {tolerance:e}")]
    GradCheck { error: f64, tolerance: f64 },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("output types serialize");
    bytes.push(b'\n');
    write_file(path, &bytes)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Format { path: path.display().to_string(), message: e.to_string() })
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    parse_jsonl(&read_text(path)?).map_err(|e| CliError::Format {
        path: path.display().to_string(),
        message: format!("line {}: {}", e.line, e.message),
    })
}

#[derive(Debug, Parser)]
#[command(name = "affect", version, about = "Affective-response labels, models and feed ranking on synthetic corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus, its ground truth and survey answers.
    Synth(SynthArgs),
    /// Label posts from their comments with fixed patterns and lexicon.
    CareLabel(CareLabelArgs),
    /// Bootstrap patterns and lexicon, then label.
    CareExpand(CareExpandArgs),
    /// Merge label sources into a balanced, split training set.
    BuildDataset(BuildDatasetArgs),
    /// Train the two-tower model.
    Train(TrainArgs),
    /// Compare analytic and finite-difference gradients on a small model.
    GradCheck(GradCheckArgs),
    /// Write the content-tower embedding of every post.
    ExportEmbedding(ExportArgs),
    /// Run the feed pipeline for a set of users.
    Rank(RankArgs),
    /// Survey scorer with and without the content embedding.
    Ablate(AblateArgs),
    /// Annotation statistics, agreement and correlation tables.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub posts: usize,
    #[arg(long, default_value_t = 400)]
    pub users: usize,
    /// Survey answers to generate.
    #[arg(long, default_value_t = 4000)]
    pub survey: usize,
    /// JSON file overriding the generator settings; --posts and --users still apply.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SeedArgs {
    /// Pattern TSV; defaults to the shipped seed patterns.
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    /// Lexicon TSV; defaults to the shipped seed lexicon.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

impl SeedArgs {
    fn load(&self) -> Result<(PatternSet, Lexicon), CliError> {
        let patterns = match &self.patterns {
            Some(p) => PatternSet::parse(&read_text(p)?)?,
            None => PatternSet::seed(),
        };
        let lexicon = match &self.lexicon {
            Some(p) => Lexicon::parse(&read_text(p)?)?,
            None => Lexicon::seed(),
        };
        Ok((patterns, lexicon))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CareLabelArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[arg(long, default_value_t = Thresholds::default().min_support)]
    pub min_support: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CareExpandArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[arg(long, default_value_t = Thresholds::default().min_support)]
    pub min_support: usize,
    #[arg(long, default_value_t = Thresholds::default().min_freq)]
    pub min_freq: u64,
    #[arg(long, default_value_t = Thresholds::default().min_classes_for_pattern)]
    pub min_classes_for_pattern: usize,
    #[arg(long, default_value_t = Thresholds::default().purity_for_keyword)]
    pub purity_for_keyword: f64,
    #[arg(long, default_value_t = Thresholds::default().n_max)]
    pub n_max: usize,
    #[arg(long, default_value_t = Thresholds::default().min_pattern_tokens)]
    pub min_pattern_tokens: usize,
    #[arg(long, default_value_t = StopCondition::default().max_iters)]
    pub max_iters: usize,
    #[arg(long)]
    pub target_labels: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildDatasetArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// CARE labels TSV from care-label or care-expand.
    #[arg(long)]
    pub care_labels: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub per_class_n: usize,
    #[arg(long, default_value_t = 90)]
    pub window_days: i64,
    /// Unix seconds; defaults to the latest corpus timestamp.
    #[arg(long)]
    pub as_of: Option<i64>,
    #[arg(long, default_value_t = 3)]
    pub consensus_k: usize,
    #[arg(long)]
    pub include_snooze: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.0007)]
    pub lr: f64,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Adam)]
    pub optimizer: OptimizerArg,
    /// JSON model config; defaults to the built-in sizes.
    #[arg(long)]
    pub model_config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GradCheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,
    /// Exit with an error when the max relative error exceeds this.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Scale the largest analytic gradient entry by this factor before
    /// checking, to confirm the check notices.
    #[arg(long)]
    pub corrupt: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RankArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Pipeline TOML.
    #[arg(long)]
    pub config: PathBuf,
    /// Checkpoint; `classes.json` next to it names the outputs.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Survey scorer JSON from `ablate`.
    #[arg(long)]
    pub scorer: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Users to rank for; defaults to the first --n-users users.
    #[arg(long, value_delimiter = ',')]
    pub users: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub n_users: usize,
    /// Request time in unix seconds; defaults to the latest corpus timestamp.
    /// The pool is every post created at or before it.
    #[arg(long)]
    pub at: Option<i64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AblateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Defaults to survey.jsonl inside the corpus directory.
    #[arg(long)]
    pub survey: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = ScorerConfig::default().iterations)]
    pub iterations: usize,
    #[arg(long, default_value_t = ScorerConfig::default().learning_rate)]
    pub lr: f64,
    #[arg(long, default_value_t = ScorerConfig::default().l2)]
    pub l2: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub care_labels: Option<PathBuf>,
    /// Raters needed for an affect to count in the correlation tables.
    #[arg(long, default_value_t = 1)]
    pub min_raters: usize,
    /// Feelings on fewer posts than this are dropped.
    #[arg(long, default_value_t = 20)]
    pub feeling_floor: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Runs one parsed command, printing a short summary to stdout.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Synth(a) => synth(a)?,
        Command::CareLabel(a) => care_label(a)?,
        Command::CareExpand(a) => care_expand(a)?,
        Command::BuildDataset(a) => build(a)?,
        Command::Train(a) => train_cmd(a)?,
        Command::GradCheck(a) => grad_check_cmd(a)?,
        Command::ExportEmbedding(a) => export(a)?,
        Command::Rank(a) => rank(a)?,
        Command::Ablate(a) => ablate_cmd(a)?,
        Command::Analyze(a) => analyze(a)?,
    }
    Ok(())
}

/// Writes `run_config.json`: the subcommand, its arguments and whatever
/// settings it resolved beyond them.
fn record_run<A: Serialize>(
    dir: &Path,
    subcommand: &str,
    args: &A,
    resolved: serde_json::Value,
) -> Result<(), CliError> {
    write_json(
        &dir.join(RUN_CONFIG),
        &serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": subcommand,
            "args": args,
            "resolved": resolved,
        }),
    )
}

fn open_corpus(dir: &Path) -> Result<Corpus, CliError> {
    Ok(load_corpus(&CorpusPaths::in_dir(dir))?)
}

fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let mut config: SynthConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => SynthConfig::default(),
    };
    config.n_posts = a.posts;
    config.n_users = a.users;
    let (corpus, truth) = synth_corpus(a.seed, &config)?;
    let survey = synth_survey(&corpus, &truth, a.seed, a.survey);
    write_corpus(&corpus, &a.out)?;
    write_json(&a.out.join(TRUTH_FILE), &truth)?;
    write_file(&a.out.join(SURVEY_FILE), &to_jsonl(&survey))?;
    record_run(&a.out, "synth", a, serde_json::json!({ "synth": config }))?;
    println!(
        "posts {} users {} comments {} events {} annotations {} survey {}",
        corpus.posts().len(),
        corpus.users().len(),
        corpus.comments().len(),
        corpus.events().len(),
        corpus.annotations().len(),
        survey.len()
    );
    Ok(())
}

fn care_label(a: &CareLabelArgs) -> Result<(), CliError> {
    let corpus = open_corpus(&a.corpus)?;
    let (patterns, lexicon) = a.seeds.load()?;
    if a.min_support == 0 {
        return Err(CliError::Usage("--min-support must be at least 1".into()));
    }
    let labels = label_corpus(&corpus, &patterns, &lexicon, a.min_support);
    write_file(&a.out.join("labels.tsv"), labels_to_tsv(&labels).as_bytes())?;
    record_run(&a.out, "care-label", a, serde_json::Value::Null)?;
    println!("labeled posts {}", labels.len());
    Ok(())
}

fn care_expand(a: &CareExpandArgs) -> Result<(), CliError> {
    let corpus = open_corpus(&a.corpus)?;
    let (patterns, lexicon) = a.seeds.load()?;
    let thresholds = Thresholds {
        min_support: a.min_support,
        min_freq: a.min_freq,
        min_classes_for_pattern: a.min_classes_for_pattern,
        purity_for_keyword: a.purity_for_keyword,
        n_max: a.n_max,
        min_pattern_tokens: a.min_pattern_tokens,
    };
    let stop = StopCondition { max_iters: a.max_iters, target_labels: a.target_labels };
    let run = run_care(&corpus, &patterns, &lexicon, &thresholds, &stop)?;
    write_file(&a.out.join("labels.tsv"), labels_to_tsv(&run.labels).as_bytes())?;
    write_file(&a.out.join("patterns.tsv"), run.patterns.to_tsv().as_bytes())?;
    write_file(&a.out.join("lexicon.tsv"), run.lexicon.to_tsv().as_bytes())?;
    write_file(&a.out.join("changelog.jsonl"), &to_jsonl(&run.changelog))?;
    write_file(&a.out.join("iterations.jsonl"), &to_jsonl(&run.reports))?;
    record_run(
        &a.out,
        "care-expand",
        a,
        serde_json::json!({ "thresholds": thresholds, "stop": stop, "stop_reason": run.stop_reason }),
    )?;
    for r in &run.reports {
        println!(
            "iteration {} patterns {} keywords {} labeled posts {}",
            r.iteration, r.patterns, r.keywords, r.labeled_posts
        );
    }
    Ok(())
}

fn read_labels(path: &Path) -> Result<PostLabels, CliError> {
    Ok(labels_from_tsv(&read_text(path)?)?)
}

fn build(a: &BuildDatasetArgs) -> Result<(), CliError> {
    let corpus = open_corpus(&a.corpus)?;
    let care = a.care_labels.as_deref().map(read_labels).transpose()?;
    let config = DatasetConfig {
        window_days: a.window_days,
        as_of: a.as_of,
        consensus_k: a.consensus_k,
        per_class_n: a.per_class_n,
        include_snooze: a.include_snooze,
        seed: a.seed,
    };
    let data = build_dataset(&corpus, care.as_ref(), &config)?;
    write_dataset(&data, &a.out)?;
    record_run(&a.out, "build-dataset", a, serde_json::json!({ "dataset": config, "warnings": data.warnings }))?;
    for w in &data.warnings {
        eprintln!("warning: {w}");
    }
    println!("train {} validation {} test {}", data.train.len(), data.validation.len(), data.test.len());
    Ok(())
}

#[derive(Serialize)]
struct ClassAuc {
    class: String,
    auc: Option<f64>,
}

fn train_cmd(a: &TrainArgs) -> Result<(), CliError> {
    let corpus = open_corpus(&a.corpus)?;
    let data = load_dataset(&a.dataset)?;
    let mut model_config: ModelConfig = match &a.model_config {
        Some(p) => read_json(p)?,
        None => ModelConfig::default(),
    };
    model_config.n_classes = data.classes.len();
    model_config.validate().map_err(ModelError::InvalidConfig)?;
    let train_config = TrainConfig {
        epochs: a.epochs,
        learning_rate: a.lr,
        batch_size: a.batch_size,
        seed: a.seed,
        optimizer: match a.optimizer {
            OptimizerArg::Adam => Optimizer::adam(),
            OptimizerArg::Sgd => Optimizer::Sgd,
        },
    };
    let features = FeatureStore::new(&corpus, &model_config);
    let examples = |s: Split| features.examples(data.split(s));
    let (tr, va, te) = (examples(Split::Train)?, examples(Split::Validation)?, examples(Split::Test)?);
    let mut model = TwoTowerModel::new(model_config.clone(), a.seed);
    let report = train(&mut model, &tr, &va, &train_config)?;
    let aucs: Vec<ClassAuc> = data
        .classes
        .names()
        .into_iter()
        .zip(per_class_auc(&model, &te))
        .map(|(class, auc)| ClassAuc { class, auc })
        .collect();
    save_model(&model, &a.out.join("model.bin"))?;
    write_json(&a.out.join("classes.json"), &data.classes.names())?;
    write_json(&a.out.join("metrics.json"), &serde_json::json!({ "report": report, "test_auc": aucs }))?;
    record_run(&a.out, "train", a, serde_json::json!({ "model": model_config, "train": train_config }))?;
    for e in &report.epochs {
        println!("epoch {} train loss {:.5} validation loss {:?}", e.epoch, e.train_loss, e.validation_loss);
    }
    for c in &aucs {
        println!("{:<24} {}", c.class, c.auc.map_or("undefined".into(), |v| format!("{v:.4}")));
    }
    Ok(())
}

/// Two layers per tower, small enough to check every parameter.
pub fn grad_check_config() -> ModelConfig {
    ModelConfig {
        content: TowerConfig { hash_dim: 64, embed_dim: 6, hidden: vec![8], output_dim: 5 },
        user: TowerConfig { hash_dim: 32, embed_dim: 4, hidden: vec![6], output_dim: 4 },
        fusion_hidden: vec![8],
        n_classes: ClassSet::default().len(),
        content_dense_dim: crate::corpus::DEFAULT_DENSE_DIM,
        user_dense_dim: crate::corpus::DEFAULT_DENSE_DIM,
    }
}

fn grad_check_cmd(a: &GradCheckArgs) -> Result<(), CliError> {
    if a.batch == 0 {
        return Err(CliError::Usage("--batch must be at least 1".into()));
    }
    let (corpus, _) = synth_corpus(a.seed, &SynthConfig { n_posts: a.batch, n_users: 40, ..SynthConfig::default() })?;
    let config = grad_check_config();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let batch: Vec<Example> = corpus
        .posts()
        .iter()
        .zip(corpus.users().iter().cycle())
        .map(|(p, u)| Example {
            content: content_input(p, config.content.hash_dim, config.content_dense_dim),
            user: user_input(u, config.user.hash_dim, config.user_dense_dim),
            labels: (0..config.n_classes).map(|_| f64::from(rng.gen_bool(0.3))).collect(),
        })
        .collect();
    let model = TwoTowerModel::new(config, a.seed);
    let report = match a.corrupt {
        None => grad_check(&model, &batch, a.epsilon),
        Some(factor) => {
            let (_, mut g) = loss_and_grad(&model, &batch);
            let i = (0..g.len()).max_by(|&x, &y| g[x].abs().total_cmp(&g[y].abs())).unwrap_or(0);
            g[i] *= factor;
            grad_check_against(&model, &batch, a.epsilon, &g)
        }
    };
    if let Some(out) = &a.out {
        write_json(&out.join("grad_check.json"), &report)?;
        record_run(out, "grad-check", a, serde_json::Value::Null)?;
    }
    println!(
        "max relative error {:e} at parameter {} ({} checked)",
        report.max_relative_error, report.worst_param, report.checked
    );
    if report.max_relative_error > a.tolerance {
        return Err(CliError::GradCheck { error: report.max_relative_error, tolerance: a.tolerance });
    }
    Ok(())
}

fn export(a: &ExportArgs) -> Result<(), CliError> {
    let corpus = open_corpus(&a.corpus)?;
    let model = load_model(&a.model)?;
    let table = export_embedding(&model, corpus.posts());
    write_embeddings(&table, &a.out)?;
    println!("posts {} dim {}", table.len(), table.first().map_or(0, |r| r.1.len()));
    Ok(())
}

fn load_embeddings(path: &Path) -> Result<HashMap<String, Vec<f64>>, CliError> {
    Ok(read_embeddings(path)?.into_iter().collect())
}

fn rank(a: &RankArgs) -> Result<(), CliError> {
    let corpus = open_corpus(&a.corpus)?;
    let config = PipelineConfig::from_toml(&read_text(&a.config)?)?;
    let model = a.model.as_deref().map(load_model).transpose()?;
    let classes = match &a.model {
        Some(m) => {
            let path = m.with_file_name("classes.json");
            if path.exists() {
                let names: Vec<String> = read_json(&path)?;
                ClassSet::from_names(&names)
                    .map_err(|e| CliError::Format { path: path.display().to_string(), message: e.to_string() })?
            } else {
                ClassSet::default()
            }
        }
        None => ClassSet::default(),
    };
    let features = model.as_ref().map(|m| FeatureStore::new(&corpus, m.config()));
    let scorer: Option<SurveyScorer> = a.scorer.as_deref().map(read_json).transpose()?;
    let embeddings = a.embeddings.as_deref().map(load_embeddings).transpose()?;

    let mut ctx = RankContext::new(&corpus);
    ctx.half_life_days = config.half_life_days;
    if let (Some(m), Some(f)) = (&model, &features) {
        ctx = ctx.with_model(m, f, classes);
    }
    if let Some(s) = &scorer {
        ctx = ctx.with_scorer(s, embeddings.as_ref());
    }
    let at = a.at.or(corpus.max_timestamp()).unwrap_or(0);
    let pool: Vec<String> = corpus.posts().iter().filter(|p| p.created_at <= at).map(|p| p.id.clone()).collect();
    let users: Vec<String> = if a.users.is_empty() {
        corpus.users().iter().take(a.n_users).map(|u| u.id.clone()).collect()
    } else {
        a.users.clone()
    };
    let mut feeds = Vec::with_capacity(users.len());
    for user_id in users {
        let request = FeedRequest { user_id, at, pool: pool.clone() };
        feeds.push(run_feed(&ctx, &request, &config)?);
    }
    write_file(&a.out.join("feeds.jsonl"), &to_jsonl(&feeds))?;
    record_run(&a.out, "rank", a, serde_json::json!({ "at": at, "pipeline": config }))?;
    for f in &feeds {
        println!(
            "{} pool {} filtered {} ranked {}{}",
            f.user_id,
            f.audit.pool_size,
            f.audit.removed.len(),
            f.posts.len(),
            if f.audit.rerank_infeasible { " (diversity infeasible)" } else { "" }
        );
    }
    Ok(())
}

fn ablate_cmd(a: &AblateArgs) -> Result<(), CliError> {
    let corpus = open_corpus(&a.corpus)?;
    let embeddings = load_embeddings(&a.embeddings)?;
    let survey_path = a.survey.clone().unwrap_or_else(|| a.corpus.join(SURVEY_FILE));
    let survey: Vec<SurveyResponse> = read_jsonl(&survey_path)?;
    if a.seeds.is_empty() {
        return Err(CliError::Usage("--seeds needs at least one seed".into()));
    }
    let config = ScorerConfig { iterations: a.iterations, learning_rate: a.lr, l2: a.l2, use_embedding: false };
    let mut results = Vec::with_capacity(a.seeds.len());
    for &seed in &a.seeds {
        let r = ablate(&corpus, &survey, &embeddings, &config, seed)?;
        println!(
            "seed {seed}: base AUC {:.4}  with embedding {:.4}  loss reduction {:.2}%",
            r.base_auc, r.embedding_auc, r.loss_reduction
        );
        results.push(r);
    }
    let split = SurveySplit::new(&survey, a.seeds[0]);
    let scorer =
        train_survey_scorer(&corpus, &split.train, Some(&embeddings), &ScorerConfig { use_embedding: true, ..config })?;
    write_json(&a.out.join("ablation.json"), &results)?;
    write_json(&a.out.join("scorer.json"), &scorer)?;
    record_run(&a.out, "ablate", a, serde_json::json!({ "scorer": config }))?;
    Ok(())
}

fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let corpus = open_corpus(&a.corpus)?;
    let annotations = corpus.annotations();
    let stats = annotation_stats(annotations)?;
    write_json(&a.out.join("annotation_stats.json"), &stats)?;
    let raters = interrater_correlation(&RaterMatrix::from_annotations(annotations))?;
    write_json(&a.out.join("interrater.json"), &raters)?;
    println!(
        "mean selections {:.3}; interrater correlation {:.4} ({} raters excluded)",
        stats.mean_selections, raters.mean, raters.excluded
    );

    let human = human_label_table(annotations, a.min_raters);
    let tables = [
        ("affect_affect.csv", pearson_matrix(&human, &human)),
        ("affect_engagement.csv", pearson_matrix(&human, &engagement_table(&corpus))),
        ("affect_feeling.csv", pearson_matrix(&human, &feeling_table(&corpus, a.feeling_floor))),
    ];
    for (name, matrix) in tables {
        match matrix {
            Ok(m) => write_file(&a.out.join(name), m.to_csv().as_bytes())?,
            Err(AnalysisError::NoOverlap) => eprintln!("warning: {name} skipped, no shared posts"),
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(path) = &a.care_labels {
        let care = read_labels(path)?;
        let rows = care_agreement(annotations, &care, &Threshold::STANDARD);
        let mut csv = String::from("threshold,posts,any_care,all_care,other\n");
        for r in &rows {
            csv.push_str(&format!("{},{},{},{},{}\n", r.threshold, r.n_posts, r.any, r.all, r.other));
            println!(
                "{:>4}  any {:6.2}  all {:6.2}  other {:6.2}  ({} posts)",
                r.threshold.to_string(),
                r.any,
                r.all,
                r.other,
                r.n_posts
            );
        }
        write_file(&a.out.join("care_agreement.csv"), csv.as_bytes())?;
    }
    record_run(&a.out, "analyze", a, serde_json::Value::Null)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_subcommand_is_a_usage_error() {
        assert!(Cli::try_parse_from(["affect", "bogus"]).is_err());
        assert!(Cli::try_parse_from(["affect", "synth"]).is_err());
        assert!(Cli::try_parse_from(["affect", "synth", "--out", "x"]).is_ok());
    }
}

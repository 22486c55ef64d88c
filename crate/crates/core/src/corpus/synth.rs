use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{
    Affect, AnnotationRecord, Choice, Comment, Corpus, CorpusError, EngagementEvent, EventKind, Post, SurveyResponse,
    User, DEFAULT_DENSE_DIM, MAX_SELECTIONS,
};
use crate::care::{CareLabel, Lexicon, PatternSet, SLOT};

const DAY: i64 = 86_400;
/// 2023-01-01T00:00:00Z; all synthetic timestamps start here.
const EPOCH: i64 = 1_672_531_200;

/// One content token per affect, placed in the body of planted posts.
pub const CONTENT_CUES: [(Affect, &str); 16] = [
    (Affect::Adoring, "puppy"),
    (Affect::Connected, "reunion"),
    (Affect::ConstructivelyAngered, "petition"),
    (Affect::DestructivelyAngered, "troll"),
    (Affect::Entertained, "sketch"),
    (Affect::Excited, "concert"),
    (Affect::Grateful, "volunteers"),
    (Affect::Informed, "study"),
    (Affect::Inspired, "marathon"),
    (Affect::Neutral, "schedule"),
    (Affect::Relaxed, "sunset"),
    (Affect::Saddened, "funeral"),
    (Affect::Scared, "storm"),
    (Affect::Surprised, "twist"),
    (Affect::Touched, "tribute"),
    (Affect::Approving, "graduation"),
];

/// Body tokens that drive engagement kinds not tied to an affect.
pub const ENGAGEMENT_CUES: [(EventKind, &str); 6] = [
    (EventKind::Share, "giveaway"),
    (EventKind::OutboundClick, "article"),
    (EventKind::Hide, "spoiler"),
    (EventKind::Snooze, "repost"),
    (EventKind::Unfollow, "rant"),
    (EventKind::Report, "spam"),
];

/// Bio tokens marking a user's habitual reaction.
const STYLE_TOKENS: [(EventKind, &str); 2] = [(EventKind::Like, "thumbs"), (EventKind::Love, "hearts")];

const HELD_OUT_KEYWORDS: [(Affect, [&str; 5]); 8] = [
    (Affect::Adoring, ["darling", "cuddly", "charming", "endearing", "squishy"]),
    (Affect::Entertained, ["comical", "witty", "uproarious", "laughable", "sidesplitting"]),
    (Affect::Excited, ["electrifying", "exhilarating", "epic", "stoked", "pumped"]),
    (Affect::Saddened, ["sorrowful", "gutting", "tearful", "somber", "mournful"]),
    (Affect::Scared, ["spooky", "chilling", "eerie", "ominous", "unnerving"]),
    (Affect::ConstructivelyAngered, ["appalling", "shameful", "enraging", "despicable", "atrocious"]),
    (Affect::DestructivelyAngered, ["appalling", "shameful", "enraging", "despicable", "atrocious"]),
    (Affect::Approving, ["laudable", "exemplary", "praiseworthy", "stellar", "honorable"]),
];

const HELD_OUT_TEMPLATES: [&str; 3] = ["i feel so {kw}", "omg so {kw}", "such a {kw}"];

const TOPICS: [&str; 8] = ["sports", "music", "food", "travel", "tech", "pets", "news", "art"];

const FEELINGS: [&str; 8] = ["blessed", "sad", "excited", "worried", "angry", "thankful", "happy", "annoyed"];

const SYLLABLES: [&str; 14] = ["ba", "ko", "mi", "ru", "te", "zo", "ne", "li", "fa", "du", "po", "si", "ga", "ve"];

/// Two-syllable pseudo-words. None of them is a keyword, template token or
/// cue, so every labeled expression in the output was planted.
pub fn filler_vocabulary() -> Vec<String> {
    SYLLABLES.iter().flat_map(|a| SYLLABLES.iter().map(move |b| format!("{a}{b}"))).collect()
}

/// A named comment template with one `{kw}` slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantTemplate {
    pub id: String,
    pub template: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffectPlant {
    pub affect: Affect,
    /// Probability that a post carries this affect.
    pub post_rate: f64,
    /// Probability that a comment on a carrying post expresses it.
    pub comment_rate: f64,
    pub keywords: Vec<String>,
    pub held_out_keywords: Vec<String>,
    /// Fraction of expressions that use a held-out keyword.
    pub held_out_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub affects: Vec<AffectPlant>,
    pub templates: Vec<PlantTemplate>,
    pub held_out_templates: Vec<PlantTemplate>,
    pub held_out_template_rate: f64,
    /// Probability that a comment expresses an affect its post does not carry.
    pub noise_rate: f64,
    /// Affects with keywords are mutually exclusive per post when set.
    pub exclusive_expressive: bool,
}

impl Default for PlantSpec {
    fn default() -> Self {
        let seeds = Lexicon::seed();
        let affects = Affect::ALL
            .iter()
            .map(|&affect| {
                let keywords: Vec<String> =
                    seeds.keywords_for(CareLabel::from_affect(affect)).into_iter().map(String::from).collect();
                let held_out: Vec<String> = HELD_OUT_KEYWORDS
                    .iter()
                    .find(|(a, _)| *a == affect)
                    .map(|(_, k)| k.iter().map(|s| s.to_string()).collect())
                    .unwrap_or_default();
                let expressive = !keywords.is_empty();
                AffectPlant {
                    affect,
                    post_rate: if expressive { 0.08 } else { 0.06 },
                    comment_rate: if expressive { 0.6 } else { 0.0 },
                    keywords,
                    held_out_keywords: held_out,
                    held_out_rate: if expressive { 0.3 } else { 0.0 },
                }
            })
            .collect();
        let templates =
            PatternSet::seed().iter().map(|p| PlantTemplate { id: p.id.clone(), template: p.template() }).collect();
        let held_out_templates = HELD_OUT_TEMPLATES
            .iter()
            .enumerate()
            .map(|(i, t)| PlantTemplate { id: format!("held_out_{i}"), template: t.to_string() })
            .collect();
        Self {
            affects,
            templates,
            held_out_templates,
            held_out_template_rate: 0.15,
            noise_rate: 0.01,
            exclusive_expressive: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_posts: usize,
    pub n_users: usize,
    pub comments_per_post: usize,
    pub viewers_per_post: usize,
    pub annotated_fraction: f64,
    pub raters_per_post: usize,
    pub rater_pool: usize,
    pub violating_rate: f64,
    /// Probability that a post body carries each engagement cue.
    pub engagement_cue_rate: f64,
    /// Probability that a viewer performs a kind linked to the post.
    pub hit_rate: f64,
    /// Probability that a viewer performs an unlinked kind anyway.
    pub false_event_rate: f64,
    /// Probability that a viewer reacts with their habitual reaction.
    pub reaction_rate: f64,
    pub feeling_rate: f64,
    pub dense_dim: usize,
    pub span_days: i64,
    pub plant_spec: PlantSpec,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_posts: 1000,
            n_users: 400,
            comments_per_post: 8,
            viewers_per_post: 20,
            annotated_fraction: 0.5,
            raters_per_post: 5,
            rater_pool: 40,
            violating_rate: 0.05,
            engagement_cue_rate: 0.08,
            hit_rate: 0.85,
            false_event_rate: 0.005,
            reaction_rate: 0.9,
            feeling_rate: 0.3,
            dense_dim: DEFAULT_DENSE_DIM,
            span_days: 120,
            plant_spec: PlantSpec::default(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: String| Err(CorpusError::InvalidConfig(m));
        let spec = &self.plant_spec;
        let mut rates = vec![
            ("annotated_fraction", self.annotated_fraction),
            ("violating_rate", self.violating_rate),
            ("engagement_cue_rate", self.engagement_cue_rate),
            ("hit_rate", self.hit_rate),
            ("false_event_rate", self.false_event_rate),
            ("reaction_rate", self.reaction_rate),
            ("feeling_rate", self.feeling_rate),
            ("held_out_template_rate", spec.held_out_template_rate),
            ("noise_rate", spec.noise_rate),
        ];
        for a in &spec.affects {
            rates.push(("post_rate", a.post_rate));
            rates.push(("comment_rate", a.comment_rate));
            rates.push(("held_out_rate", a.held_out_rate));
        }
        for (name, r) in rates {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name} = {r} is outside [0, 1]"));
            }
        }
        if spec.exclusive_expressive {
            let total: f64 = spec.affects.iter().filter(|a| !a.keywords.is_empty()).map(|a| a.post_rate).sum();
            if total > 1.0 {
                return bad(format!("exclusive post rates sum to {total} > 1"));
            }
        }
        for t in spec.templates.iter().chain(&spec.held_out_templates) {
            if t.template.split_whitespace().filter(|p| *p == SLOT).count() != 1 {
                return bad(format!("template `{}` must contain exactly one {SLOT}", t.template));
            }
        }
        if spec.templates.is_empty() && spec.affects.iter().any(|a| a.comment_rate > 0.0) {
            return bad("comment expressions need at least one template".into());
        }
        if self.n_posts > 0 && self.n_users == 0 {
            return bad("posts need at least one user".into());
        }
        if self.viewers_per_post > self.n_users {
            return bad("viewers_per_post exceeds n_users".into());
        }
        if self.raters_per_post > self.rater_pool {
            return bad("raters_per_post exceeds rater_pool".into());
        }
        if self.span_days < 1 {
            return bad("span_days must be >= 1".into());
        }
        Ok(())
    }
}

/// A comment that carries a planted expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentPlant {
    /// Position in `Corpus::comments()`.
    pub comment: usize,
    pub post_id: String,
    pub affect: Affect,
    pub template_id: String,
    pub keyword: String,
    /// The expression exactly as it appears in the comment text.
    pub expression: String,
    /// The post does not carry `affect`.
    pub noise: bool,
    pub held_out_keyword: bool,
    pub held_out_template: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Every post id, with its (possibly empty) planted affects.
    pub planted: BTreeMap<String, BTreeSet<Affect>>,
    pub engagement_cues: BTreeMap<String, BTreeSet<EventKind>>,
    pub comment_plants: Vec<CommentPlant>,
    pub held_out_keywords: BTreeMap<Affect, Vec<String>>,
    pub user_style: BTreeMap<String, EventKind>,
}

impl GroundTruth {
    pub fn affects_of(&self, post_id: &str) -> Option<&BTreeSet<Affect>> {
        self.planted.get(post_id)
    }
}

fn linked_kind(affect: Affect) -> Option<EventKind> {
    match affect {
        Affect::Entertained => Some(EventKind::Haha),
        Affect::Surprised => Some(EventKind::Wow),
        Affect::Saddened => Some(EventKind::Sad),
        Affect::Scared => Some(EventKind::Care),
        Affect::ConstructivelyAngered | Affect::DestructivelyAngered => Some(EventKind::Angry),
        _ => None,
    }
}

fn cue(affect: Affect) -> &'static str {
    CONTENT_CUES.iter().find(|(a, _)| *a == affect).map(|(_, c)| *c).expect("every affect has a cue")
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

struct Gen {
    rng: ChaCha8Rng,
    fillers: Vec<String>,
}

impl Gen {
    fn fillers(&mut self, lo: usize, hi: usize) -> Vec<String> {
        let n = self.rng.gen_range(lo..=hi);
        (0..n).map(|_| self.fillers.choose(&mut self.rng).expect("non-empty").clone()).collect()
    }

    fn capitalize(s: &str) -> String {
        let mut c = s.chars();
        match c.next() {
            Some(f) => f.to_uppercase().chain(c).collect(),
            None => String::new(),
        }
    }

    fn render(&mut self, template: &str, keyword: &str) -> String {
        let text = template.replace(SLOT, keyword);
        match self.rng.gen_range(0..4) {
            0 => Self::capitalize(&text),
            1 => text.to_uppercase(),
            _ => text,
        }
    }

    fn sentence(&mut self, middle: Option<&str>) -> String {
        let mut words = self.fillers(if middle.is_some() { 0 } else { 2 }, if middle.is_some() { 3 } else { 6 });
        if let Some(m) = middle {
            let at = self.rng.gen_range(0..=words.len());
            words.insert(at, m.to_string());
        }
        let punct = ["", "!", ".", "!!", " :)", "?"].choose(&mut self.rng).copied().unwrap_or("");
        format!("{}{punct}", words.join(" "))
    }
}

/// Generates a corpus with planted affects, comment expressions, correlated
/// engagement, and noisy annotations. A pure function of `(seed, config)`.
pub fn synth_corpus(seed: u64, config: &SynthConfig) -> Result<(Corpus, GroundTruth), CorpusError> {
    config.validate()?;
    let spec = &config.plant_spec;
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), fillers: filler_vocabulary() };

    let mut users = Vec::with_capacity(config.n_users);
    let mut user_style = BTreeMap::new();
    for i in 0..config.n_users {
        let id = format!("u{i:05}");
        let (style, token) = *STYLE_TOKENS.choose(&mut g.rng).expect("non-empty");
        let mut bio = g.fillers(2, 4);
        let at = g.rng.gen_range(0..=bio.len());
        bio.insert(at, token.to_string());
        let n_topics = g.rng.gen_range(1..=3);
        let mut interests: Vec<String> = TOPICS.choose_multiple(&mut g.rng, n_topics).map(|t| t.to_string()).collect();
        interests.sort();
        let network_stats = (0..config.dense_dim).map(|_| round4(g.rng.gen_range(0.0..1.0))).collect();
        user_style.insert(id.clone(), style);
        users.push(User { id, bio_text: bio.join(" "), interests, network_stats });
    }

    let expressive: Vec<&AffectPlant> = spec.affects.iter().filter(|a| !a.keywords.is_empty()).collect();
    let mut posts = Vec::with_capacity(config.n_posts);
    let mut planted = BTreeMap::new();
    let mut engagement_cues = BTreeMap::new();
    for i in 0..config.n_posts {
        let id = format!("p{i:05}");
        let mut affects = BTreeSet::new();
        if spec.exclusive_expressive {
            let mut u: f64 = g.rng.gen_range(0.0..1.0);
            for a in &expressive {
                if u < a.post_rate {
                    affects.insert(a.affect);
                    break;
                }
                u -= a.post_rate;
            }
        }
        for a in &spec.affects {
            if spec.exclusive_expressive && !a.keywords.is_empty() {
                continue;
            }
            if g.rng.gen_bool(a.post_rate) {
                affects.insert(a.affect);
            }
        }
        let mut cues = BTreeSet::new();
        for (kind, _) in ENGAGEMENT_CUES {
            if g.rng.gen_bool(config.engagement_cue_rate) {
                cues.insert(kind);
            }
        }
        let title = Gen::capitalize(&g.fillers(2, 3).join(" "));
        let mut body = g.fillers(3, 6);
        for token in affects
            .iter()
            .map(|&a| cue(a))
            .chain(ENGAGEMENT_CUES.iter().filter(|(k, _)| cues.contains(k)).map(|(_, t)| *t))
        {
            let at = g.rng.gen_range(0..=body.len());
            body.insert(at, token.to_string());
        }
        let ocr_text = g.rng.gen_bool(0.2).then(|| g.fillers(2, 2).join(" "));
        let author = users[g.rng.gen_range(0..users.len())].id.clone();
        let created_at = EPOCH + g.rng.gen_range(0..config.span_days * DAY);
        let violating = g.rng.gen_bool(config.violating_rate);
        let dense_features = (0..config.dense_dim).map(|_| round4(g.rng.gen_range(-1.0..1.0))).collect();
        let feeling = g.rng.gen_bool(config.feeling_rate).then(|| pick_feeling(&mut g.rng, &affects));
        posts.push(Post {
            id: id.clone(),
            title,
            body: format!("{}.", body.join(" ")),
            ocr_text,
            author_id: author,
            created_at,
            violating,
            dense_features,
            feeling,
        });
        planted.insert(id.clone(), affects);
        engagement_cues.insert(id, cues);
    }

    let mut comments = Vec::new();
    let mut comment_plants = Vec::new();
    for post in &posts {
        let affects = &planted[&post.id];
        for _ in 0..config.comments_per_post {
            let mut plant: Option<(&AffectPlant, bool)> = None;
            for a in spec.affects.iter().filter(|a| affects.contains(&a.affect)) {
                if !a.keywords.is_empty() && g.rng.gen_bool(a.comment_rate) {
                    plant = Some((a, false));
                    break;
                }
            }
            if plant.is_none() && !expressive.is_empty() && g.rng.gen_bool(spec.noise_rate) {
                let a = *expressive.choose(&mut g.rng).expect("non-empty");
                if !affects.contains(&a.affect) {
                    plant = Some((a, true));
                }
            }
            let author_id = users[g.rng.gen_range(0..users.len())].id.clone();
            let created_at = post.created_at + g.rng.gen_range(0..3 * DAY);
            let text = match plant {
                None => g.sentence(None),
                Some((a, noise)) => {
                    let held_kw = !a.held_out_keywords.is_empty() && g.rng.gen_bool(a.held_out_rate);
                    let keyword = if held_kw { &a.held_out_keywords } else { &a.keywords }
                        .choose(&mut g.rng)
                        .expect("non-empty")
                        .clone();
                    let held_tpl = !spec.held_out_templates.is_empty() && g.rng.gen_bool(spec.held_out_template_rate);
                    let tpl = if held_tpl { &spec.held_out_templates } else { &spec.templates }
                        .choose(&mut g.rng)
                        .expect("non-empty")
                        .clone();
                    let expression = g.render(&tpl.template, &keyword);
                    let text = g.sentence(Some(&expression));
                    comment_plants.push(CommentPlant {
                        comment: comments.len(),
                        post_id: post.id.clone(),
                        affect: a.affect,
                        template_id: tpl.id,
                        keyword,
                        expression,
                        noise,
                        held_out_keyword: held_kw,
                        held_out_template: held_tpl,
                    });
                    text
                }
            };
            comments.push(Comment { post_id: post.id.clone(), text, author_id, created_at });
        }
    }

    let mut events = Vec::new();
    for post in &posts {
        if config.viewers_per_post == 0 {
            break;
        }
        let affects = &planted[&post.id];
        let cues = &engagement_cues[&post.id];
        let mut linked: BTreeSet<EventKind> = affects.iter().filter_map(|&a| linked_kind(a)).collect();
        linked.extend(cues.iter().copied());
        let mut viewers = index::sample(&mut g.rng, users.len(), config.viewers_per_post).into_vec();
        viewers.sort_unstable();
        for v in viewers {
            let user = &users[v];
            let style = user_style[&user.id];
            let t = post.created_at + g.rng.gen_range(0..10 * DAY);
            let mut kinds = BTreeSet::new();
            if g.rng.gen_bool(config.reaction_rate) {
                kinds.insert(style);
            }
            for &k in &linked {
                if g.rng.gen_bool(config.hit_rate) {
                    kinds.insert(k);
                }
            }
            for k in EventKind::ALL {
                if matches!(k, EventKind::Like | EventKind::Love) || linked.contains(&k) {
                    continue;
                }
                if g.rng.gen_bool(config.false_event_rate) {
                    kinds.insert(k);
                }
            }
            if kinds.is_empty() {
                kinds.insert(style);
            }
            for (j, kind) in kinds.into_iter().enumerate() {
                events.push(EngagementEvent {
                    post_id: post.id.clone(),
                    user_id: user.id.clone(),
                    kind,
                    at: t + j as i64,
                });
            }
        }
    }

    let recall: Vec<f64> = (0..config.rater_pool).map(|_| g.rng.gen_range(0.6..0.9)).collect();
    let choices = Choice::all();
    let mut annotations = Vec::new();
    for post in &posts {
        if config.raters_per_post == 0 || !g.rng.gen_bool(config.annotated_fraction) {
            continue;
        }
        let affects: Vec<Affect> = planted[&post.id].iter().copied().collect();
        let mut raters = index::sample(&mut g.rng, config.rater_pool, config.raters_per_post).into_vec();
        raters.sort_unstable();
        for r in raters {
            let mut selected: BTreeSet<Choice> = BTreeSet::new();
            for &a in &affects {
                if g.rng.gen_bool(recall[r]) {
                    selected.insert(Choice::Affect(a));
                }
            }
            if g.rng.gen_bool(0.2) {
                selected.insert(*choices.choose(&mut g.rng).expect("non-empty"));
            }
            if selected.is_empty() {
                selected.insert(match affects.choose(&mut g.rng) {
                    Some(&a) => Choice::Affect(a),
                    None if g.rng.gen_bool(0.6) => Choice::Affect(Affect::Neutral),
                    None => Choice::Other,
                });
            }
            while selected.len() > MAX_SELECTIONS {
                let drop = *selected.iter().nth(g.rng.gen_range(0..selected.len())).expect("in range");
                selected.remove(&drop);
            }
            annotations.push(AnnotationRecord { post_id: post.id.clone(), rater_id: format!("r{r:03}"), selected });
        }
    }

    let held_out_keywords = spec
        .affects
        .iter()
        .filter(|a| !a.held_out_keywords.is_empty())
        .map(|a| (a.affect, a.held_out_keywords.clone()))
        .collect();
    let truth = GroundTruth { planted, engagement_cues, comment_plants, held_out_keywords, user_style };
    let corpus = Corpus::new(posts, users, comments, events, annotations)?;
    Ok((corpus, truth))
}

fn pick_feeling(rng: &mut ChaCha8Rng, affects: &BTreeSet<Affect>) -> String {
    let linked = [
        (Affect::Saddened, "sad", 0.5),
        (Affect::Scared, "worried", 0.4),
        (Affect::DestructivelyAngered, "angry", 0.4),
        (Affect::ConstructivelyAngered, "annoyed", 0.4),
        (Affect::Excited, "excited", 0.3),
        (Affect::Grateful, "thankful", 0.4),
        (Affect::Entertained, "happy", 0.3),
    ];
    for (affect, feeling, p) in linked {
        if affects.contains(&affect) && rng.gen_bool(p) {
            return feeling.to_string();
        }
    }
    FEELINGS.choose(rng).expect("non-empty").to_string()
}

/// Survey answers for random (non-violating post, user) pairs. The latent
/// value rises with positive planted affects and falls with negative ones,
/// plus small dense-feature terms and Gaussian noise; answers are split at
/// the median so the set is balanced.
pub fn synth_survey(corpus: &Corpus, truth: &GroundTruth, seed: u64, n: usize) -> Vec<SurveyResponse> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<usize> = (0..corpus.posts().len()).filter(|&i| !corpus.posts()[i].violating).collect();
    if candidates.is_empty() || corpus.users().is_empty() {
        return Vec::new();
    }
    let max_pairs = candidates.len() * corpus.users().len();
    let noise = Normal::new(0.0, 0.5).expect("valid sigma");
    let mut seen = BTreeSet::new();
    let mut rows = Vec::with_capacity(n.min(max_pairs));
    while rows.len() < n.min(max_pairs) {
        let p = candidates[rng.gen_range(0..candidates.len())];
        let u = rng.gen_range(0..corpus.users().len());
        if !seen.insert((p, u)) {
            continue;
        }
        let post = &corpus.posts()[p];
        let user = &corpus.users()[u];
        let affect_term: f64 = truth.affects_of(&post.id).into_iter().flatten().map(|&a| valence(a)).sum();
        let dense = post.dense_features.first().copied().unwrap_or(0.0);
        let stat = user.network_stats.first().copied().unwrap_or(0.5) - 0.5;
        let value = affect_term + 0.5 * dense + 0.8 * stat + noise.sample(&mut rng);
        rows.push((post.id.clone(), user.id.clone(), value));
    }
    let mut values: Vec<f64> = rows.iter().map(|r| r.2).collect();
    values.sort_by(f64::total_cmp);
    let median = values.get(values.len() / 2).copied().unwrap_or(0.0);
    rows.into_iter().map(|(post_id, user_id, v)| SurveyResponse { post_id, user_id, answer: v >= median }).collect()
}

fn valence(a: Affect) -> f64 {
    if a.is_negative() {
        -1.0
    } else if a == Affect::Neutral {
        0.0
    } else {
        1.0
    }
}
